//! First and second moments of the total subcarrier demand, via the class
//! decomposition of the user intensity measure.
//!
//! Because per-user demand takes finitely many values, everything reduces to
//! the vector of class masses `lambda_j` (expected number of class-`j` users
//! in equilibrium). Both the concentration bound and the exact loss
//! distribution are functions of that vector alone, so this module is the
//! single place where geometry and shadowing are integrated out.

use crate::error::{Error, Result};
use crate::model::{DemandThresholds, Mode, OutagePolicy, Scenario};
use crate::quadrature::{integrate_1d, QuadSpec};
use crate::specfun::normal_cdf;

/// Mean `m` and quadratic characteristic `v` of the total demand.
///
/// `v` is the second-moment integral of per-user demand against the user
/// intensity (not a central variance); for a demand functional it coincides
/// with the quadratic term the concentration bound needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    pub m: f64,
    pub v: f64,
}

/// Poisson intensity mass per demand class; `lambdas[j - 1]` is the expected
/// number of users needing exactly `j` subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMasses {
    pub lambdas: Vec<f64>,
}

impl ClassMasses {
    pub fn n_max(&self) -> u32 {
        self.lambdas.len() as u32
    }

    /// Total expected number of served users.
    pub fn total(&self) -> f64 {
        self.lambdas.iter().sum()
    }
}

/// Class masses in deterministic mode: class `j` is the annulus between the
/// demand radii, so `lambda_j = (pi rho / nu)(R_j^2 - R_{j-1}^2)`.
pub fn class_masses_deterministic(
    scenario: &Scenario,
    thresholds: &DemandThresholds,
) -> Result<ClassMasses> {
    if scenario.mode != Mode::Deterministic {
        return Err(Error::InvalidParameter(
            "class_masses_deterministic requires deterministic mode".into(),
        ));
    }
    let c = std::f64::consts::PI * scenario.user_intensity();
    let lambdas = thresholds
        .radii
        .windows(2)
        .map(|w| c * (w[1] * w[1] - w[0] * w[0]))
        .collect();
    Ok(ClassMasses { lambdas })
}

/// The mass of positions from which a user with shadowed attenuation reaches
/// SIR at least `beta`: `A(beta) = 2 pi int_0^R r Phi(alpha - zeta ln r) dr`
/// in closed form, where `alpha = (10 log10(p_ratio / beta) - mu) / sigma`
/// and `zeta = 10 gamma / (sigma ln 10)`.
///
/// Derivation: integrate by parts against `r^2/2`; the boundary term gives
/// the first summand and the Gaussian integral of `r^2` against the normal
/// density in `ln r` completes the square into the `e^{2/zeta^2 + 2
/// alpha/zeta}` factor.
fn a_mass(beta: f64, scenario: &Scenario) -> Result<f64> {
    let sh = scenario
        .shadowing
        .ok_or_else(|| Error::InvalidParameter("a_mass requires shadowing parameters".into()))?;
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("a_mass requires beta > 0, got {beta}")));
    }
    let r = scenario.cell.radius;
    let alpha = (10.0 * (scenario.radio.p_ratio / beta).log10() - sh.mu_db) / sh.sigma_db;
    let zeta = 10.0 * scenario.radio.gamma / (sh.sigma_db * std::f64::consts::LN_10);
    let pi = std::f64::consts::PI;
    Ok(pi * r * r * normal_cdf(alpha - zeta * r.ln())
        + pi
            * (2.0 / (zeta * zeta) + 2.0 * alpha / zeta).exp()
            * normal_cdf(zeta * r.ln() - 2.0 / zeta - alpha))
}

/// Closed-form `A_j = A(beta_j)` for class index `1 <= j <= n_max - 1`.
/// `A_0 = 0` by convention and is not a valid argument here.
pub fn a_j_closed(j: u32, scenario: &Scenario) -> Result<f64> {
    let n_max = crate::model::n_max_from_beta_min(&scenario.radio)?;
    if j < 1 || j >= n_max {
        return Err(Error::InvalidParameter(format!(
            "class index {j} outside 1..{n_max} (exclusive upper)"
        )));
    }
    a_mass(crate::model::beta_j(&scenario.radio, j), scenario)
}

/// Independent evaluation of `A_j` by adaptive radial quadrature, to absolute
/// tolerance `tol * pi R^2`.
pub fn a_j_quadrature(j: u32, scenario: &Scenario, tol: f64) -> Result<f64> {
    let n_max = crate::model::n_max_from_beta_min(&scenario.radio)?;
    if j < 1 || j >= n_max {
        return Err(Error::InvalidParameter(format!(
            "class index {j} outside 1..{n_max} (exclusive upper)"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let sh = scenario
        .shadowing
        .ok_or_else(|| Error::InvalidParameter("quadrature requires shadowing parameters".into()))?;
    let r = scenario.cell.radius;
    let alpha = (10.0
        * (scenario.radio.p_ratio / crate::model::beta_j(&scenario.radio, j)).log10()
        - sh.mu_db)
        / sh.sigma_db;
    let zeta = 10.0 * scenario.radio.gamma / (sh.sigma_db * std::f64::consts::LN_10);
    let spec = QuadSpec {
        abs_tol: tol * std::f64::consts::PI * r * r,
        rel_tol: tol,
        ..QuadSpec::default()
    };
    let q = integrate_1d(|x| x * normal_cdf(alpha - zeta * x.ln()), 0.0, r, &spec)?;
    if !q.converged {
        return Err(Error::Accuracy(format!(
            "radial quadrature stalled at error {}",
            q.error_estimate
        )));
    }
    Ok(2.0 * std::f64::consts::PI * q.value)
}

/// Class masses in shadowed mode.
///
/// Classes below `n_max` get `(rho/nu)(A_j - A_{j-1})`. The top class depends
/// on the outage policy: under `ClampToNmax` every admitted-or-not user below
/// the class-`(n_max - 1)` threshold counts, giving `(rho/nu)(pi R^2 -
/// A_{n_max-1})`; under `Exclude` only users meeting `beta_min` remain,
/// giving `(rho/nu)(A(beta_min) - A_{n_max-1})`.
pub fn class_masses_shadowed(scenario: &Scenario) -> Result<ClassMasses> {
    if scenario.mode != Mode::Shadowed {
        return Err(Error::InvalidParameter(
            "class_masses_shadowed requires shadowed mode".into(),
        ));
    }
    scenario.validate()?;
    let n_max = crate::model::n_max_from_beta_min(&scenario.radio)?;
    let density = scenario.user_intensity();
    let mut lambdas = Vec::with_capacity(n_max as usize);
    let mut prev = 0.0;
    for j in 1..n_max {
        let aj = a_j_closed(j, scenario)?;
        lambdas.push(density * (aj - prev));
        prev = aj;
    }
    let top = match scenario.outage_policy {
        OutagePolicy::ClampToNmax => {
            let r = scenario.cell.radius;
            density * (std::f64::consts::PI * r * r - prev)
        }
        OutagePolicy::Exclude => {
            density * (a_mass(scenario.radio.beta_min, scenario)? - prev)
        }
    };
    lambdas.push(top.max(0.0));
    Ok(ClassMasses { lambdas })
}

/// Class masses for whatever mode the scenario is in (multicell has its own
/// entry point in the multicell module).
pub fn class_masses(scenario: &Scenario) -> Result<ClassMasses> {
    match scenario.mode {
        Mode::Deterministic => {
            let t = crate::model::compute_thresholds(scenario)?;
            class_masses_deterministic(scenario, &t)
        }
        Mode::Shadowed => class_masses_shadowed(scenario),
        Mode::Multicell => Err(Error::InvalidParameter(
            "multicell class masses come from the multicell module".into(),
        )),
    }
}

/// `m = sum j lambda_j`, `v = sum j^2 lambda_j`.
pub fn moments_from_classes(classes: &ClassMasses) -> MomentPair {
    let mut m = 0.0;
    let mut v = 0.0;
    for (i, &l) in classes.lambdas.iter().enumerate() {
        let j = (i + 1) as f64;
        m += j * l;
        v += j * j * l;
    }
    MomentPair { m, v }
}
