//! Several antennas with independent per-antenna shadowing and best-server
//! association.
//!
//! The observed antenna `y_0` serves a user at `x` only when no other antenna
//! offers a better signal; conditioning on the serving attenuation `s` (gain
//! `g = 1/s`), that event factorizes over the interferers because their gains
//! are independent. The class masses then follow from a radial-by-angular
//! quadrature of the serve probability against the gain law, and an
//! independent Monte Carlo path samples the full marked process.
//!
//! Two association variants are provided. `MaxSir` implements the physical
//! rule (serve iff `y_0` attains the maximal `g_j / ||x - y_j||^gamma`).
//! `InvertedRatio` inverts the distance ratio in the per-interferer
//! comparison; it is kept for numerical archaeology and reported alongside.

use crate::error::{Error, Result};
use crate::model::{beta_tilde, n_max_from_beta_min, Mode, OutagePolicy, Scenario};
use crate::moments::ClassMasses;
use crate::montecarlo::{wilson_interval, MCEstimate};
use crate::ppp::RngSpec;
use crate::quadrature::{integrate_1d, integrate_polar_disk, QuadSpec};
use crate::specfun::normal_cdf;
use rand::Rng;

/// Antenna positions; the first is the observed (serving-candidate) antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaLayout {
    pub serving: (f64, f64),
    pub interferers: Vec<(f64, f64)>,
}

impl AntennaLayout {
    pub fn validate(&self) -> Result<()> {
        let mut all = vec![self.serving];
        all.extend_from_slice(&self.interferers);
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let (dx, dy) = (all[i].0 - all[j].0, all[i].1 - all[j].1);
                if dx == 0.0 && dy == 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "antennas {i} and {j} coincide at ({}, {})",
                        all[i].0, all[i].1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest distance from the serving antenna to any other antenna.
    pub fn max_interferer_distance(&self) -> f64 {
        self.interferers
            .iter()
            .map(|&(x, y)| ((x - self.serving.0).powi(2) + (y - self.serving.1).powi(2)).sqrt())
            .fold(0.0, f64::max)
    }
}

/// The six neighbors of a hexagonal arrangement with inter-site distance
/// `2 * radius`: `(+-2R, 0)` and `(+-R, +-R sqrt(3))`, observed antenna at
/// the origin.
pub fn hex_layout(radius: f64) -> AntennaLayout {
    let r = radius;
    let s3 = 3f64.sqrt();
    AntennaLayout {
        serving: (0.0, 0.0),
        interferers: vec![
            (2.0 * r, 0.0),
            (r, r * s3),
            (-r, r * s3),
            (-2.0 * r, 0.0),
            (-r, -r * s3),
            (r, -r * s3),
        ],
    }
}

/// Which antenna serves a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Association {
    /// Serve iff the observed antenna offers the maximal gain-over-path-loss.
    MaxSir,
    /// The same comparison with the distance ratio inverted, as printed in
    /// the source derivation. Not physically meaningful; kept for comparison.
    InvertedRatio,
}

/// Where users may appear.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserRegion {
    /// The disk of `region_radius` around the observed antenna.
    Disk,
    /// The union of the per-antenna cell disks of the base cell radius
    /// (requires pairwise antenna distances >= 2 * cell radius).
    Cells,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticellScenario {
    pub base: Scenario,
    pub layout: AntennaLayout,
    /// Truncation radius of the modeled region around the observed antenna.
    pub region_radius: f64,
    pub association: Association,
    pub region: UserRegion,
}

impl MulticellScenario {
    pub fn validate(&self) -> Result<()> {
        if self.base.mode == Mode::Deterministic {
            return Err(Error::InvalidParameter(
                "multicell analysis requires a shadowed base scenario".into(),
            ));
        }
        let sh_check = Scenario { mode: Mode::Shadowed, ..self.base };
        sh_check.validate()?;
        self.layout.validate()?;
        let needed = self.layout.max_interferer_distance() + self.base.cell.radius;
        if self.region_radius + 1e-9 < needed {
            return Err(Error::InvalidParameter(format!(
                "region_radius {} does not cover the layout (needs >= {needed})",
                self.region_radius
            )));
        }
        if self.region == UserRegion::Cells {
            let r2 = 2.0 * self.base.cell.radius;
            let mut all = vec![self.layout.serving];
            all.extend_from_slice(&self.layout.interferers);
            for i in 0..all.len() {
                for j in i + 1..all.len() {
                    let d = ((all[i].0 - all[j].0).powi(2) + (all[i].1 - all[j].1).powi(2)).sqrt();
                    if d < r2 * (1.0 - 1e-12) {
                        return Err(Error::InvalidParameter(format!(
                            "cell disks of antennas {i} and {j} overlap (distance {d} < {r2})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Area of the user region.
    pub fn region_area(&self) -> f64 {
        match self.region {
            UserRegion::Disk => std::f64::consts::PI * self.region_radius * self.region_radius,
            UserRegion::Cells => {
                (self.layout.interferers.len() + 1) as f64
                    * std::f64::consts::PI
                    * self.base.cell.radius
                    * self.base.cell.radius
            }
        }
    }

    /// Expected number of users in the region.
    pub fn mean_user_count(&self) -> f64 {
        self.base.user_intensity() * self.region_area()
    }
}

/// Per-interferer dB-domain offsets: under `MaxSir` the factor for
/// interferer `i` is `Phi(-z + t_i)` with `t_i = 10 gamma log10(d_i / d_0)
/// / sigma`, where `z` is the standard-normal variable behind the serving
/// attenuation. `InvertedRatio` flips the sign of `t_i`.
fn interferer_offsets(x: (f64, f64), mc: &MulticellScenario) -> (f64, Vec<f64>) {
    let sh = mc.base.shadowing.expect("validated");
    let d0 = ((x.0 - mc.layout.serving.0).powi(2) + (x.1 - mc.layout.serving.1).powi(2)).sqrt();
    let sign = match mc.association {
        Association::MaxSir => 1.0,
        Association::InvertedRatio => -1.0,
    };
    let ts = mc
        .layout
        .interferers
        .iter()
        .map(|&(ix, iy)| {
            let di = ((x.0 - ix).powi(2) + (x.1 - iy).powi(2)).sqrt();
            sign * 10.0 * mc.base.radio.gamma * (di / d0).log10() / sh.sigma_db
        })
        .collect();
    (d0, ts)
}

/// Probability, over the other antennas' independent gains, that the
/// observed antenna is the chosen server for a user at `x` whose serving
/// gain is `g = 1/s`.
pub fn serve_probability(x: (f64, f64), g: f64, mc: &MulticellScenario) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::InvalidParameter(format!("serving gain must be positive, got {g}")));
    }
    mc.validate()?;
    let sh = mc.base.shadowing.expect("validated");
    // z such that s = 1/g has attenuation quantile z
    let z = (-10.0 * g.log10() - sh.mu_db) / sh.sigma_db;
    let (_, ts) = interferer_offsets(x, mc);
    Ok(ts.iter().map(|&t| normal_cdf(-z + t)).product())
}

/// The standard-normal bound on `z` below which the serving SIR clears
/// `beta_tilde`-style threshold `s * d0^gamma <= cap`.
fn z_upper(cap: f64, d0: f64, sc: &Scenario) -> f64 {
    let sh = sc.shadowing.expect("validated");
    (10.0 * cap.log10() - 10.0 * sc.radio.gamma * d0.log10() - sh.mu_db) / sh.sigma_db
}

/// Class masses of the demand toward the observed antenna, by quadrature of
/// the serve probability against the gain law over the user region.
pub fn multicell_class_masses(mc: &MulticellScenario, spec: &QuadSpec) -> Result<ClassMasses> {
    mc.validate()?;
    spec.validate()?;
    let n_max = n_max_from_beta_min(&mc.base.radio)?;
    let radio = mc.base.radio;
    let inner_spec = QuadSpec { abs_tol: 1e-12, rel_tol: 1e-9, max_subdivisions: 60 };
    let inv_sqrt_2pi = 1.0 / (2.0 * std::f64::consts::PI).sqrt();

    // integration domains: one polar disk per cell, or the single truncation disk
    let disks: Vec<((f64, f64), f64)> = match mc.region {
        UserRegion::Disk => vec![(mc.layout.serving, mc.region_radius)],
        UserRegion::Cells => {
            let mut d = vec![(mc.layout.serving, mc.base.cell.radius)];
            d.extend(mc.layout.interferers.iter().map(|&c| (c, mc.base.cell.radius)));
            d
        }
    };

    // mass density (per unit area) of class j at position x
    let class_density = |x: (f64, f64), j: u32| -> Result<f64> {
        let (d0, ts) = interferer_offsets(x, mc);
        if d0 == 0.0 {
            // measure-zero center; class 1 takes the limit value 1
            return Ok(if j == 1 { 1.0 } else { 0.0 });
        }
        let z_lo = if j == 1 { -8.0 } else { z_upper(beta_tilde(&radio, j - 1), d0, &mc.base) };
        let z_hi = if j == n_max {
            match mc.base.outage_policy {
                OutagePolicy::ClampToNmax => 8.0,
                OutagePolicy::Exclude => z_upper(radio.p_ratio / radio.beta_min, d0, &mc.base),
            }
        } else {
            z_upper(beta_tilde(&radio, j), d0, &mc.base)
        };
        let (lo, hi) = (z_lo.clamp(-8.0, 8.0), z_hi.clamp(-8.0, 8.0));
        if hi <= lo {
            return Ok(0.0);
        }
        let q = integrate_1d(
            |z| {
                let phi = inv_sqrt_2pi * (-0.5 * z * z).exp();
                phi * ts.iter().map(|&t| normal_cdf(-z + t)).product::<f64>()
            },
            lo,
            hi,
            &inner_spec,
        )?;
        Ok(q.value)
    };

    let density = mc.base.user_intensity();
    let mut lambdas = vec![0.0f64; n_max as usize];
    let mut worst_converged = true;
    for (li, lambda) in lambdas.iter_mut().enumerate() {
        let j = li as u32 + 1;
        for &(center, radius) in &disks {
            let q = integrate_polar_disk(
                |r, th| {
                    let x = (center.0 + r * th.cos(), center.1 + r * th.sin());
                    class_density(x, j).unwrap_or(0.0)
                },
                radius,
                spec,
            )?;
            if !q.converged {
                worst_converged = false;
            }
            *lambda += density * q.value;
        }
    }
    if !worst_converged {
        return Err(Error::Accuracy(
            "multicell quadrature hit its refinement cap before the tolerance".into(),
        ));
    }
    Ok(ClassMasses { lambdas })
}

/// One snapshot of total demand toward the observed antenna: users Poisson
/// over the region, each with independent per-antenna attenuations, attached
/// by the association rule, admitted at `beta_min`.
pub fn sample_total_demand_multicell<R: Rng>(
    mc: &MulticellScenario,
    rng: &mut R,
) -> Result<u64> {
    let sh = mc.base.shadowing.ok_or_else(|| {
        Error::InvalidParameter("multicell sampling requires shadowing parameters".into())
    })?;
    let radio = mc.base.radio;
    let n_max = n_max_from_beta_min(&radio)?;
    let count = crate::ppp::sample_count(mc.mean_user_count(), rng)?;
    let n_cells = mc.layout.interferers.len() + 1;
    let mut total = 0u64;
    for _ in 0..count {
        // position
        let x = match mc.region {
            UserRegion::Disk => {
                let r = mc.region_radius * rng.random::<f64>().sqrt();
                let th = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                (
                    mc.layout.serving.0 + r * th.cos(),
                    mc.layout.serving.1 + r * th.sin(),
                )
            }
            UserRegion::Cells => {
                let cell = (rng.random::<f64>() * n_cells as f64) as usize;
                let center = if cell == 0 {
                    mc.layout.serving
                } else {
                    mc.layout.interferers[(cell - 1).min(mc.layout.interferers.len() - 1)]
                };
                let r = mc.base.cell.radius * rng.random::<f64>().sqrt();
                let th = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                (center.0 + r * th.cos(), center.1 + r * th.sin())
            }
        };
        // per-antenna attenuations in z (standard normal) form, serving first
        let marks: Vec<f64> = crate::ppp::sample_marks((n_cells) as u64, &sh, rng);
        let d0 = ((x.0 - mc.layout.serving.0).powi(2) + (x.1 - mc.layout.serving.1).powi(2))
            .sqrt();
        let s0 = marks[0];
        // attachment test mirrors serve_probability: interferer i wins when
        // its z-variable exceeds -z0 + t_i fails, i.e. z_i < ... ; compare in
        // dB to avoid overflow
        let z0 = (10.0 * s0.log10() - sh.mu_db) / sh.sigma_db;
        let (_, ts) = interferer_offsets(x, mc);
        let mut served = true;
        for (i, &t) in ts.iter().enumerate() {
            let zi = (10.0 * marks[i + 1].log10() - sh.mu_db) / sh.sigma_db;
            // the conditional serve factor is P(z_i > z0 - t); the draw loses
            // when z_i <= z0 - t
            if zi <= z0 - t {
                served = false;
                break;
            }
        }
        if !served {
            continue;
        }
        match crate::model::demand_shadowed(d0, s0, &radio) {
            Some(j) => total += j as u64,
            None => {
                if mc.base.outage_policy == OutagePolicy::ClampToNmax {
                    total += n_max as u64;
                }
            }
        }
    }
    Ok(total)
}

/// Monte Carlo estimate of `P(total multicell demand > n0)`, deterministic
/// in `(seed, n_reps)` for any worker count.
pub fn estimate_loss_multicell(
    mc: &MulticellScenario,
    n0: u64,
    n_reps: u64,
    seed: u64,
) -> Result<MCEstimate> {
    estimate_loss_multicell_with_workers(mc, n0, n_reps, seed, 1)
}

pub fn estimate_loss_multicell_with_workers(
    mc: &MulticellScenario,
    n0: u64,
    n_reps: u64,
    seed: u64,
    workers: usize,
) -> Result<MCEstimate> {
    if n_reps < 1_000 {
        return Err(Error::InvalidParameter(format!(
            "need at least 1000 replications, got {n_reps}"
        )));
    }
    if workers < 1 {
        return Err(Error::InvalidParameter("worker count must be >= 1".into()));
    }
    mc.validate()?;
    let workers = workers.min(n_reps as usize);
    let chunk = n_reps.div_ceil(workers as u64);
    let hits: u64 = std::thread::scope(|scope| -> Result<u64> {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(n_reps);
                scope.spawn(move || -> Result<u64> {
                    let mut hits = 0u64;
                    for rep in lo..hi {
                        let mut rng = RngSpec { seed, stream: rep }.rng();
                        if sample_total_demand_multicell(mc, &mut rng)? > n0 {
                            hits += 1;
                        }
                    }
                    Ok(hits)
                })
            })
            .collect();
        let mut total = 0u64;
        for h in handles {
            total += h.join().expect("worker panicked")?;
        }
        Ok(total)
    })?;
    let p_hat = hits as f64 / n_reps as f64;
    let (ci_low, ci_high) = wilson_interval(hits, n_reps);
    let warning = (hits < 20).then(|| {
        format!("only {hits} hits observed; the interval is unreliable below 20")
    });
    Ok(MCEstimate { p_hat, ci_low, ci_high, n_reps, seed, method: "wilson99", warning })
}
