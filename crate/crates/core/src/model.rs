//! Scenario parameterization and the per-user subcarrier-demand functions.
//!
//! A user at distance `r` with attenuation `s` sees the signal-to-interference
//! ratio `p_ratio * mean_gain / r^gamma` (deterministic mode) or
//! `p_ratio / (s * r^gamma)` (shadowed mode), and needs
//! `ceil(c0 / (w * log2(1 + SIR)))` subcarriers to reach capacity `c0`.
//! Demand is integer-valued and piecewise constant, which turns the scenario
//! into a small set of demand classes; the threshold structure computed here
//! is shared by the moment formulas, the exact loss oracle and the simulator.

use crate::error::{Error, Result};

/// Radio-layer constants. `p_ratio` is the combined constant `P_t K / I`;
/// the three factors never appear separately anywhere in the model.
/// `mean_gain` is an independent input and is deliberately not derived from
/// the shadowing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    /// Path-loss exponent, > 0.
    pub gamma: f64,
    /// Required capacity per user, bit/s.
    pub c0: f64,
    /// Subcarrier bandwidth, Hz.
    pub w: f64,
    /// Combined transmit/path/noise constant, dimensionless.
    pub p_ratio: f64,
    /// Deterministic mean gain, dimensionless.
    pub mean_gain: f64,
    /// Minimum admissible SIR, >= 0.
    pub beta_min: f64,
}

/// Traffic model: arrivals of surface density `rho` served at rate `nu`.
/// The equilibrium spatial intensity of active users is `rho / nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficParams {
    /// Arrival surface density, s^-1 m^-2.
    pub rho: f64,
    /// Service rate, s^-1.
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    /// Cell radius, m; the antenna sits at the origin.
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shadowing {
    pub mu_db: f64,
    pub sigma_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Deterministic,
    Shadowed,
    Multicell,
}

/// What to do with users whose SIR falls below `beta_min`.
///
/// `ClampToNmax` counts them as demand-class `n_max` users, which is what the
/// closed-form moment decomposition assumes; `Exclude` drops them from the
/// demand sum entirely (radio outage rather than subcarrier loss).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutagePolicy {
    Exclude,
    ClampToNmax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub radio: RadioParams,
    pub traffic: TrafficParams,
    pub cell: CellGeometry,
    pub shadowing: Option<Shadowing>,
    pub mode: Mode,
    pub outage_policy: OutagePolicy,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let r = &self.radio;
        for (name, v) in [
            ("gamma", r.gamma),
            ("c0", r.c0),
            ("w", r.w),
            ("p_ratio", r.p_ratio),
            ("mean_gain", r.mean_gain),
            ("rho", self.traffic.rho),
            ("nu", self.traffic.nu),
            ("radius", self.cell.radius),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(r.beta_min >= 0.0) {
            return Err(Error::InvalidParameter(format!("beta_min must be >= 0, got {}", r.beta_min)));
        }
        match self.mode {
            Mode::Deterministic => {}
            Mode::Shadowed | Mode::Multicell => {
                let sh = self.shadowing.ok_or_else(|| {
                    Error::InvalidParameter("shadowed/multicell modes require shadowing parameters".into())
                })?;
                if !(sh.sigma_db > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "sigma_db must be positive, got {}",
                        sh.sigma_db
                    )));
                }
                if !(r.beta_min > 0.0) {
                    return Err(Error::InvalidParameter(
                        "shadowed/multicell modes require beta_min > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Equilibrium spatial intensity of active users, m^-2.
    pub fn user_intensity(&self) -> f64 {
        self.traffic.rho / self.traffic.nu
    }

    /// Expected number of active users in the cell.
    pub fn mean_user_count(&self) -> f64 {
        std::f64::consts::PI * self.cell.radius * self.cell.radius * self.user_intensity()
    }
}

/// The SIR thresholds, class radii and class count that discretize demand.
///
/// `betas[0]` is the infinite sentinel: class 1 has no lower SIR requirement
/// beyond admission. In deterministic mode `radii` holds `R_0 = 0` up to
/// `R_{n_max}` clamped to the cell radius, and class `j` occupies
/// `[R_{j-1}, R_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandThresholds {
    pub n_max: u32,
    pub betas: Vec<f64>,
    pub radii: Vec<f64>,
}

/// SIR threshold for needing at most `j` subcarriers: `beta_j = 2^(c0/(w j)) - 1`.
pub fn beta_j(radio: &RadioParams, j: u32) -> f64 {
    if j == 0 {
        f64::INFINITY
    } else {
        (radio.c0 / (radio.w * j as f64)).exp2() - 1.0
    }
}

/// Attenuation-side threshold: class `j` means
/// `beta_tilde(j-1) < s * r^gamma <= beta_tilde(j)`.
pub fn beta_tilde(radio: &RadioParams, j: u32) -> f64 {
    if j == 0 {
        0.0
    } else {
        radio.p_ratio / beta_j(radio, j)
    }
}

/// Subcarriers needed at distance `r` under the deterministic mean gain.
/// The infinite-SIR limit at `r = 0` needs the minimum of one subcarrier.
pub fn demand_deterministic(r: f64, radio: &RadioParams) -> u32 {
    debug_assert!(r >= 0.0);
    if r == 0.0 {
        return 1;
    }
    let sir = radio.p_ratio * radio.mean_gain / r.powf(radio.gamma);
    let raw = radio.c0 / (radio.w * (1.0 + sir).log2());
    (raw.ceil() as u32).max(1)
}

/// Per-user demand in shadowed mode, or `None` when the user is in radio
/// outage (SIR below `beta_min`).
///
/// Class membership depends on `(r, s)` only through `s * r^gamma`; ties at a
/// class boundary belong to the lower class (weak inequality on the upper
/// threshold).
pub fn demand_shadowed(r: f64, s: f64, radio: &RadioParams) -> Option<u32> {
    debug_assert!(r >= 0.0 && s > 0.0);
    let work = s * r.powf(radio.gamma);
    if radio.beta_min > 0.0 && radio.p_ratio / work < radio.beta_min {
        return None;
    }
    let n_max = n_max_from_beta_min(radio).unwrap_or(u32::MAX);
    for j in 1..n_max {
        if work <= beta_tilde(radio, j) {
            return Some(j);
        }
    }
    Some(n_max)
}

/// Largest possible per-user demand under the admission threshold:
/// `ceil(c0 / (w log2(1 + beta_min)))`.
pub fn n_max_from_beta_min(radio: &RadioParams) -> Result<u32> {
    if !(radio.beta_min > 0.0) {
        return Err(Error::InvalidParameter(
            "n_max is finite only for beta_min > 0".into(),
        ));
    }
    let raw = radio.c0 / (radio.w * (1.0 + radio.beta_min).log2());
    Ok((raw.ceil() as u32).max(1))
}

/// Derive the full threshold structure for a scenario.
pub fn compute_thresholds(scenario: &Scenario) -> Result<DemandThresholds> {
    scenario.validate()?;
    let radio = &scenario.radio;
    match scenario.mode {
        Mode::Deterministic => {
            let cell_radius = scenario.cell.radius;
            let edge_demand = demand_deterministic(cell_radius, radio);
            if edge_demand > 1_000_000 {
                return Err(Error::Degenerate(format!(
                    "demand at the cell edge is {edge_demand} subcarriers"
                )));
            }
            // R_j = (p_ratio * mean_gain / beta_j)^(1/gamma), clamped at R;
            // n_max is the smallest j with R_j >= R.
            let mut radii = vec![0.0];
            let mut betas = vec![f64::INFINITY];
            let mut j = 1u32;
            loop {
                let rj = (radio.p_ratio * radio.mean_gain / beta_j(radio, j))
                    .powf(1.0 / radio.gamma);
                if rj >= cell_radius {
                    radii.push(cell_radius);
                    break;
                }
                radii.push(rj);
                betas.push(beta_j(radio, j));
                j += 1;
            }
            Ok(DemandThresholds { n_max: j, betas, radii })
        }
        Mode::Shadowed | Mode::Multicell => {
            let n_max = n_max_from_beta_min(radio)?;
            let betas = (0..n_max).map(|j| beta_j(radio, j)).collect();
            Ok(DemandThresholds { n_max, betas, radii: Vec::new() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn sec3_radio() -> RadioParams {
        RadioParams {
            gamma: 2.8,
            c0: 2e5,
            w: 2.5e5,
            p_ratio: 1e6,
            mean_gain: 1.0 / 12.0,
            beta_min: 0.2,
            }
    }

    fn sec3_scenario() -> Scenario {
        Scenario {
            radio: sec3_radio(),
            traffic: TrafficParams { rho: 1e-5, nu: 1.0 / 60.0 },
            cell: CellGeometry { radius: 100.0 },
            shadowing: Some(Shadowing { mu_db: 6.0, sigma_db: 10f64.sqrt() }),
            mode: Mode::Deterministic,
            outage_policy: OutagePolicy::ClampToNmax,
        }
    }

    #[test]
    fn edge_demand_is_three_subcarriers() {
        assert_eq!(demand_deterministic(100.0, &sec3_radio()), 3);
    }

    #[test]
    fn zero_distance_needs_one() {
        assert_eq!(demand_deterministic(0.0, &sec3_radio()), 1);
    }

    #[test]
    fn first_threshold_bracket() {
        // R_1 = (p_ratio * mean_gain / (2^{0.8} - 1))^{1/2.8} ~ 63.7 m
        let radio = sec3_radio();
        assert_eq!(demand_deterministic(63.0, &radio), 1);
        assert_eq!(demand_deterministic(64.5, &radio), 2);
    }

    #[test]
    fn thresholds_sec3() {
        let t = compute_thresholds(&sec3_scenario()).unwrap();
        assert_eq!(t.n_max, 3);
        assert_abs_diff_eq!(t.radii[1], 63.666005168, epsilon = 1e-6);
        assert_abs_diff_eq!(t.radii[2], 85.981718475, epsilon = 1e-6);
        assert_eq!(t.radii[3], 100.0);
    }

    #[test]
    fn tiny_cell_is_single_class() {
        let mut sc = sec3_scenario();
        sc.cell.radius = 10.0;
        let t = compute_thresholds(&sc).unwrap();
        assert_eq!(t.n_max, 1);
        assert_eq!(t.radii, vec![0.0, 10.0]);
    }

    #[test]
    fn thresholds_agree_with_demand() {
        use rand::{Rng, SeedableRng};
        let sc = sec3_scenario();
        let t = compute_thresholds(&sc).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let r = rng.random::<f64>() * sc.cell.radius;
            let by_radii =
                1 + t.radii[1..t.radii.len() - 1].iter().filter(|&&rj| rj <= r).count() as u32;
            assert_eq!(demand_deterministic(r, &sc.radio), by_radii.min(t.n_max), "r={r}");
        }
    }

    #[test]
    fn demand_monotone_in_distance() {
        let radio = sec3_radio();
        let mut prev = 0;
        for i in 0..=1000 {
            let r = i as f64 * 0.1;
            let d = demand_deterministic(r, &radio);
            assert!(d >= prev);
            prev = d;
        }
    }

    #[test]
    fn n_max_examples() {
        let mut radio = sec3_radio();
        // beta_min above the one-subcarrier threshold 2^0.8 - 1 ~ 0.741
        radio.beta_min = 0.75;
        assert_eq!(n_max_from_beta_min(&radio).unwrap(), 1);
        // exactly at the three-subcarrier threshold: the float nearest
        // 2^(4/15) - 1 lands on raw = 3.0, so n_max = 3 and not 4
        radio.beta_min = 0.20302503608211664;
        assert_eq!(n_max_from_beta_min(&radio).unwrap(), 3);
        radio.beta_min = 0.2;
        assert_eq!(n_max_from_beta_min(&radio).unwrap(), 4);
        radio.beta_min = 1e9;
        assert_eq!(n_max_from_beta_min(&radio).unwrap(), 1);
        radio.beta_min = 0.0;
        assert!(n_max_from_beta_min(&radio).is_err());
    }

    #[test]
    fn shadowed_betas() {
        let mut sc = sec3_scenario();
        sc.mode = Mode::Shadowed;
        let t = compute_thresholds(&sc).unwrap();
        assert_eq!(t.n_max, 4);
        assert!(t.betas[0].is_infinite());
        assert_abs_diff_eq!(t.betas[1], 0.74110112, epsilon = 1e-7);
        assert_abs_diff_eq!(t.betas[2], 0.31950791, epsilon = 1e-7);
        assert_abs_diff_eq!(t.betas[3], 0.20302504, epsilon = 1e-7);
    }

    #[test]
    fn shadowed_class_boundaries() {
        let radio = sec3_radio();
        // s * r^gamma at exactly beta_tilde(2) belongs to class 2
        let r = 50.0f64;
        let s = beta_tilde(&radio, 2) / r.powf(radio.gamma);
        assert_eq!(demand_shadowed(r, s, &radio), Some(2));
        // just above the boundary it becomes class 3
        assert_eq!(demand_shadowed(r, s * (1.0 + 1e-12), &radio), Some(3));
        // best class when the product is small
        assert_eq!(demand_shadowed(1.0, 1e-3, &radio), Some(1));
    }

    #[test]
    fn shadowed_outage_and_cap() {
        let radio = sec3_radio();
        // SIR = 0.201 sits in [beta_min, beta_3): the maximum 4 subcarriers
        let r = 100.0f64;
        let s = radio.p_ratio / (0.201 * r.powf(radio.gamma));
        assert_eq!(demand_shadowed(r, s, &radio), Some(4));
        // SIR = 0.21 clears beta_3 ~ 0.2030, so 3 subcarriers suffice
        let s = radio.p_ratio / (0.21 * r.powf(radio.gamma));
        assert_eq!(demand_shadowed(r, s, &radio), Some(3));
        // below beta_min: outage
        let s = radio.p_ratio / (0.19 * r.powf(radio.gamma));
        assert_eq!(demand_shadowed(r, s, &radio), None);
    }

    #[test]
    fn shadowed_depends_on_product_only() {
        use rand::{Rng, SeedableRng};
        let radio = sec3_radio();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let r1 = 1.0 + rng.random::<f64>() * 150.0;
            let r2 = 1.0 + rng.random::<f64>() * 150.0;
            let s1 = 10f64.powf(rng.random::<f64>() * 4.0 - 2.0);
            let w = s1 * r1.powf(radio.gamma);
            let s2 = w / r2.powf(radio.gamma);
            assert_eq!(demand_shadowed(r1, s1, &radio), demand_shadowed(r2, s2, &radio));
        }
    }

    #[test]
    fn shadowed_class_matches_bisection_oracle() {
        use rand::{Rng, SeedableRng};
        let radio = sec3_radio();
        let n_max = n_max_from_beta_min(&radio).unwrap();
        // oracle: bisect over the beta-tilde thresholds
        let class_by_bisection = |work: f64| -> u32 {
            let (mut lo, mut hi) = (0u32, n_max);
            // invariant: work > beta_tilde(lo), work <= beta_tilde(hi) or hi == n_max
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if work <= beta_tilde(&radio, mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        for _ in 0..10_000 {
            let r = 1.0 + rng.random::<f64>() * 200.0;
            let s = 10f64.powf(rng.random::<f64>() * 3.0 - 1.0);
            if let Some(j) = demand_shadowed(r, s, &radio) {
                assert_eq!(j, class_by_bisection(s * r.powf(radio.gamma)));
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn degenerate_scenario_rejected() {
        let mut sc = sec3_scenario();
        sc.radio.p_ratio = 1e-30; // SIR vanishes, edge demand explodes
        assert!(matches!(compute_thresholds(&sc), Err(Error::Degenerate(_))));
    }

    #[test]
    fn shadowing_required_for_shadowed_mode() {
        let mut sc = sec3_scenario();
        sc.mode = Mode::Shadowed;
        sc.shadowing = None;
        assert!(sc.validate().is_err());
    }

    #[test]
    fn mean_user_count_sec3() {
        assert_abs_diff_eq!(sec3_scenario().mean_user_count(), 18.84955592, epsilon = 1e-7);
    }
}
