//! Exact distribution of the total subcarrier demand.
//!
//! Class counts are independent Poisson variables, so the total demand
//! `sum_j j K_j` is compound Poisson with finitely many atoms per class and
//! its law follows from iterated convolution. This replaces hours of
//! simulation with a millisecond computation and serves as the ground truth
//! the closed-form bound is checked against.

use crate::error::{Error, Result};
use crate::moments::ClassMasses;

/// Per-class Poisson tail truncation; the classes are few, so the summed
/// bookkeeping error stays well under the 1e-12 budget.
const CLASS_TAIL_EPS: f64 = 1e-15;

/// Probability mass of total demand `0..=d_max` plus the bookkept mass beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandDistribution {
    pub pmf: Vec<f64>,
    pub tail_mass: f64,
}

impl DemandDistribution {
    pub fn d_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, &p)| k as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, &p)| (k as f64 * k as f64) * p).sum()
    }
}

/// Poisson(lambda) pmf truncated where the remaining tail drops below
/// `CLASS_TAIL_EPS`; returns the weights and the truncated mass.
fn truncated_poisson(lambda: f64) -> (Vec<f64>, f64) {
    if lambda == 0.0 {
        return (vec![1.0], 0.0);
    }
    let mut weights = Vec::new();
    let mut p = (-lambda).exp();
    let mut cum = 0.0;
    let mut k = 0u64;
    loop {
        weights.push(p);
        cum += p;
        // past the mode, stop as soon as the remaining mass is negligible
        if k as f64 > lambda && 1.0 - cum < CLASS_TAIL_EPS {
            break;
        }
        k += 1;
        p *= lambda / k as f64;
        if k > 100_000 {
            break; // unreachable for the intensities this model produces
        }
    }
    (weights, (1.0 - cum).max(0.0))
}

/// Distribution of `sum_j j K_j` on `0..=d_max`, `K_j ~ Poisson(lambda_j)`
/// independent, by iterated convolution.
pub fn demand_distribution(classes: &ClassMasses, d_max: usize) -> Result<DemandDistribution> {
    if d_max < 1 {
        return Err(Error::InvalidParameter("d_max must be >= 1".into()));
    }
    for (i, &l) in classes.lambdas.iter().enumerate() {
        if !(l >= 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "class {} intensity must be finite and >= 0, got {l}",
                i + 1
            )));
        }
    }
    let mut pmf = vec![0.0; d_max + 1];
    pmf[0] = 1.0;
    let mut tail = 0.0;
    for (i, &lambda) in classes.lambdas.iter().enumerate() {
        let j = i + 1;
        let (weights, trunc) = truncated_poisson(lambda);
        tail += trunc; // truncated class mass can only push demand upward
        let mut next = vec![0.0; d_max + 1];
        for (d, &p) in pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (k, &w) in weights.iter().enumerate() {
                let total = d + j * k;
                if total <= d_max {
                    next[total] += p * w;
                } else {
                    tail += p * w;
                    // every later k also overflows; add the rest in one step
                    tail += p * weights[k + 1..].iter().sum::<f64>();
                    break;
                }
            }
        }
        pmf = next;
    }
    let dist = DemandDistribution { pmf, tail_mass: tail };
    if dist.tail_mass > 0.5 {
        return Err(Error::InvalidParameter(format!(
            "d_max = {d_max} captures under half the demand mass (tail {})",
            dist.tail_mass
        )));
    }
    Ok(dist)
}

/// `P(total > n0)` (strict) or `P(total >= n0)`, with the support enlarged
/// until the bookkept tail mass is below 1e-12.
pub fn exact_loss(classes: &ClassMasses, n0: u64, strict: bool) -> Result<f64> {
    let mean: f64 = classes
        .lambdas
        .iter()
        .enumerate()
        .map(|(i, &l)| (i + 1) as f64 * l)
        .sum();
    let mut d_max = ((mean + 10.0 * mean.sqrt() + 32.0).ceil() as usize).max(n0 as usize + 1);
    for _ in 0..32 {
        let dist = demand_distribution(classes, d_max)?;
        if dist.tail_mass < 1e-12 {
            let cutoff = if strict { n0 } else { n0.saturating_sub(1) };
            // sum the far side, which is the smaller one in the regime of
            // interest, and include the bookkept tail
            let beyond: f64 = dist
                .pmf
                .iter()
                .enumerate()
                .skip(cutoff as usize + 1)
                .map(|(_, &p)| p)
                .sum();
            let p = if !strict && n0 == 0 { 1.0 } else { beyond + dist.tail_mass };
            return Ok(p.clamp(0.0, 1.0));
        }
        d_max *= 2;
    }
    Err(Error::Accuracy("demand support did not close below the 1e-12 tail budget".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        CellGeometry, Mode, OutagePolicy, RadioParams, Scenario, TrafficParams,
    };
    use crate::moments::{class_masses, moments_from_classes};
    use crate::tailbound::p_sup;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn poisson_pmf(lambda: f64, k: usize) -> f64 {
        (k as f64 * lambda.ln() - lambda - libm::lgamma(k as f64 + 1.0)).exp()
    }

    fn deterministic_reference() -> Scenario {
        Scenario {
            radio: RadioParams {
                gamma: 2.8,
                c0: 2e5,
                w: 2.5e5,
                p_ratio: 1e6,
                mean_gain: 1.0 / 12.0,
                beta_min: 0.2,
            },
            traffic: TrafficParams { rho: 1e-5, nu: 1.0 / 60.0 },
            cell: CellGeometry { radius: 100.0 },
            shadowing: None,
            mode: Mode::Deterministic,
            outage_policy: OutagePolicy::ClampToNmax,
        }
    }

    #[test]
    fn single_class_is_poisson() {
        let cm = ClassMasses { lambdas: vec![4.2] };
        let dist = demand_distribution(&cm, 60).unwrap();
        for k in 0..=40 {
            assert_abs_diff_eq!(dist.pmf[k], poisson_pmf(4.2, k), epsilon = 1e-14);
        }
        assert!(dist.tail_mass < 1e-12);
    }

    #[test]
    fn two_unit_classes_atoms() {
        let cm = ClassMasses { lambdas: vec![1.0, 1.0] };
        let dist = demand_distribution(&cm, 50).unwrap();
        let e2 = (-2.0f64).exp();
        assert_abs_diff_eq!(dist.pmf[0], e2, epsilon = 1e-15);
        // total 1: only (K1, K2) = (1, 0)
        assert_abs_diff_eq!(dist.pmf[1], e2, epsilon = 1e-15);
        // total 2: (2, 0) and (0, 1)
        assert_abs_diff_eq!(dist.pmf[2], 1.5 * e2, epsilon = 1e-15);
        let total: f64 = dist.pmf.iter().sum();
        assert_abs_diff_eq!(total + dist.tail_mass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn moments_of_pmf_match_closed_form() {
        let sc = deterministic_reference();
        let cm = class_masses(&sc).unwrap();
        let mp = moments_from_classes(&cm);
        let dist = demand_distribution(&cm, 400).unwrap();
        assert!(dist.tail_mass < 1e-12);
        assert_relative_eq!(dist.mean(), mp.m, max_relative = 1e-9);
        // compound-Poisson identity: E T^2 = v + m^2
        assert_relative_eq!(dist.second_moment(), mp.v + mp.m * mp.m, max_relative = 1e-9);
    }

    #[test]
    fn normalization_budget() {
        let sc = deterministic_reference();
        let cm = class_masses(&sc).unwrap();
        let dist = demand_distribution(&cm, 400).unwrap();
        assert!(dist.pmf.iter().all(|&p| p >= 0.0));
        let total: f64 = dist.pmf.iter().sum();
        assert_abs_diff_eq!(total + dist.tail_mass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn small_d_max_rejected() {
        let cm = ClassMasses { lambdas: vec![30.0] };
        assert!(demand_distribution(&cm, 10).is_err());
        assert!(demand_distribution(&cm, 0).is_err());
    }

    #[test]
    fn loss_at_zero_budget() {
        let cm = ClassMasses { lambdas: vec![0.7, 0.3] };
        let got = exact_loss(&cm, 0, true).unwrap();
        assert_relative_eq!(got, 1.0 - (-1.0f64).exp(), max_relative = 1e-12);
        // non-strict at zero is certain
        assert_eq!(exact_loss(&cm, 0, false).unwrap(), 1.0);
    }

    #[test]
    fn strict_vs_weak_at_atoms() {
        let cm = ClassMasses { lambdas: vec![2.0] };
        let p_gt = exact_loss(&cm, 3, true).unwrap();
        let p_ge = exact_loss(&cm, 3, false).unwrap();
        assert_relative_eq!(p_ge - p_gt, poisson_pmf(2.0, 3), max_relative = 1e-10);
    }

    #[test]
    fn bound_dominates_reference_scenario() {
        let sc = deterministic_reference();
        let cm = class_masses(&sc).unwrap();
        let mp = moments_from_classes(&cm);
        let n_max = cm.n_max();
        // alpha = 2 headline value
        let n0 = (2.0 * mp.m).floor() as u64;
        let exact = exact_loss(&cm, n0, true).unwrap();
        assert!(exact <= p_sup(2.0, &mp, n_max).unwrap());
        // full grid
        for i in 1..=20 {
            let alpha = 1.0 + 0.1 * i as f64;
            let exact = exact_loss(&cm, (alpha * mp.m).floor() as u64, true).unwrap();
            let bound = p_sup(alpha, &mp, n_max).unwrap();
            assert!(exact <= bound, "alpha={alpha}: exact {exact} > bound {bound}");
        }
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        // intensities small enough that brute-force enumeration over the
        // class counts carries essentially all the mass below total 20
        let lambdas = [0.076, 0.063, 0.049];
        let cm = ClassMasses { lambdas: lambdas.to_vec() };
        let dist = demand_distribution(&cm, 30).unwrap();
        let mut brute = vec![0.0f64; 31];
        for k1 in 0..=12usize {
            for k2 in 0..=9usize {
                for k3 in 0..=6usize {
                    let total = k1 + 2 * k2 + 3 * k3;
                    if total <= 30 {
                        brute[total] += poisson_pmf(lambdas[0], k1)
                            * poisson_pmf(lambdas[1], k2)
                            * poisson_pmf(lambdas[2], k3);
                    }
                }
            }
        }
        for k in 0..=20 {
            assert_abs_diff_eq!(dist.pmf[k], brute[k], epsilon = 1e-10);
        }
    }

    #[test]
    fn loss_monotone_in_budget() {
        let sc = deterministic_reference();
        let cm = class_masses(&sc).unwrap();
        let mut prev = 1.0f64;
        for n0 in 0..120 {
            let p = exact_loss(&cm, n0, true).unwrap();
            assert!(p <= prev + 1e-15, "not decreasing at n0={n0}");
            prev = p;
        }
        assert!(prev < 1e-12);
    }
}
