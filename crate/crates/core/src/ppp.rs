//! Sampling of the (marked) Poisson point process of active users.
//!
//! Each replication owns its own generator, keyed by `(seed, stream)`:
//! the stream index is the replication index, so distributing replications
//! across workers cannot change any drawn configuration. Equilibrium of the
//! underlying arrival/departure dynamics is a Poisson field, so a replication
//! is a single direct snapshot; a queue-dynamics test below validates that
//! shortcut against a continuous-time simulation.

use crate::error::{Error, Result};
use crate::model::{Mode, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reproducibility key: same (seed, stream) gives the same draws bit-for-bit
/// on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// One sampled configuration: planar positions and, in shadowed modes, the
/// parallel list of attenuation marks.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    pub points: Vec<(f64, f64)>,
    pub marks: Option<Vec<f64>>,
}

impl PointConfiguration {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Plain-text dump, one `x y s` line per point (mark 1 when unmarked).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, (x, y)) in self.points.iter().enumerate() {
            let s = self.marks.as_ref().map_or(1.0, |m| m[i]);
            out.push_str(&format!("{x} {y} {s}\n"));
        }
        out
    }
}

/// Poisson count of mean `lambda_total`: sequential inversion below 30,
/// transformed rejection (Hormann's PTRS) above.
pub fn sample_count<R: Rng>(lambda_total: f64, rng: &mut R) -> Result<u64> {
    if !(lambda_total >= 0.0) || !lambda_total.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Poisson mean must be finite and >= 0, got {lambda_total}"
        )));
    }
    if lambda_total == 0.0 {
        return Ok(0);
    }
    if lambda_total < 30.0 {
        let mut p = (-lambda_total).exp();
        let mut cdf = p;
        let mut k = 0u64;
        let u: f64 = rng.random();
        while u > cdf {
            k += 1;
            p *= lambda_total / k as f64;
            cdf += p;
            if k > 10_000 {
                // unreachable for lambda < 30; guards degenerate rounding
                break;
            }
        }
        Ok(k)
    } else {
        Ok(poisson_ptrs(lambda_total, rng))
    }
}

/// Hormann's PTRS transformed-rejection sampler, exact for lambda >= 10.
fn poisson_ptrs<R: Rng>(lambda: f64, rng: &mut R) -> u64 {
    let log_lambda = lambda.ln();
    let b = 0.931 + 2.53 * lambda.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let log_accept = (v * inv_alpha / (a / (us * us) + b)).ln();
        if log_accept <= k * log_lambda - lambda - libm::lgamma(k + 1.0) {
            return k as u64;
        }
    }
}

/// `count` i.i.d. uniform positions on the disk of radius `radius`.
pub fn sample_disk<R: Rng>(count: u64, radius: f64, rng: &mut R) -> Result<Vec<(f64, f64)>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("disk radius must be positive, got {radius}")));
    }
    Ok((0..count)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            (r * theta.cos(), r * theta.sin())
        })
        .collect())
}

/// One equilibrium snapshot of the user process on the cell disk, marks
/// included whenever the scenario has shadowing.
pub fn sample_marked_cell<R: Rng>(scenario: &Scenario, rng: &mut R) -> Result<PointConfiguration> {
    scenario.validate()?;
    if scenario.mode == Mode::Multicell {
        return Err(Error::InvalidParameter(
            "multicell configurations are sampled over the layout region, not the single cell".into(),
        ));
    }
    let count = sample_count(scenario.mean_user_count(), rng)?;
    let points = sample_disk(count, scenario.cell.radius, rng)?;
    let marks = match scenario.mode {
        Mode::Deterministic => None,
        _ => {
            let sh = scenario.shadowing.expect("validated above");
            Some(sample_marks(count, &sh, rng))
        }
    };
    Ok(PointConfiguration { points, marks })
}

/// i.i.d. attenuation marks `S = 10^(Z/10)`, `Z ~ Normal(mu_db, sigma_db^2)`.
pub fn sample_marks<R: Rng>(count: u64, sh: &crate::model::Shadowing, rng: &mut R) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    (0..count)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            10f64.powf((sh.mu_db + sh.sigma_db * z) / 10.0)
        })
        .collect()
}
