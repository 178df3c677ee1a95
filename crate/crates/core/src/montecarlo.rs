//! Monte Carlo estimation of the loss probability and demand moments.
//!
//! Replications are equilibrium snapshots indexed by an RNG stream equal to
//! the replication number, so the estimate is a pure function of
//! `(seed, n_reps)`: splitting the replication range across worker threads
//! cannot change a single bit of the result, only the wall time.

use crate::error::{Error, Result};
use crate::model::{demand_deterministic, demand_shadowed, Mode, OutagePolicy, Scenario};
use crate::ppp::{sample_marked_cell, RngSpec};

/// 99% two-sided standard normal quantile, for the Wilson interval.
const Z99: f64 = 2.5758293035489004;

/// A loss-probability estimate with its 99% Wilson confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MCEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_reps: u64,
    pub seed: u64,
    pub method: &'static str,
    /// Set when the expected hit count is too small for the interval to be
    /// trustworthy (fewer than 20 observed hits).
    pub warning: Option<String>,
}

/// Total subcarrier demand of one sampled configuration, under the
/// scenario's outage policy.
pub fn sample_total_demand<R: rand::Rng>(scenario: &Scenario, rng: &mut R) -> Result<u64> {
    let cfg = sample_marked_cell(scenario, rng)?;
    match scenario.mode {
        Mode::Deterministic => Ok(cfg
            .points
            .iter()
            .map(|&(x, y)| demand_deterministic((x * x + y * y).sqrt(), &scenario.radio) as u64)
            .sum()),
        Mode::Shadowed => {
            let marks = cfg.marks.as_ref().expect("shadowed configurations carry marks");
            let n_max = crate::model::n_max_from_beta_min(&scenario.radio)?;
            let mut total = 0u64;
            for (i, &(x, y)) in cfg.points.iter().enumerate() {
                let r = (x * x + y * y).sqrt();
                match demand_shadowed(r, marks[i], &scenario.radio) {
                    Some(j) => total += j as u64,
                    None => match scenario.outage_policy {
                        OutagePolicy::Exclude => {}
                        OutagePolicy::ClampToNmax => total += n_max as u64,
                    },
                }
            }
            Ok(total)
        }
        Mode::Multicell => Err(Error::InvalidParameter(
            "multicell demand is sampled by the multicell module".into(),
        )),
    }
}

/// Wilson score interval at 99% confidence.
pub fn wilson_interval(hits: u64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = Z99 * Z99;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z99 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Estimate `P(total demand > n0)` from `n_reps` independent snapshots.
pub fn estimate_loss(scenario: &Scenario, n0: u64, n_reps: u64, seed: u64) -> Result<MCEstimate> {
    estimate_loss_with_workers(scenario, n0, n_reps, seed, 1)
}

/// As `estimate_loss`, with the replication range split across `workers`
/// threads. The result is bit-identical for every worker count.
pub fn estimate_loss_with_workers(
    scenario: &Scenario,
    n0: u64,
    n_reps: u64,
    seed: u64,
    workers: usize,
) -> Result<MCEstimate> {
    if n_reps < 1_000 {
        return Err(Error::InvalidParameter(format!(
            "need at least 1000 replications for a meaningful interval, got {n_reps}"
        )));
    }
    if workers < 1 {
        return Err(Error::InvalidParameter("worker count must be >= 1".into()));
    }
    scenario.validate()?;
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
                        if sample_total_demand(scenario, &mut rng)? > n0 {
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
