//! The one-sided concentration bound on overload probability.
//!
//! For a functional `F` of a Poisson process whose add-one-point increment is
//! bounded by `s` and whose quadratic characteristic is `v`, the deviation
//! probability obeys `P(F - m >= t) <= exp(-(v/s^2) g(t s / v))` with
//! `g(t) = (1+t)ln(1+t) - t`. Total subcarrier demand is such a functional
//! with `s = n_max`, which yields the closed-form overload bound `p_sup`.

use crate::error::{Error, Result};
use crate::moments::MomentPair;
use crate::specfun::g_func;

/// Inputs of the generic concentration bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInput {
    /// Mean of the functional.
    pub m: f64,
    /// Quadratic characteristic (second-moment integral of the increment).
    pub v: f64,
    /// Uniform bound on the add-one-point increment.
    pub s: f64,
    /// Deviation threshold above the mean.
    pub t: f64,
}

impl BoundInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 0.0) || !self.m.is_finite() {
            return Err(Error::InvalidParameter(format!("m must be >= 0, got {}", self.m)));
        }
        if !(self.v > 0.0) || !self.v.is_finite() {
            return Err(Error::InvalidParameter(format!("v must be > 0, got {}", self.v)));
        }
        if !(self.s > 0.0) || !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!("s must be > 0, got {}", self.s)));
        }
        if !(self.t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "one-sided bound needs t >= 0, got {}",
                self.t
            )));
        }
        Ok(())
    }
}

/// `exp(-(v/s^2) g(t s / v))`, always in `(0, 1]`.
pub fn concentration_tail(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let scaled = input.t * input.s / input.v;
    Ok((-(input.v / (input.s * input.s)) * g_func(scaled)?).exp())
}

/// Overload bound at load factor `alpha`: probability that total demand
/// exceeds `alpha * m`, with deviation `t = (alpha - 1) m` and increment
/// bound `s = n_max`.
pub fn p_sup(alpha: f64, moments: &MomentPair, n_max: u32) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 1, got {alpha}")));
    }
    concentration_tail(&BoundInput {
        m: moments.m,
        v: moments.v,
        s: n_max as f64,
        t: (alpha - 1.0) * moments.m,
    })
}

/// Smallest `alpha >= 1` with `p_sup(alpha) <= target`, by bisection to
/// 1e-9 in `alpha`.
pub fn invert_p_sup(target: f64, moments: &MomentPair, n_max: u32) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target probability must lie in (0, 1), got {target}"
        )));
    }
    if p_sup(1.0, moments, n_max)? <= target {
        return Ok(1.0);
    }
    // p_sup decays to 0, so doubling finds an upper bracket quickly
    let mut hi = 2.0;
    while p_sup(hi, moments, n_max)? > target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Degenerate(format!(
                "no load factor below 1e12 reaches bound {target}"
            )));
        }
    }
    let mut lo = (hi / 2.0).max(1.0);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if p_sup(mid, moments, n_max)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
