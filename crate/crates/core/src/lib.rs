//! Overload analysis for an OFDMA downlink cell serving users scattered as a
//! Poisson point process.
//!
//! The central quantity is the probability that the total subcarrier demand
//! in a cell exceeds the number of available subcarriers. The crate computes
//! a closed-form concentration upper bound on that probability and validates
//! it two independent ways: an exact compound-Poisson evaluation of the
//! demand distribution, and a Monte Carlo simulator. A multicell module
//! extends the single-cell model to a best-server association among several
//! interfering antennas.

pub mod error;
pub mod exactloss;
pub mod model;
pub mod moments;
pub mod montecarlo;
pub mod multicell;
pub mod ppp;
pub mod quadrature;
pub mod specfun;
pub mod tailbound;

pub use error::{Error, Result};
