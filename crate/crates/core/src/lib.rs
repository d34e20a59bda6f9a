//! Exact and numerical machinery for counting lattice points on quaternary
//! quadrics with congruence conditions, and for the spectral quantities that
//! the counts control: complete exponential sums, local densities, height-ball
//! volumes on the Bruhat-Tits tree, root-datum volume exponents, and
//! discrepancy-based spectral-gap bounds.

pub mod cyclotomic;
pub mod densities;
pub mod discrepancy;
pub mod error;
pub mod expsums;
pub mod exponents;
pub mod forms;
pub mod quadrature;
pub mod quadric;
pub mod spectral;
pub mod window;

pub use error::{Error, Result};
pub use forms::QuaternaryForm;

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar used throughout the exact paths.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Default safety limit on enumeration work (number of elementary steps).
/// Overridable via the `QUADRIX_WORK_BOUND` environment variable.
pub fn default_work_bound() -> u64 {
    std::env::var("QUADRIX_WORK_BOUND")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(4_000_000_000)
}
