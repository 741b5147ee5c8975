//! Scalar special functions, robust location estimation, and the root solver
//! that calibrates the conditional test's size.

mod normal;
mod solve;
mod trim;

pub use normal::{normal_cdf, normal_pdf, normal_quantile};
pub use solve::solve_size_t;
pub use trim::trimmed_mean;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A probability value, guaranteed to lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::InvalidParams(format!(
                "probability must lie in [0, 1], got {value}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True when the value lies strictly inside `(0, 1)`.
    #[inline]
    pub fn is_interior(self) -> bool {
        self.0 > 0.0 && self.0 < 1.0
    }
}

/// Per-tail trimming fraction for the trimmed mean, in `[0, 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrimOrder(f64);

impl TrimOrder {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && (0.0..0.5).contains(&beta) {
            Ok(Self(beta))
        } else {
            Err(Error::InvalidParams(format!(
                "trim order must lie in [0, 0.5), got {beta}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_bounds() {
        assert!(Probability::new(0.0).is_ok());
        assert!(Probability::new(1.0).is_ok());
        assert!(Probability::new(0.5).unwrap().is_interior());
        assert!(!Probability::new(0.0).unwrap().is_interior());
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::new(1.1).is_err());
        assert!(Probability::new(f64::NAN).is_err());
    }

    #[test]
    fn trim_order_bounds() {
        assert!(TrimOrder::new(0.0).is_ok());
        assert!(TrimOrder::new(0.49).is_ok());
        assert!(TrimOrder::new(0.5).is_err());
        assert!(TrimOrder::new(-0.01).is_err());
    }
}
