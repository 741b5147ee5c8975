//! Size calibration for the two-sided fixed-cutoff test.

use super::normal::normal_cdf;
use super::Probability;

// Bisection tolerance on t. Tight enough that the residual of the size
// equation is far below 1e-10 everywhere (the slope is at most ~0.8).
const T_TOL: f64 = 1e-12;

/// Solves `alpha = 2 - Phi(t) - Phi(t + 2*mu0/sqrt(phi0))` for `t`.
///
/// The map t -> size is strictly decreasing from 2 to 0, so the root is
/// unique. Solved by bracketing bisection starting from [-50, 50],
/// widening the bracket when the root lies outside.
pub fn solve_size_t(alpha: Probability, mu0: f64, phi0: f64) -> f64 {
    assert!(alpha.is_interior(), "solve_size_t requires 0 < alpha < 1");
    assert!(phi0 > 0.0, "solve_size_t requires phi0 > 0");

    let shift = 2.0 * mu0 / phi0.sqrt();
    let a = alpha.value();
    // Decreasing in t; positive left of the root, negative right of it.
    let g = |t: f64| 2.0 - normal_cdf(t) - normal_cdf(t + shift) - a;

    let mut lo = -50.0;
    let mut hi = 50.0;
    let mut widen = 0;
    while g(hi) > 0.0 && widen < 200 {
        lo = hi;
        hi *= 2.0;
        widen += 1;
    }
    while g(lo) < 0.0 && widen < 200 {
        hi = lo;
        lo *= 2.0;
        widen += 1;
    }
    debug_assert!(g(lo) >= 0.0 && g(hi) <= 0.0, "root not bracketed");

    while hi - lo > T_TOL {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
