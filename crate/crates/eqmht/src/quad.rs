//! Gauss-Hermite quadrature and Gaussian-expectation helpers.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Nodes and weights for integrating `exp(-x^2) * f(x)` over the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pairs: Vec<(f64, f64)>,
}

impl GaussHermite {
    /// Builds the rule via Golub-Welsch: eigenvalues of the symmetrized
    /// Hermite companion matrix are the nodes, squared first eigenvector
    /// components scaled by sqrt(pi) are the weights.
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Domain(
                "Gauss-Hermite rule needs at least one node".into(),
            ));
        }
        if degree == 1 {
            return Ok(Self {
                pairs: vec![(0.0, std::f64::consts::PI.sqrt())],
            });
        }
        let mut companion = DMatrix::zeros(degree, degree);
        for i in 0..degree - 1 {
            let off = ((i as f64 + 1.0) * 0.5).sqrt();
            companion[(i, i + 1)] = off;
            companion[(i + 1, i)] = off;
        }
        let eigen = companion.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = eigen
            .eigenvalues
            .iter()
            .copied()
            .zip(
                eigen
                    .eigenvectors
                    .row(0)
                    .iter()
                    .map(|v| v * v * std::f64::consts::PI.sqrt()),
            )
            .collect();
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { pairs })
    }

    pub fn node_weight_pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// Integrates `exp(-x^2) * f(x)` over the real line.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.pairs.iter().map(|&(x, w)| w * f(x)).sum()
    }
}

/// Abscissas and weights for `E[g(Q)]` with `Q ~ N(0, variance)`.
///
/// Zero variance collapses to a single point mass at the origin.
pub fn gaussian_expectation_axis(rule: &GaussHermite, variance: f64) -> Vec<(f64, f64)> {
    assert!(variance >= 0.0, "variance must be nonnegative");
    if variance == 0.0 {
        return vec![(0.0, 1.0)];
    }
    let scale = (2.0 * variance).sqrt();
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    rule.pairs
        .iter()
        .map(|&(x, w)| (scale * x, w * inv_sqrt_pi))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_three_matches_known_rule() {
        let rule = GaussHermite::new(3).unwrap();
        let pairs = rule.node_weight_pairs();
        let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let want_nodes = [-1.224744871391589, 0.0, 1.224744871391589];
        let want_weights = [0.29540897515091935, 1.1816359006036774, 0.29540897515091935];
        for i in 0..3 {
            assert!((nodes[i] - want_nodes[i]).abs() < 1e-13);
            assert!((weights[i] - want_weights[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn integrates_low_moments_exactly() {
        let rule = GaussHermite::new(16).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((rule.integrate(|_| 1.0) - sqrt_pi).abs() < 1e-13);
        assert!((rule.integrate(|x| x * x) - sqrt_pi / 2.0).abs() < 1e-13);
        assert!((rule.integrate(|x| x)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_moments_through_axis() {
        let rule = GaussHermite::new(64).unwrap();
        for &var in &[0.1, 0.4, 0.7, 2.0] {
            let axis = gaussian_expectation_axis(&rule, var);
            let m2: f64 = axis.iter().map(|&(q, w)| w * q * q).sum();
            let m4: f64 = axis.iter().map(|&(q, w)| w * q * q * q * q).sum();
            assert!((m2 - var).abs() < 1e-12, "var={var}: m2={m2}");
            assert!((m4 - 3.0 * var * var).abs() < 1e-11, "var={var}: m4={m4}");
            // E[cos Q] = exp(-var/2) for Q ~ N(0, var).
            let mc: f64 = axis.iter().map(|&(q, w)| w * q.cos()).sum();
            assert!((mc - (-var / 2.0).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_variance_is_point_mass() {
        let rule = GaussHermite::new(64).unwrap();
        let axis = gaussian_expectation_axis(&rule, 0.0);
        assert_eq!(axis, vec![(0.0, 1.0)]);
    }

    #[test]
    fn zero_degree_rejected() {
        assert!(GaussHermite::new(0).is_err());
    }
}
