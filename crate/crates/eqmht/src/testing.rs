//! The conditional fixed-cutoff test, its Neyman-Pearson comparator, and the
//! closed-form and quadrature expressions for size, power, and Type II error.
//!
//! All quantities here are exact in the conditional parameters; the large-tau
//! expansions from the analysis are never used as computational devices.

use crate::error::{Error, Result};
use crate::math::{normal_cdf, normal_quantile, solve_size_t, Probability};
use crate::model::{conditional_params, ConditionalParams, ModelParams};
use crate::quad::{gaussian_expectation_axis, GaussHermite};

/// Nodes per axis for the latent-factor expectation integrals.
const GH_NODES: usize = 64;

/// Two-sided fixed-cutoff test: reject when `|x| > k_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedCutoffTest {
    /// The cutoff `K = center + t * sqrt(phi0)`.
    pub k_cutoff: f64,
    /// The null conditional mean embedded in the cutoff.
    pub center: f64,
    pub alpha: Probability,
}

/// Two-threshold Neyman-Pearson rejection region on the `Y = X / tau` scale:
/// reject when `y > k1` or `y < k2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpRegion {
    pub k1: f64,
    pub k2: f64,
    /// The calibrated likelihood-ratio constant, recorded for audit.
    pub lr_constant: f64,
}

/// Conditional power and its complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerReport {
    pub power: Probability,
    pub type2: Probability,
}

impl PowerReport {
    fn from_power(power: f64) -> Self {
        let p = power.clamp(0.0, 1.0);
        Self {
            power: Probability::new(p).expect("clamped"),
            type2: Probability::new(1.0 - p).expect("clamped"),
        }
    }
}

/// Conditional size of the cutoff `k` under `N(mu0, phi0)`:
/// `1 - Phi((k - mu0)/sqrt(phi0)) + Phi(-(k + mu0)/sqrt(phi0))`.
pub fn fixed_cutoff_size(k: f64, mu0: f64, phi0: f64) -> f64 {
    let s = phi0.sqrt();
    1.0 - normal_cdf((k - mu0) / s) + normal_cdf(-(k + mu0) / s)
}

/// Builds the size-`alpha` fixed-cutoff test for the given conditional law.
pub fn fixed_cutoff(alpha: Probability, cond: &ConditionalParams) -> FixedCutoffTest {
    let t = solve_size_t(alpha, cond.mu0, cond.phi0);
    FixedCutoffTest {
        k_cutoff: cond.mu0 + t * cond.phi0.sqrt(),
        center: cond.mu0,
        alpha,
    }
}

/// Flags `|x_i - center| > k_abs` (strict).
pub fn apply_cutoff(x: &[f64], center: f64, k_abs: f64) -> Vec<bool> {
    x.iter().map(|&v| (v - center).abs() > k_abs).collect()
}

/// Exact conditional power of the fixed-cutoff test at `(q1, q2)`.
pub fn fixed_test_power(
    params: &ModelParams,
    q1: f64,
    q2: f64,
    alpha: Probability,
) -> PowerReport {
    let cond = conditional_params(params, q1, q2);
    let k = fixed_cutoff(alpha, &cond).k_cutoff;
    let s = cond.phi_alt.sqrt();
    let power = 1.0 - normal_cdf((k - cond.mu_alt) / s) + normal_cdf((-k - cond.mu_alt) / s);
    PowerReport::from_power(power)
}

/// Leading-order NP thresholds on the X scale:
/// `(mu0 + sqrt(phi0) z_{alpha/2}, mu0 - sqrt(phi0) z_{alpha/2})`.
pub fn np_asymptotic_thresholds(alpha: Probability, cond: &ConditionalParams) -> (f64, f64) {
    let z = normal_quantile(alpha.value() * 0.5).expect("alpha/2 in (0, 0.5)");
    let half_width = cond.phi0.sqrt() * z;
    (cond.mu0 + half_width, cond.mu0 - half_width)
}

// Coefficients of the log likelihood-ratio quadratic in y:
// a*y^2 - 2*b*y + c0 > log(k) + log_norm defines the rejection region.
struct LrQuadratic {
    a: f64,
    b: f64,
    c0: f64,
    log_norm: f64,
    mu0: f64,
    sqrt_phi0: f64,
    tau: f64,
}

impl LrQuadratic {
    fn new(params: &ModelParams, cond: &ConditionalParams) -> Result<Self> {
        let tau = params.tau;
        if tau.is_nan() || tau <= 0.0 {
            return Err(Error::Domain(
                "LR not convex on Y scale: requires tau > 0".into(),
            ));
        }
        let mu1 = cond.mu_alt / tau;
        let phi1 = cond.phi_alt / (tau * tau);
        let a = tau * tau / (2.0 * cond.phi0) - 1.0 / (2.0 * phi1);
        if a.is_nan() || a <= 0.0 {
            return Err(Error::Domain(
                "LR not convex on Y scale: quadratic coefficient not positive".into(),
            ));
        }
        Ok(Self {
            a,
            b: cond.mu0 * tau / (2.0 * cond.phi0) - mu1 / (2.0 * phi1),
            c0: cond.mu0 * cond.mu0 / (2.0 * cond.phi0) - mu1 * mu1 / (2.0 * phi1),
            log_norm: (tau * phi1.sqrt() / cond.phi0.sqrt()).ln(),
            mu0: cond.mu0,
            sqrt_phi0: cond.phi0.sqrt(),
            tau,
        })
    }

    // Thresholds (k1, k2) at a given LR constant, when the level set is
    // nonempty; the two roots of the quadratic.
    fn thresholds(&self, log_k: f64) -> Option<(f64, f64)> {
        let level = log_k + self.log_norm;
        let disc = self.a * (level - self.c0) + self.b * self.b;
        if disc <= 0.0 {
            return None;
        }
        let half = disc.sqrt();
        Some(((self.b + half) / self.a, (self.b - half) / self.a))
    }

    // Conditional null size of the region at a given LR constant. When the
    // constant is so small that the LR exceeds it everywhere, the whole line
    // is rejected and the size is 1.
    fn size(&self, log_k: f64) -> f64 {
        match self.thresholds(log_k) {
            None => 1.0,
            Some((k1, k2)) => {
                1.0 - normal_cdf((self.tau * k1 - self.mu0) / self.sqrt_phi0)
                    + normal_cdf((self.tau * k2 - self.mu0) / self.sqrt_phi0)
            }
        }
    }
}

/// Exact size-`alpha` Neyman-Pearson region on the `Y = X / tau` scale,
/// calibrated by bisection on the likelihood-ratio constant.
pub fn np_exact_region(
    alpha: Probability,
    params: &ModelParams,
    q1: f64,
    q2: f64,
) -> Result<NpRegion> {
    assert!(alpha.is_interior(), "np_exact_region requires 0 < alpha < 1");
    let cond = conditional_params(params, q1, q2);
    let quad = LrQuadratic::new(params, &cond)?;
    let a = alpha.value();

    // Size is continuous and strictly decreasing in log(k): below the level
    // at which the region is the whole line it equals 1, above it the two
    // thresholds move apart from the vertex.
    let mut lo = quad.c0 - quad.b * quad.b / quad.a - 1.0 - quad.log_norm;
    let mut hi = lo + 1.0;
    let mut widen = 0;
    while quad.size(hi) > a {
        hi = lo + 2.0 * (hi - lo);
        widen += 1;
        if widen > 300 {
            return Err(Error::Numeric(
                "NP calibration could not bracket the likelihood-ratio constant".into(),
            ));
        }
    }
    for _ in 0..300 {
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if quad.size(mid) > a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let log_k = 0.5 * (lo + hi);
    let (k1, k2) = quad
        .thresholds(log_k)
        .ok_or_else(|| Error::Numeric("NP calibration collapsed to an empty region".into()))?;
    if (quad.size(log_k) - a).abs() > 1e-9 {
        return Err(Error::Numeric(format!(
            "NP calibration residual too large: size {} at alpha {a}",
            quad.size(log_k)
        )));
    }
    Ok(NpRegion {
        k1,
        k2,
        lr_constant: log_k.exp(),
    })
}

/// Exact conditional power of an NP region at the `(q1, q2)` it was built for.
pub fn np_power(
    region: &NpRegion,
    params: &ModelParams,
    q1: f64,
    q2: f64,
) -> PowerReport {
    let cond = conditional_params(params, q1, q2);
    let tau = params.tau;
    let mu1 = cond.mu_alt / tau;
    let sqrt_phi1 = (cond.phi_alt / (tau * tau)).sqrt();
    let power = 1.0 - normal_cdf((region.k1 - mu1) / sqrt_phi1)
        + normal_cdf((region.k2 - mu1) / sqrt_phi1);
    PowerReport::from_power(power)
}

/// Leading-order expected Type II error `2 sqrt(phi0) z_{alpha/2} / (tau sqrt(2 pi))`.
pub fn expected_type2_closed(tau: f64, alpha: Probability, phi0: f64) -> f64 {
    assert!(tau > 0.0, "expected_type2_closed requires tau > 0");
    assert!(phi0 > 0.0, "expected_type2_closed requires phi0 > 0");
    let z = normal_quantile(alpha.value() * 0.5).expect("alpha/2 in (0, 0.5)");
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    2.0 * phi0.sqrt() * z / sqrt_2pi / tau
}

/// Which exact test the expectation integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    FixedCutoff,
    NpExact,
}

/// Expected Type II error of the chosen test, integrating the exact
/// conditional Type II over `(Q_1, Q_2) ~ N(0, rho1) x N(0, rho2)` by
/// Gauss-Hermite quadrature. A zero-variance axis collapses to a point.
pub fn expected_type2_quadrature(
    params: &ModelParams,
    alpha: Probability,
    kind: TestKind,
) -> Result<f64> {
    expected_type2_quadrature_with_nodes(params, alpha, kind, GH_NODES)
}

pub fn expected_type2_quadrature_with_nodes(
    params: &ModelParams,
    alpha: Probability,
    kind: TestKind,
    nodes: usize,
) -> Result<f64> {
    if kind == TestKind::NpExact {
        // The convexity precondition does not depend on (q1, q2); fail fast.
        let cond = conditional_params(params, 0.0, 0.0);
        LrQuadratic::new(params, &cond)?;
    }
    let rule = GaussHermite::new(nodes)?;
    let axis1 = gaussian_expectation_axis(&rule, params.rho1);
    let axis2 = gaussian_expectation_axis(&rule, params.rho2);
    let mut total = 0.0;
    for &(q1, w1) in &axis1 {
        for &(q2, w2) in &axis2 {
            let type2 = match kind {
                TestKind::FixedCutoff => fixed_test_power(params, q1, q2, alpha).type2,
                TestKind::NpExact => {
                    let region = np_exact_region(alpha, params, q1, q2)?;
                    np_power(&region, params, q1, q2).type2
                }
            };
            total += w1 * w2 * type2.value();
        }
    }
    Ok(total)
}
