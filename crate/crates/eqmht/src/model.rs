//! The hierarchical equicorrelated observation model.
//!
//! Observations decompose into shared factors and idiosyncratic components:
//! `X_i = sigma_eps * (P_1i + Q_1) + sigma_i * (P_2i + Q_2)` with
//! `Q_j ~ N(0, rho_j)`, `P_ji ~ N(0, 1 - rho_j)`, all independent, and
//! `sigma_i` switching between `sigma_0` (null) and `sqrt(sigma_0^2 + tau^2)`
//! (signal). Conditioning on `(Q_1, Q_2)` makes the coordinates independent
//! Gaussians, which is what every test in this crate exploits.

use crate::error::{Error, Result};
use crate::math::Probability;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Full parameter set of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of hypotheses.
    pub n: usize,
    /// Signal prevalence: each coordinate is a signal with this probability.
    pub p: Probability,
    /// Observation noise scale.
    pub sigma_eps: f64,
    /// Null prior scale.
    pub sigma0: f64,
    /// Signal strength; the signal prior scale is sqrt(sigma0^2 + tau^2).
    pub tau: f64,
    /// Equicorrelation of the observation noise.
    pub rho1: f64,
    /// Equicorrelation of the prior.
    pub rho2: f64,
}

impl ModelParams {
    /// Checks every invariant, returning the parameters unchanged on success.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParams(format!("n must be >= 1, got {}", self.n)));
        }
        for (name, v) in [
            ("sigma_eps", self.sigma_eps),
            ("sigma0", self.sigma0),
            ("tau", self.tau),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        // The factor decomposition represents Q_j ~ N(0, rho_j), which
        // requires rho_j >= 0; rho_j = 1 would let the null conditional
        // variance collapse.
        for (name, r) in [("rho1", self.rho1), ("rho2", self.rho2)] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in [0, 1), got {r}"
                )));
            }
        }
        if self.phi0() <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "null conditional variance sigma_eps^2(1-rho1) + sigma0^2(1-rho2) \
                 must be positive, got {}",
                self.phi0()
            )));
        }
        Ok(())
    }

    /// Null conditional variance `Phi_0 = sigma_eps^2(1-rho1) + sigma0^2(1-rho2)`.
    #[inline]
    pub fn phi0(&self) -> f64 {
        self.sigma_eps * self.sigma_eps * (1.0 - self.rho1)
            + self.sigma0 * self.sigma0 * (1.0 - self.rho2)
    }

    /// Signal prior scale `sigma_tau = sqrt(sigma0^2 + tau^2)`.
    #[inline]
    pub fn sigma_tau(&self) -> f64 {
        (self.sigma0 * self.sigma0 + self.tau * self.tau).sqrt()
    }

    /// Prior scale of coordinate `i` given its signal indicator.
    #[inline]
    pub fn sigma_for(&self, is_signal: bool) -> f64 {
        if is_signal {
            self.sigma_tau()
        } else {
            self.sigma0
        }
    }
}

/// One realization of the signal indicators and latent factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentDraw {
    pub eta: Vec<bool>,
    pub q1: f64,
    pub q2: f64,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

/// Observation vector together with the ground truth that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetDraw {
    pub x: Vec<f64>,
    pub truth: Vec<bool>,
}

/// Conditional moments of a single coordinate given `(Q_1, Q_2) = (q1, q2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalParams {
    /// Null conditional mean `sigma_eps*q1 + sigma0*q2`.
    pub mu0: f64,
    /// Null conditional variance.
    pub phi0: f64,
    /// Alternative conditional mean `sigma_eps*q1 + sigma_tau*q2`.
    pub mu_alt: f64,
    /// Alternative conditional variance.
    pub phi_alt: f64,
}

/// Conditional distribution parameters for both hypotheses at `(q1, q2)`.
pub fn conditional_params(params: &ModelParams, q1: f64, q2: f64) -> ConditionalParams {
    let one_m_r1 = 1.0 - params.rho1;
    let one_m_r2 = 1.0 - params.rho2;
    let sig_tau_sq = params.sigma0 * params.sigma0 + params.tau * params.tau;
    ConditionalParams {
        mu0: params.sigma_eps * q1 + params.sigma0 * q2,
        phi0: params.sigma_eps * params.sigma_eps * one_m_r1
            + params.sigma0 * params.sigma0 * one_m_r2,
        mu_alt: params.sigma_eps * q1 + sig_tau_sq.sqrt() * q2,
        phi_alt: params.sigma_eps * params.sigma_eps * one_m_r1 + sig_tau_sq * one_m_r2,
    }
}

/// Independent Bernoulli(p) signal indicators, one uniform draw per coordinate.
pub fn sample_eta<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Vec<bool> {
    let p = params.p.value();
    (0..params.n).map(|_| rng.random::<f64>() < p).collect()
}

/// Draws the latent factors in the fixed order q1, q2, p1 vector, p2 vector.
///
/// `Q_j ~ N(0, rho_j)` is realized as `sqrt(rho_j)` times a standard normal,
/// so `rho_j = 0` yields exactly zero while consuming the same number of
/// draws from the stream.
pub fn sample_latent<R: Rng + ?Sized>(
    params: &ModelParams,
    eta: &[bool],
    rng: &mut R,
) -> LatentDraw {
    let q1 = params.rho1.sqrt() * rng.sample::<f64, _>(StandardNormal);
    let q2 = params.rho2.sqrt() * rng.sample::<f64, _>(StandardNormal);
    let s1 = (1.0 - params.rho1).sqrt();
    let s2 = (1.0 - params.rho2).sqrt();
    let p1 = (0..params.n)
        .map(|_| s1 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let p2 = (0..params.n)
        .map(|_| s2 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    LatentDraw {
        eta: eta.to_vec(),
        q1,
        q2,
        p1,
        p2,
    }
}

/// Assembles observations `x_i = sigma_eps*(p1_i + q1) + sigma_i*(p2_i + q2)`.
pub fn assemble_observations(params: &ModelParams, latent: &LatentDraw) -> DatasetDraw {
    let x = latent
        .eta
        .iter()
        .zip(latent.p1.iter().zip(latent.p2.iter()))
        .map(|(&is_signal, (&p1, &p2))| {
            params.sigma_eps * (p1 + latent.q1)
                + params.sigma_for(is_signal) * (p2 + latent.q2)
        })
        .collect();
    DatasetDraw {
        x,
        truth: latent.eta.clone(),
    }
}

/// Draws the full hierarchy in the documented order: eta, then the latent
/// factors, then the assembled observations.
pub fn sample_dataset<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> DatasetDraw {
    let eta = sample_eta(params, rng);
    let latent = sample_latent(params, &eta, rng);
    assemble_observations(params, &latent)
}

/// Covariance of the observations given `eta`:
/// `sigma_eps^2 * Sigma_1 + D * Sigma_2 * D` with `Sigma_k` equicorrelated
/// and `D = diag(sigma_i)`.
pub fn covariance_given_eta(params: &ModelParams, eta: &[bool]) -> DMatrix<f64> {
    let n = eta.len();
    let sigmas: Vec<f64> = eta.iter().map(|&e| params.sigma_for(e)).collect();
    let se2 = params.sigma_eps * params.sigma_eps;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            se2 + sigmas[i] * sigmas[i]
        } else {
            se2 * params.rho1 + sigmas[i] * sigmas[j] * params.rho2
        }
    })
}

/// Samples observations by factorizing the joint covariance directly.
///
/// This is the cross-check oracle for [`assemble_observations`]; production
/// sampling goes through the O(n) factor decomposition instead.
pub fn sample_direct<R: Rng + ?Sized>(
    params: &ModelParams,
    eta: &[bool],
    rng: &mut R,
) -> Result<DatasetDraw> {
    let cov = covariance_given_eta(params, eta);
    let chol = cov.cholesky().ok_or_else(|| {
        Error::Numeric("covariance factorization failed: matrix not positive definite".into())
    })?;
    let z = DVector::from_fn(eta.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = chol.l() * z;
    Ok(DatasetDraw {
        x: x.iter().copied().collect(),
        truth: eta.to_vec(),
    })
}
