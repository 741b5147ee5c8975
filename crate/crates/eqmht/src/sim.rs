//! Monte Carlo replication harness.
//!
//! Each replication draws a fresh dataset, centers it by the trimmed mean,
//! applies the selected cutoff rule, and scores false positives against the
//! known truth. Replications are indexed, each consumes its own counter-based
//! random stream, so results are bitwise independent of worker count.

use crate::error::{Error, Result};
use crate::math::{solve_size_t, trimmed_mean, Probability, TrimOrder};
use crate::model::{sample_dataset, ModelParams};
use crate::testing::{apply_cutoff, expected_type2_closed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How the rejection cutoff is obtained within a replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffMode {
    /// Order-statistic cutoff: the upper-alpha quantile of the true-null
    /// centered absolute values, with rejection by `>=` against it. This is
    /// the table-reproduction rule; it needs the oracle truth.
    EmpiricalNullQuantile,
    /// `K = t * sqrt(phi0)` with `t` solving the size equation at `mu0 = 0`,
    /// applied to centered observations. This is the rule a practitioner
    /// who knows `phi0` would run.
    Theoretical,
}

impl std::fmt::Display for CutoffMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CutoffMode::EmpiricalNullQuantile => write!(f, "empirical-null-quantile"),
            CutoffMode::Theoretical => write!(f, "theoretical"),
        }
    }
}

/// Everything a simulation run needs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub reps: u32,
    pub alpha: Probability,
    pub beta: TrimOrder,
    pub cutoff_mode: CutoffMode,
    pub master_seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.reps < 1 {
            return Err(Error::InvalidParams("reps must be >= 1".into()));
        }
        if self.workers < 1 {
            return Err(Error::InvalidParams("workers must be >= 1".into()));
        }
        if !self.alpha.is_interior() {
            return Err(Error::InvalidParams(
                "alpha must lie strictly inside (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Confusion counts from one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub false_positives: usize,
    pub true_nulls: usize,
    pub false_negatives: usize,
    pub true_signals: usize,
}

/// One row of an output table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub tau: f64,
    pub pfp_mean: f64,
    pub pfp_se: f64,
    pub pfn_mean: f64,
    pub pfn_se: f64,
    pub e_type2: f64,
}

/// Aggregated proportions over replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub pfp_mean: f64,
    pub pfp_se: f64,
    pub pfn_mean: f64,
    pub pfn_se: f64,
    /// Replications that survived exclusion.
    pub included: usize,
    /// Replications dropped because they had no nulls or no signals.
    pub excluded: usize,
}

/// Rows plus per-row exclusion counts for a whole tau grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub rows: Vec<TableRow>,
    pub excluded: Vec<usize>,
}

/// Child stream for replication `rep_index`: ChaCha keyed by the master seed
/// with the replication index as the stream counter.
pub fn replication_rng(master_seed: u64, rep_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(rep_index);
    rng
}

/// Runs one replication. Returns `None` when the empirical cutoff is
/// undefined because the draw produced no true nulls.
pub fn run_replication(config: &SimConfig, rep_index: u64) -> Option<ReplicationOutcome> {
    let mut rng = replication_rng(config.master_seed, rep_index);
    let data = sample_dataset(&config.params, &mut rng);
    let center = trimmed_mean(&data.x, config.beta).expect("n >= 1 guarantees data after trim");

    let n = data.x.len();
    let true_signals = data.truth.iter().filter(|&&t| t).count();
    let true_nulls = n - true_signals;

    let (false_positives, false_negatives) = match config.cutoff_mode {
        CutoffMode::EmpiricalNullQuantile => {
            if true_nulls == 0 {
                return None;
            }
            let mut null_devs: Vec<f64> = data
                .x
                .iter()
                .zip(&data.truth)
                .filter(|(_, &t)| !t)
                .map(|(&x, _)| (x - center).abs())
                .collect();
            null_devs.sort_unstable_by(|a, b| b.total_cmp(a));
            let rank = ((config.alpha.value() * true_nulls as f64).ceil() as usize)
                .clamp(1, true_nulls);
            let k = null_devs[rank - 1];
            // Rejection by >= K so that exactly `rank` nulls are rejected
            // (ties have probability zero for continuous data).
            let fp = data
                .x
                .iter()
                .zip(&data.truth)
                .filter(|(&x, &t)| !t && (x - center).abs() >= k)
                .count();
            let fnc = data
                .x
                .iter()
                .zip(&data.truth)
                .filter(|(&x, &t)| t && (x - center).abs() < k)
                .count();
            (fp, fnc)
        }
        CutoffMode::Theoretical => {
            let phi0 = config.params.phi0();
            let t = solve_size_t(config.alpha, 0.0, phi0);
            let k = t * phi0.sqrt();
            let flags = apply_cutoff(&data.x, center, k);
            let fp = flags
                .iter()
                .zip(&data.truth)
                .filter(|(&f, &t)| f && !t)
                .count();
            let fnc = flags
                .iter()
                .zip(&data.truth)
                .filter(|(&f, &t)| !f && t)
                .count();
            (fp, fnc)
        }
    };

    Some(ReplicationOutcome {
        false_positives,
        true_nulls,
        false_negatives,
        true_signals,
    })
}

/// All replications, strictly in index order, on the current thread.
pub fn run_replications_seq(config: &SimConfig) -> Vec<Option<ReplicationOutcome>> {
    (0..config.reps as u64)
        .map(|r| run_replication(config, r))
        .collect()
}

/// All replications, distributed over `config.workers` threads. Stream
/// derivation depends only on `(master_seed, rep_index)`, so the result is
/// identical to the sequential run.
#[cfg(feature = "parallel")]
pub fn run_replications(config: &SimConfig) -> Vec<Option<ReplicationOutcome>> {
    if config.workers == 1 {
        return run_replications_seq(config);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .expect("failed to build worker pool");
    pool.install(|| {
        (0..config.reps as u64)
            .into_par_iter()
            .map(|r| run_replication(config, r))
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
pub fn run_replications(config: &SimConfig) -> Vec<Option<ReplicationOutcome>> {
    run_replications_seq(config)
}

/// Per-replication proportions averaged over replications; the reported
/// spread is the standard error of the mean (sample sd / sqrt(count)).
pub fn aggregate(outcomes: &[ReplicationOutcome]) -> Result<Aggregate> {
    let mut pfp = Vec::with_capacity(outcomes.len());
    let mut pfn = Vec::with_capacity(outcomes.len());
    let mut excluded = 0usize;
    for o in outcomes {
        if o.true_nulls == 0 || o.true_signals == 0 {
            excluded += 1;
            continue;
        }
        pfp.push(o.false_positives as f64 / o.true_nulls as f64);
        pfn.push(o.false_negatives as f64 / o.true_signals as f64);
    }
    if pfp.is_empty() {
        return Err(Error::Aggregation(
            "no replication had both true nulls and true signals".into(),
        ));
    }
    let (pfp_mean, pfp_se) = mean_and_se(&pfp);
    let (pfn_mean, pfn_se) = mean_and_se(&pfn);
    Ok(Aggregate {
        pfp_mean,
        pfp_se,
        pfn_mean,
        pfn_se,
        included: pfp.len(),
        excluded,
    })
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Runs one config per tau-grid entry and emits table rows in input order.
pub fn run_grid(configs: &[SimConfig]) -> Result<GridRun> {
    let mut rows = Vec::with_capacity(configs.len());
    let mut excluded = Vec::with_capacity(configs.len());
    for config in configs {
        config.validate()?;
        if config.params.tau <= 0.0 {
            return Err(Error::Domain(
                "table rows need tau > 0 for the closed-form column".into(),
            ));
        }
        let outcomes = run_replications(config);
        let degenerate = outcomes.iter().filter(|o| o.is_none()).count();
        let usable: Vec<ReplicationOutcome> = outcomes.into_iter().flatten().collect();
        let agg = aggregate(&usable)?;
        rows.push(TableRow {
            tau: config.params.tau,
            pfp_mean: agg.pfp_mean,
            pfp_se: agg.pfp_se,
            pfn_mean: agg.pfn_mean,
            pfn_se: agg.pfn_se,
            e_type2: expected_type2_closed(config.params.tau, config.alpha, config.params.phi0()),
        });
        excluded.push(degenerate + agg.excluded);
    }
    Ok(GridRun { rows, excluded })
}

/// Convenience: the same config across a tau grid.
pub fn configs_over_tau_grid(base: &SimConfig, taus: &[f64]) -> Vec<SimConfig> {
    taus.iter()
        .map(|&tau| {
            let mut c = *base;
            c.params.tau = tau;
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn base_config(p: f64, rho: f64, tau: f64) -> SimConfig {
        SimConfig {
            params: ModelParams {
                n: 500,
                p: Probability::new(p).unwrap(),
                sigma_eps: 1.0,
                sigma0: 1.0,
                tau,
                rho1: rho,
                rho2: rho,
            },
            reps: 100,
            alpha: Probability::new(0.05).unwrap(),
            beta: TrimOrder::new(0.05).unwrap(),
            cutoff_mode: CutoffMode::EmpiricalNullQuantile,
            master_seed: 1729,
            workers: 1,
        }
    }

    #[test]
    fn replication_stream_is_pure() {
        let mut a = replication_rng(7, 3);
        let mut b = replication_rng(7, 3);
        let va: Vec<u64> = (0..8).map(|_| a.random()).collect();
        let vb: Vec<u64> = (0..8).map(|_| b.random()).collect();
        assert_eq!(va, vb);

        let mut c = replication_rng(7, 4);
        let vc: Vec<u64> = (0..8).map(|_| c.random()).collect();
        assert_ne!(va, vc);
    }

    #[test]
    fn replication_is_deterministic() {
        let config = base_config(0.1, 0.4, 15.0);
        for r in [0u64, 1, 17] {
            assert_eq!(
                run_replication(&config, r),
                run_replication(&config, r),
                "rep {r}"
            );
        }
    }

    #[test]
    fn all_null_draw_rejects_exactly_the_order_statistic_count() {
        // p = 0: every coordinate is a null, so the empirical rule rejects
        // exactly ceil(alpha * n) of them.
        let config = base_config(0.0, 0.0, 15.0);
        let o = run_replication(&config, 0).unwrap();
        assert_eq!(o.true_nulls, 500);
        assert_eq!(o.true_signals, 0);
        assert_eq!(o.false_positives, 25);
    }

    #[test]
    fn tau_zero_false_negative_rate_is_one_minus_alpha() {
        // At tau = 0 signals are indistinguishable from nulls, so they are
        // retained at rate ~ 1 - alpha.
        let mut config = base_config(0.1, 0.0, 0.0);
        config.reps = 200;
        let outcomes: Vec<_> = run_replications_seq(&config)
            .into_iter()
            .flatten()
            .collect();
        let agg = aggregate(&outcomes).unwrap();
        assert!(
            (agg.pfn_mean - 0.95).abs() < 5.0 * agg.pfn_se.max(1e-3),
            "pfn {} (se {})",
            agg.pfn_mean,
            agg.pfn_se
        );
    }

    #[test]
    fn theoretical_mode_holds_its_size() {
        let mut config = base_config(0.1, 0.0, 15.0);
        config.cutoff_mode = CutoffMode::Theoretical;
        config.reps = 300;
        let outcomes: Vec<_> = run_replications_seq(&config)
            .into_iter()
            .flatten()
            .collect();
        let agg = aggregate(&outcomes).unwrap();
        // The centered null deviations are slightly over-dispersed relative
        // to the conditional law (the estimate of mu0 carries noise), so the
        // realized size is near alpha without matching it exactly.
        assert!(
            (agg.pfp_mean - 0.05).abs() < 0.01,
            "theoretical-mode pfp {}",
            agg.pfp_mean
        );
    }

    #[test]
    fn aggregate_identical_outcomes_has_zero_se() {
        let o = ReplicationOutcome {
            false_positives: 23,
            true_nulls: 450,
            false_negatives: 7,
            true_signals: 50,
        };
        let agg = aggregate(&[o; 5]).unwrap();
        // Zero spread up to the rounding of the mean itself.
        assert!(agg.pfp_se < 1e-15);
        assert!(agg.pfn_se < 1e-15);
        assert!((agg.pfp_mean - 23.0 / 450.0).abs() < 1e-15);
        assert!((agg.pfn_mean - 7.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn aggregate_excludes_degenerate_outcomes() {
        let good = ReplicationOutcome {
            false_positives: 10,
            true_nulls: 100,
            false_negatives: 2,
            true_signals: 10,
        };
        let no_signals = ReplicationOutcome {
            false_positives: 5,
            true_nulls: 110,
            false_negatives: 0,
            true_signals: 0,
        };
        let agg = aggregate(&[good, no_signals, good]).unwrap();
        assert_eq!(agg.included, 2);
        assert_eq!(agg.excluded, 1);

        assert!(aggregate(&[no_signals]).is_err());
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn aggregate_se_matches_hand_computation() {
        let mk = |fp: usize| ReplicationOutcome {
            false_positives: fp,
            true_nulls: 100,
            false_negatives: 1,
            true_signals: 10,
        };
        let agg = aggregate(&[mk(4), mk(5), mk(6)]).unwrap();
        assert!((agg.pfp_mean - 0.05).abs() < 1e-15);
        // sample sd of {0.04, 0.05, 0.06} is 0.01; se = 0.01 / sqrt(3).
        assert!((agg.pfp_se - 0.01 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grid_rows_follow_input_order_and_closed_form_column() {
        let mut config = base_config(0.1, 0.0, 1.0);
        config.reps = 20;
        let taus = [1.0, 3.0, 7.0];
        let grid = run_grid(&configs_over_tau_grid(&config, &taus)).unwrap();
        assert_eq!(grid.rows.len(), 3);
        for (row, &tau) in grid.rows.iter().zip(&taus) {
            assert_eq!(row.tau, tau);
            let want = expected_type2_closed(tau, config.alpha, 2.0);
            assert_eq!(row.e_type2, want);
            assert!(row.pfp_mean >= 0.0 && row.pfp_mean <= 1.0);
            assert!(row.pfn_mean >= 0.0 && row.pfn_mean <= 1.0);
        }
        assert_eq!(grid.excluded, vec![0, 0, 0]);
    }

    #[test]
    fn grid_rejects_tau_zero() {
        let config = base_config(0.1, 0.0, 0.0);
        assert!(run_grid(&[config]).is_err());
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn worker_count_does_not_change_results() {
        let mut config = base_config(0.1, 0.4, 15.0);
        config.reps = 40;
        config.workers = 1;
        let seq = run_replications(&config);
        config.workers = 8;
        let par = run_replications(&config);
        assert_eq!(seq, par);
    }

    #[test]
    fn outcome_counts_are_consistent() {
        let config = base_config(0.1, 0.4, 15.0);
        for r in 0..20u64 {
            let o = run_replication(&config, r).unwrap();
            assert!(o.false_positives <= o.true_nulls);
            assert!(o.false_negatives <= o.true_signals);
            assert_eq!(o.true_nulls + o.true_signals, 500);
        }
    }
}
