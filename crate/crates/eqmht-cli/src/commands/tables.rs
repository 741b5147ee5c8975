//! `eqmht tables`: run the replication grid over (p, rho) x tau and write
//! one CSV per table plus a combined Markdown report.

use crate::manifest::{fmt9, fmt_plain, ArtifactRecord, DeterministicManifest, RunManifest};
use crate::settings::{resolve_seed, resolve_workers, ConfigFile};
use crate::CliError;
use clap::Args;
use eqmht::sim::{configs_over_tau_grid, run_grid, CutoffMode, GridRun, SimConfig};
use eqmht::{ModelParams, Probability, TableRow, TrimOrder};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Args, Debug)]
pub struct TablesArgs {
    /// Signal prevalence values to run (one table per (p, rho) pair)
    #[arg(long = "p", value_delimiter = ',', num_args = 1.., default_values_t = vec![0.1, 0.05])]
    pub p: Vec<f64>,

    /// Equicorrelation values (sets rho1 = rho2 = rho)
    #[arg(long = "rho", value_delimiter = ',', num_args = 1.., default_values_t = vec![0.0, 0.1, 0.4, 0.7])]
    pub rho: Vec<f64>,

    /// Signal strengths, one table row per value
    #[arg(long = "tau-grid", value_delimiter = ',', num_args = 1..,
          default_values_t = vec![1.0, 3.0, 7.0, 15.0, 30.0, 50.0, 100.0])]
    pub tau_grid: Vec<f64>,

    /// Replications per row
    #[arg(long, default_value_t = 500)]
    pub reps: u32,

    /// Number of hypotheses per replication
    #[arg(long, default_value_t = 500)]
    pub n: usize,

    /// Level of significance
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Per-tail trimming fraction for the location estimate
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,

    /// Observation noise scale
    #[arg(long = "sigma-eps", default_value_t = 1.0)]
    pub sigma_eps: f64,

    /// Null prior scale
    #[arg(long = "sigma0", default_value_t = 1.0)]
    pub sigma0: f64,

    /// Master seed (overrides EQMHT_SEED and the config file)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads (overrides EQMHT_WORKERS and the config file)
    #[arg(long)]
    pub workers: Option<usize>,

    /// Output directory
    #[arg(long, default_value = "tables_out")]
    pub out: PathBuf,

    /// Cutoff rule: empirical-null-quantile (table reproduction) or
    /// theoretical (practitioner rule)
    #[arg(long, value_enum, default_value_t = ModeArg::EmpiricalNullQuantile)]
    pub mode: ModeArg,

    /// Optional flat key=value config file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    EmpiricalNullQuantile,
    Theoretical,
}

impl From<ModeArg> for CutoffMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::EmpiricalNullQuantile => CutoffMode::EmpiricalNullQuantile,
            ModeArg::Theoretical => CutoffMode::Theoretical,
        }
    }
}

pub fn run(args: TablesArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let config_file = ConfigFile::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &config_file)?;
    let workers = resolve_workers(args.workers, &config_file)?;

    let alpha = Probability::new(args.alpha)?;
    if !alpha.is_interior() {
        return Err(CliError::Usage("alpha must lie strictly inside (0, 1)".into()));
    }
    let beta = TrimOrder::new(args.beta)?;
    if args.tau_grid.iter().any(|&t| t.is_nan() || t <= 0.0) {
        return Err(CliError::Usage("every tau in --tau-grid must be > 0".into()));
    }
    let mode: CutoffMode = args.mode.into();

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;

    let mut artifacts = Vec::new();
    let mut report = String::new();
    let mut report_manifest = DeterministicManifest::new("tables", Some(seed));
    push_common(&mut report_manifest, &args, mode);
    report.push_str(&report_manifest.header_lines());
    let _ = writeln!(report, "\n# Simulation tables\n");

    for &p in &args.p {
        for &rho in &args.rho {
            let params = ModelParams {
                n: args.n,
                p: Probability::new(p)?,
                sigma_eps: args.sigma_eps,
                sigma0: args.sigma0,
                tau: args.tau_grid[0],
                rho1: rho,
                rho2: rho,
            }
            .validated()?;
            let base = SimConfig {
                params,
                reps: args.reps,
                alpha,
                beta,
                cutoff_mode: mode,
                master_seed: seed,
                workers,
            };
            let grid = run_grid(&configs_over_tau_grid(&base, &args.tau_grid))
                .map_err(CliError::from)?;

            let mut manifest = DeterministicManifest::new("tables", Some(seed));
            push_common(&mut manifest, &args, mode);
            manifest.push("p", fmt_plain(p));
            manifest.push("rho1", fmt_plain(rho));
            manifest.push("rho2", fmt_plain(rho));
            manifest.push(
                "excluded",
                grid.excluded
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );

            let file_name = format!("table_p{}_rho{}.csv", fmt_plain(p), fmt_plain(rho));
            let path = args.out.join(&file_name);
            write_csv(&path, &manifest, &grid)?;
            append_markdown(&mut report, p, rho, &args, &grid.rows);
            artifacts.push(ArtifactRecord {
                file: file_name,
                excluded_replications: grid.excluded.iter().sum(),
            });
        }
    }

    let report_path = args.out.join("report.md");
    std::fs::write(&report_path, report).map_err(|e| CliError::io(&report_path, e))?;

    let full = RunManifest {
        deterministic: report_manifest,
        workers,
        duration_secs: started.elapsed().as_secs_f64(),
        artifacts,
    };
    let manifest_path = args.out.join("run_manifest.json");
    let json = serde_json::to_string_pretty(&full)
        .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
    std::fs::write(&manifest_path, json).map_err(|e| CliError::io(&manifest_path, e))?;

    eprintln!(
        "wrote {} table(s) to {} in {:.1}s",
        args.p.len() * args.rho.len(),
        args.out.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn push_common(manifest: &mut DeterministicManifest, args: &TablesArgs, mode: CutoffMode) {
    manifest.push("mode", mode);
    manifest.push("n", args.n);
    manifest.push("reps", args.reps);
    manifest.push("alpha", fmt_plain(args.alpha));
    manifest.push("beta", fmt_plain(args.beta));
    manifest.push("sigma_eps", fmt_plain(args.sigma_eps));
    manifest.push("sigma0", fmt_plain(args.sigma0));
    manifest.push(
        "tau_grid",
        args.tau_grid
            .iter()
            .map(|t| fmt_plain(*t))
            .collect::<Vec<_>>()
            .join(","),
    );
}

fn write_csv(
    path: &Path,
    manifest: &DeterministicManifest,
    grid: &GridRun,
) -> Result<(), CliError> {
    let mut out = manifest.header_lines();
    out.push_str("tau,pfp_mean,pfp_se,pfn_mean,pfn_se,e_type2\n");
    for row in &grid.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_plain(row.tau),
            fmt9(row.pfp_mean),
            fmt9(row.pfp_se),
            fmt9(row.pfn_mean),
            fmt9(row.pfn_se),
            fmt9(row.e_type2),
        );
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

fn append_markdown(report: &mut String, p: f64, rho: f64, args: &TablesArgs, rows: &[TableRow]) {
    let _ = writeln!(
        report,
        "## n={}, p={}, rho1=rho2={}\n",
        args.n,
        fmt_plain(p),
        fmt_plain(rho)
    );
    let _ = writeln!(
        report,
        "| tau | p.f.p. | se(p.f.p.) | p.f.n. | se(p.f.n.) | E(Type II error) |"
    );
    let _ = writeln!(report, "|---|---|---|---|---|---|");
    for r in rows {
        let _ = writeln!(
            report,
            "| {} | {} | {} | {} | {} | {} |",
            fmt_plain(r.tau),
            fmt9(r.pfp_mean),
            fmt9(r.pfp_se),
            fmt9(r.pfn_mean),
            fmt9(r.pfn_se),
            fmt9(r.e_type2),
        );
    }
    report.push('\n');
}
