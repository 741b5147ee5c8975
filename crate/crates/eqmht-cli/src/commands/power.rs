//! `eqmht power`: power / Type II curves over a tau grid, either conditional
//! at a fixed latent point `(q1, q2)` or integrated over the latent factors.

use crate::manifest::{fmt9, fmt_plain, DeterministicManifest};
use crate::settings::ConfigFile;
use crate::CliError;
use clap::Args;
use eqmht::testing::{
    expected_type2_closed, expected_type2_quadrature, fixed_test_power, np_exact_region,
    np_power, TestKind,
};
use eqmht::{Error, ModelParams, Probability};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct PowerArgs {
    /// Signal strengths, one row per value (tau = 0 rows mark the NP and
    /// closed-form columns NA)
    #[arg(long = "tau-grid", value_delimiter = ',', num_args = 1..,
          default_values_t = vec![1.0, 3.0, 7.0, 15.0, 30.0, 50.0, 100.0])]
    pub tau_grid: Vec<f64>,

    /// Conditioning value of the first latent factor
    #[arg(long, default_value_t = 0.0)]
    pub q1: f64,

    /// Conditioning value of the second latent factor
    #[arg(long, default_value_t = 0.0)]
    pub q2: f64,

    /// Integrate the Type II error over (Q1, Q2) instead of conditioning
    #[arg(long)]
    pub expected: bool,

    /// Level of significance
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Equicorrelation (sets rho1 = rho2 = rho)
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,

    /// Observation noise scale
    #[arg(long = "sigma-eps", default_value_t = 1.0)]
    pub sigma_eps: f64,

    /// Null prior scale
    #[arg(long = "sigma0", default_value_t = 1.0)]
    pub sigma0: f64,

    /// Output CSV file
    #[arg(long, default_value = "power.csv")]
    pub out: PathBuf,

    /// Optional flat key=value config file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

struct PowerRow {
    tau: f64,
    fixed_power: f64,
    fixed_type2: f64,
    np: Result<(f64, f64), String>,
    closed: Option<f64>,
}

pub fn run(args: PowerArgs) -> Result<(), CliError> {
    let _ = ConfigFile::load(args.config.as_deref())?;
    let alpha = Probability::new(args.alpha)?;
    if !alpha.is_interior() {
        return Err(CliError::Usage("alpha must lie strictly inside (0, 1)".into()));
    }

    let params_at = |tau: f64| -> Result<ModelParams, CliError> {
        Ok(ModelParams {
            n: 1,
            p: Probability::new(0.5).expect("constant"),
            sigma_eps: args.sigma_eps,
            sigma0: args.sigma0,
            tau,
            rho1: args.rho,
            rho2: args.rho,
        }
        .validated()?)
    };

    let mut rows = Vec::new();
    for &tau in &args.tau_grid {
        if tau < 0.0 {
            return Err(CliError::Usage(format!("tau must be >= 0, got {tau}")));
        }
        let params = params_at(tau)?;
        let (fixed_type2, np) = if args.expected {
            let f = expected_type2_quadrature(&params, alpha, TestKind::FixedCutoff)
                .map_err(CliError::from)?;
            let n = match expected_type2_quadrature(&params, alpha, TestKind::NpExact) {
                Ok(t2) => Ok((1.0 - t2, t2)),
                Err(Error::Domain(m)) => Err(m),
                Err(e) => return Err(e.into()),
            };
            (f, n)
        } else {
            let f = fixed_test_power(&params, args.q1, args.q2, alpha);
            let n = match np_exact_region(alpha, &params, args.q1, args.q2) {
                Ok(region) => {
                    let r = np_power(&region, &params, args.q1, args.q2);
                    Ok((r.power.value(), r.type2.value()))
                }
                Err(Error::Domain(m)) => Err(m),
                Err(e) => return Err(e.into()),
            };
            (f.type2.value(), n)
        };
        let closed = (tau > 0.0).then(|| expected_type2_closed(tau, alpha, params.phi0()));
        rows.push(PowerRow {
            tau,
            fixed_power: 1.0 - fixed_type2,
            fixed_type2,
            np,
            closed,
        });
    }

    let mut manifest = DeterministicManifest::new("power", None);
    manifest.push("expected", args.expected);
    manifest.push("q1", fmt_plain(args.q1));
    manifest.push("q2", fmt_plain(args.q2));
    manifest.push("alpha", fmt_plain(args.alpha));
    manifest.push("rho", fmt_plain(args.rho));
    manifest.push("sigma_eps", fmt_plain(args.sigma_eps));
    manifest.push("sigma0", fmt_plain(args.sigma0));

    let mut out = manifest.header_lines();
    for row in &rows {
        if let Err(reason) = &row.np {
            let _ = writeln!(out, "# note: tau={}: np columns NA ({reason})", row.tau);
        }
        if row.closed.is_none() {
            let _ = writeln!(
                out,
                "# note: tau={}: e_type2_closed NA (defined only for tau > 0)",
                row.tau
            );
        }
    }
    out.push_str("tau,fixed_power,fixed_type2,np_power,np_type2,e_type2_closed,tau_gap\n");
    for row in &rows {
        let (np_power_s, np_type2_s, gap_s) = match &row.np {
            Ok((p, t2)) => (
                fmt9(*p),
                fmt9(*t2),
                fmt9(row.tau * (row.fixed_type2 - t2).abs()),
            ),
            Err(_) => ("NA".into(), "NA".into(), "NA".into()),
        };
        let closed_s = row.closed.map(fmt9).unwrap_or_else(|| "NA".into());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_plain(row.tau),
            fmt9(row.fixed_power),
            fmt9(row.fixed_type2),
            np_power_s,
            np_type2_s,
            closed_s,
            gap_s,
        );
    }
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    std::fs::write(&args.out, out).map_err(|e| CliError::io(&args.out, e))?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
