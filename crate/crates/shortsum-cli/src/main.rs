//! `shortsum` — Gram points, short trigonometric sums, and their
//! discrete moments.
//!
//! Exit codes: 0 all checks pass, 1 parameter validation error,
//! 2 runtime/math error, 3 soft (trend) check outside its band.

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use shortsum::dd::Dd;
use shortsum::gram::gram_range;
use shortsum::kernels::{RangeTable, SumValues, DEFAULT_COUNT_CAP};
use shortsum::params::{validate_params, ExperimentParams, ParamError, PsiSpec};
use shortsum_cli::experiment::{
    run_experiment, run_sweep, u_for_point_budget, ExperimentConfig, SoftBounds, SweepConfig,
};
use shortsum_cli::identity::{identity_suite, summary_lines, IdentityConfig};
use shortsum_cli::report::{points_to_csv, sweep_rows_to_csv, SweepData, SweepRow, SCHEMA_VERSION};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "shortsum",
    version,
    about = "Gram points, short trigonometric sums near sqrt(T/2pi), and their discrete moments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct ShapeArgs {
    /// Range-width parameter K (defaults to the psi value)
    #[arg(long = "K")]
    k: Option<f64>,
    /// psi(T): loglog, logloglog, or a fixed number
    #[arg(long, default_value = "loglog", value_parser = PsiSpec::from_str)]
    psi: PsiSpec,
    /// Enumerate only [T, T + min(U, u_cap)]
    #[arg(long)]
    u_cap: Option<f64>,
    /// Cap enumeration at roughly this many Gram points
    #[arg(long)]
    max_points: Option<u64>,
    /// Skip the regime constraints (small-T smoke runs)
    #[arg(long)]
    relaxed: bool,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Omit run metadata so outputs are byte-comparable across runs
    #[arg(long)]
    deterministic: bool,
    /// Worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Seed for randomized subcommands
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Clone)]
struct SoftArgs {
    /// Lower edge of the mean-value ratio band
    #[arg(long, default_value_t = 0.5)]
    mean_lo: f64,
    /// Upper edge of the mean-value ratio band
    #[arg(long, default_value_t = 2.0)]
    mean_hi: f64,
    /// Bound on the lemma error shapes
    #[arg(long, default_value_t = 10.0)]
    err_shape_max: f64,
}

impl SoftArgs {
    fn bounds(&self) -> SoftBounds {
        SoftBounds {
            mean_ratio_lo: self.mean_lo,
            mean_ratio_hi: self.mean_hi,
            err_shape_max: self.err_shape_max,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate (T, psi, K) and print the derived tuple
    Params {
        /// Window start T
        #[arg(long = "T")]
        t_start: f64,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Enumerate Gram points in [T, T + min(U, u_cap)]
    Gram {
        #[arg(long = "T")]
        t_start: f64,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate all sums at one abscissa t (default: t = T)
    Sum {
        #[arg(long = "T")]
        t_start: f64,
        /// Abscissa to evaluate at
        #[arg(long)]
        t: Option<f64>,
        /// Term-count cap for the quadratic double sums
        #[arg(long, default_value_t = DEFAULT_COUNT_CAP)]
        pair_cap: u64,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// One experiment: moments over the Gram window, JSON report
    Moments {
        #[arg(long = "T")]
        t_start: f64,
        /// Also write per-point rows (nu, t, S, w, w1, |S*|) as CSV
        #[arg(long)]
        points_csv: Option<PathBuf>,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        soft: SoftArgs,
    },
    /// Sweep over several T values, one row per T
    Sweep {
        /// Comma-separated list of T values
        #[arg(long = "T", value_delimiter = ',', required = true)]
        t_list: Vec<f64>,
        #[command(flatten)]
        shape: ShapeArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        soft: SoftArgs,
    },
    /// Randomized identity and brute-force-oracle checks
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: u32,
        /// Largest range the quadratic identities are asked to handle
        #[arg(long, default_value_t = 10_000)]
        max_count: u64,
        #[arg(long, default_value_t = 100)]
        oracle_trials: u32,
        #[arg(long, default_value_t = 1000)]
        oracle_max_count: u64,
        #[command(flatten)]
        run: RunArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ParamError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn resolve_params(t_start: f64, shape: &ShapeArgs) -> Result<ExperimentParams, ParamError> {
    let k = match shape.k {
        Some(k) => k,
        None => shape.psi.eval(t_start)?,
    };
    validate_params(t_start, shape.psi, k, shape.relaxed)
}

fn configure_pool(run: &RunArgs) -> usize {
    if let Some(n) = run.workers {
        // Ignore the error if a pool already exists (tests call in-process).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    rayon::current_num_threads()
}

fn emit(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn effective_u(params: &ExperimentParams, shape: &ShapeArgs) -> f64 {
    let mut u = params.u;
    if let Some(cap) = shape.u_cap {
        u = u.min(cap.max(0.0));
    }
    if let Some(n) = shape.max_points {
        u = u.min(u_for_point_budget(params.t_start, n));
    }
    u
}

#[derive(serde::Serialize)]
struct GramPointOut {
    nu: u64,
    t: f64,
    residual: f64,
}

#[derive(serde::Serialize)]
struct GramOut {
    schema_version: u32,
    t_start: f64,
    u_used: f64,
    q0: usize,
    points: Vec<GramPointOut>,
}

#[derive(serde::Serialize)]
struct SumOut {
    schema_version: u32,
    t: f64,
    p0: f64,
    k: f64,
    n_min: u64,
    n_max: u64,
    count: u64,
    values: SumValues,
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match cli.cmd {
        Cmd::Params { t_start, shape, run } => {
            let params = resolve_params(t_start, &shape)?;
            let mut s = serde_json::to_string_pretty(&params)?;
            s.push('\n');
            emit(&run.out, &s)?;
            Ok(0)
        }
        Cmd::Gram { t_start, shape, run } => {
            configure_pool(&run);
            let params = resolve_params(t_start, &shape)?;
            let u_used = effective_u(&params, &shape);
            let interval = gram_range(params.t_start, u_used)?;
            let content = match run.format {
                Format::Json => {
                    let out = GramOut {
                        schema_version: SCHEMA_VERSION,
                        t_start: params.t_start,
                        u_used,
                        q0: interval.q0(),
                        points: interval
                            .points
                            .iter()
                            .map(|p| GramPointOut { nu: p.nu, t: p.t.to_f64(), residual: p.residual })
                            .collect(),
                    };
                    let mut s = serde_json::to_string_pretty(&out)?;
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let mut s = String::from("nu,t,residual\n");
                    for p in &interval.points {
                        s.push_str(&format!("{},{},{:e}\n", p.nu, p.t.to_f64(), p.residual));
                    }
                    s
                }
            };
            emit(&run.out, &content)?;
            Ok(0)
        }
        Cmd::Sum { t_start, t, pair_cap, shape, run } => {
            configure_pool(&run);
            let params = resolve_params(t_start, &shape)?;
            let abscissa = t.unwrap_or(params.t_start);
            let tab = RangeTable::new(params.p0, params.k);
            let values = SumValues::evaluate(Dd::from(abscissa), &tab, pair_cap)?;
            let out = SumOut {
                schema_version: SCHEMA_VERSION,
                t: abscissa,
                p0: params.p0,
                k: params.k,
                n_min: tab.range().n_min,
                n_max: tab.range().n_max,
                count: tab.count(),
                values,
            };
            let content = match run.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&out)?;
                    s.push('\n');
                    s
                }
                Format::Csv => format!(
                    "t,p0,k,count,s,s_star_mag,w,w1,w2,w3,diag_cos,harmonic\n{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    out.t, out.p0, out.k, out.count, out.values.s, out.values.s_star_mag,
                    out.values.w, out.values.w1, out.values.w2, out.values.w3,
                    out.values.diag_cos, out.values.harmonic
                ),
            };
            emit(&run.out, &content)?;
            Ok(0)
        }
        Cmd::Moments { t_start, points_csv, shape, run, soft } => {
            let workers = configure_pool(&run);
            let params = resolve_params(t_start, &shape)?;
            let cfg = ExperimentConfig {
                params,
                u_cap: shape.u_cap,
                max_points: shape.max_points,
                deterministic: run.deterministic,
                workers,
                collect_points: points_csv.is_some(),
                soft: soft.bounds(),
            };
            let (report, moment_run) = run_experiment(&cfg)?;
            if let Some(path) = &points_csv {
                let rows = moment_run.points.as_deref().unwrap_or(&[]);
                std::fs::write(path, points_to_csv(rows))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let content = match run.format {
                Format::Json => report.to_json(),
                Format::Csv => {
                    let row = SweepRow {
                        t_start: params.t_start,
                        data: Some(SweepData::from_report(&report.report)),
                        error: None,
                    };
                    sweep_rows_to_csv(&[row])
                }
            };
            emit(&run.out, &content)?;
            if report.any_hard_failure() {
                eprintln!("hard check failed; see the checks block");
                return Ok(2);
            }
            if report.any_soft_failure() {
                eprintln!("soft (trend) check outside its band; see the checks block");
                return Ok(3);
            }
            Ok(0)
        }
        Cmd::Sweep { t_list, shape, run, soft } => {
            let workers = configure_pool(&run);
            let cfg = SweepConfig {
                t_list,
                psi: shape.psi,
                k: shape.k,
                u_cap: shape.u_cap,
                max_points: shape.max_points,
                relaxed: shape.relaxed,
                deterministic: run.deterministic,
                workers,
                soft: soft.bounds(),
            };
            let (rows, soft_failed) = run_sweep(&cfg)?;
            let content = match run.format {
                Format::Csv => sweep_rows_to_csv(&rows),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&rows)?;
                    s.push('\n');
                    s
                }
            };
            emit(&run.out, &content)?;
            if rows.iter().all(|r| r.error.is_some()) {
                eprintln!("every sweep point failed");
                return Ok(2);
            }
            if soft_failed {
                eprintln!("soft (trend) check outside its band on at least one row");
                return Ok(3);
            }
            Ok(0)
        }
        Cmd::Verify { trials, max_count, oracle_trials, oracle_max_count, run } => {
            configure_pool(&run);
            let cfg = IdentityConfig {
                seed: run.seed,
                trials,
                max_count,
                oracle_trials,
                oracle_max_count,
            };
            let summary = identity_suite(&cfg);
            let content = match run.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&summary)?;
                    s.push('\n');
                    s
                }
                Format::Csv => summary_lines(&summary),
            };
            emit(&run.out, &content)?;
            if run.out.is_some() {
                // Still give the terminal a one-line verdict.
                eprintln!("verify: {}", if summary.pass { "pass" } else { "FAIL" });
            }
            Ok(if summary.pass { 0 } else { 2 })
        }
    }
}
