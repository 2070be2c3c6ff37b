//! Experiment and sweep drivers.

use crate::report::{
    CheckVerdict, ExperimentReport, RunMeta, SweepData, SweepRow, SCHEMA_VERSION,
};
use shortsum::moments::{
    moments_over_gram, normalized_moments, theorem_report, MomentError, MomentOptions, MomentRun,
};
use shortsum::params::{validate_params, ExperimentParams, ParamError, PsiSpec};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// Finite-T bands for the soft (trend) checks. The asymptotic statements
/// carry unspecified constants, so these are configured tolerances, not
/// claims from first principles.
#[derive(Clone, Copy, Debug)]
pub struct SoftBounds {
    pub mean_ratio_lo: f64,
    pub mean_ratio_hi: f64,
    pub err_shape_max: f64,
}

impl Default for SoftBounds {
    fn default() -> Self {
        SoftBounds { mean_ratio_lo: 0.5, mean_ratio_hi: 2.0, err_shape_max: 10.0 }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub params: ExperimentParams,
    pub u_cap: Option<f64>,
    /// Derive a u-cap from a Gram-point budget (approximate, via the
    /// density ln(T/2pi)/2pi).
    pub max_points: Option<u64>,
    /// Omit run metadata so two runs compare byte-for-byte.
    pub deterministic: bool,
    /// Recorded in run metadata only; the pool is configured by the caller.
    pub workers: usize,
    pub collect_points: bool,
    pub soft: SoftBounds,
}

/// U length that yields roughly `max_points` Gram points at T.
pub fn u_for_point_budget(t_start: f64, max_points: u64) -> f64 {
    max_points as f64 * 2.0 * std::f64::consts::PI / (t_start / (2.0 * std::f64::consts::PI)).ln()
}

fn effective_u_cap(cfg: &ExperimentConfig) -> Option<f64> {
    let budget_cap = cfg.max_points.map(|n| u_for_point_budget(cfg.params.t_start, n));
    match (cfg.u_cap, budget_cap) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Runs one experiment: Gram enumeration, per-point sums, aggregation,
/// verdicts. The returned report is a pure function of the configuration
/// except for the optional run metadata.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(ExperimentReport, MomentRun), MomentError> {
    let started = Instant::now();
    let opts = MomentOptions {
        u_cap: effective_u_cap(cfg),
        collect_points: cfg.collect_points,
        ..Default::default()
    };
    let run = moments_over_gram(&cfg.params, &opts)?;
    let r = &run.report;
    let normalized = normalized_moments(r)?;
    let theorem = theorem_report(r);

    let mut checks = Vec::new();
    let schwarz = r.sum_w_w1 * r.sum_w_w1;
    let schwarz_bound = r.sum_w_sq * r.sum_w1_sq;
    checks.push(CheckVerdict::hard("schwarz_cross_moment", schwarz, schwarz_bound, schwarz <= schwarz_bound));
    let width = r.p0 * (1.0 - (-1.0 / r.k).exp());
    let width_dev = (r.range_count as f64 - width).abs();
    checks.push(CheckVerdict::hard("range_count_width", width_dev, 1.0, width_dev <= 1.0));
    checks.push(CheckVerdict::hard(
        "g_within_q0",
        r.g_count as f64,
        r.q0 as f64,
        r.g_count <= r.q0,
    ));
    let mv = r.ratios.mean_value;
    checks.push(CheckVerdict::soft(
        "mean_value_ratio_band",
        mv,
        cfg.soft.mean_ratio_hi,
        mv >= cfg.soft.mean_ratio_lo && mv <= cfg.soft.mean_ratio_hi,
    ));
    checks.push(CheckVerdict::soft(
        "lemma_a_err_shape",
        r.ratios.lemma_a_err_shape,
        cfg.soft.err_shape_max,
        r.ratios.lemma_a_err_shape <= cfg.soft.err_shape_max,
    ));
    checks.push(CheckVerdict::soft(
        "lemma_b_err_shape",
        r.ratios.lemma_b_err_shape,
        cfg.soft.err_shape_max,
        r.ratios.lemma_b_err_shape <= cfg.soft.err_shape_max,
    ));
    checks.push(CheckVerdict::soft("g_count_positive", r.g_count as f64, 1.0, r.g_count >= 1));

    let run_meta = (!cfg.deterministic).then(|| RunMeta {
        generated_unix_ms: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        elapsed_ms: started.elapsed().as_millis(),
        workers: cfg.workers,
    });

    let report = ExperimentReport {
        schema_version: SCHEMA_VERSION,
        run_meta,
        params: cfg.params,
        report: run.report,
        normalized,
        theorem,
        checks,
    };
    Ok((report, run))
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub t_list: Vec<f64>,
    pub psi: PsiSpec,
    /// None: K = psi(T) per sweep point.
    pub k: Option<f64>,
    pub u_cap: Option<f64>,
    pub max_points: Option<u64>,
    pub relaxed: bool,
    pub deterministic: bool,
    pub workers: usize,
    pub soft: SoftBounds,
}

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("sweep requires >= 2 values of T (got {0})")]
    TooFewPoints(usize),
}

fn params_for(cfg: &SweepConfig, t: f64) -> Result<ExperimentParams, ParamError> {
    let k = match cfg.k {
        Some(k) => k,
        None => cfg.psi.eval(t)?,
    };
    validate_params(t, cfg.psi, k, cfg.relaxed)
}

/// One row per T, ascending; failures become error-marked rows and the
/// sweep continues. Returns the rows and whether any soft check failed.
pub fn run_sweep(cfg: &SweepConfig) -> Result<(Vec<SweepRow>, bool), SweepError> {
    if cfg.t_list.len() < 2 {
        return Err(SweepError::TooFewPoints(cfg.t_list.len()));
    }
    let mut ts = cfg.t_list.clone();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut soft_failed = false;
    let mut rows = Vec::with_capacity(ts.len());
    for t in ts {
        let row = match params_for(cfg, t) {
            Err(e) => SweepRow { t_start: t, data: None, error: Some(e.to_string()) },
            Ok(params) => {
                let exp_cfg = ExperimentConfig {
                    params,
                    u_cap: cfg.u_cap,
                    max_points: cfg.max_points,
                    deterministic: cfg.deterministic,
                    workers: cfg.workers,
                    collect_points: false,
                    soft: cfg.soft,
                };
                match run_experiment(&exp_cfg) {
                    Err(e) => SweepRow { t_start: t, data: None, error: Some(e.to_string()) },
                    Ok((report, run)) => {
                        soft_failed |= report.any_soft_failure();
                        SweepRow {
                            t_start: t,
                            data: Some(SweepData::from_report(&run.report)),
                            error: None,
                        }
                    }
                }
            }
        };
        rows.push(row);
    }
    Ok((rows, soft_failed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        let params = validate_params(1e5, PsiSpec::LogLog, 3.0, true).unwrap();
        ExperimentConfig {
            params,
            u_cap: Some(30.0),
            max_points: None,
            deterministic: true,
            workers: 1,
            collect_points: false,
            soft: SoftBounds::default(),
        }
    }

    #[test]
    fn deterministic_report_is_reproducible() {
        let cfg = small_cfg();
        let a = run_experiment(&cfg).unwrap().0.to_json();
        let b = run_experiment(&cfg).unwrap().0.to_json();
        assert_eq!(a, b);
        assert!(!a.contains("run_meta"));
    }

    #[test]
    fn run_meta_present_without_deterministic() {
        let cfg = ExperimentConfig { deterministic: false, ..small_cfg() };
        let j = run_experiment(&cfg).unwrap().0.to_json();
        assert!(j.contains("run_meta"));
        assert!(j.contains("generated_unix_ms"));
    }

    #[test]
    fn point_budget_reaches_target() {
        let t = 1e6;
        let u = u_for_point_budget(t, 1000);
        let params = validate_params(t, PsiSpec::LogLog, 3.0, false).unwrap();
        let cfg = ExperimentConfig {
            params,
            u_cap: Some(u),
            max_points: None,
            deterministic: true,
            workers: 1,
            collect_points: false,
            soft: SoftBounds::default(),
        };
        let (report, _) = run_experiment(&cfg).unwrap();
        let q0 = report.report.q0 as i64;
        assert!((q0 - 1000).abs() < 20, "q0 = {q0}");
    }

    #[test]
    fn sweep_needs_two_points_and_sorts() {
        let cfg = SweepConfig {
            t_list: vec![1e5],
            psi: PsiSpec::LogLog,
            k: None,
            u_cap: Some(30.0),
            max_points: None,
            relaxed: true,
            deterministic: true,
            workers: 1,
            soft: SoftBounds::default(),
        };
        assert!(matches!(run_sweep(&cfg), Err(SweepError::TooFewPoints(1))));

        let cfg = SweepConfig { t_list: vec![2e5, 1e5], ..cfg };
        let (rows, _) = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].t_start < rows[1].t_start);
        assert!(rows.iter().all(|r| r.data.is_some()));
    }

    #[test]
    fn sweep_marks_failures_and_continues() {
        // T = 10 is below the loglog floor; T = 12 below as well; the
        // valid row still computes.
        let cfg = SweepConfig {
            t_list: vec![10.0, 1e5],
            psi: PsiSpec::LogLog,
            k: None,
            u_cap: Some(30.0),
            max_points: None,
            relaxed: true,
            deterministic: true,
            workers: 1,
            soft: SoftBounds::default(),
        };
        let (rows, _) = run_sweep(&cfg).unwrap();
        assert!(rows[0].error.is_some() && rows[0].data.is_none());
        assert!(rows[1].data.is_some());
    }
}
