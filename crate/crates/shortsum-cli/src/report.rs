//! Report schema and writers.
//!
//! JSON reports are versioned and serialized with struct-order fields;
//! floats go through the shortest round-trip representation, so nothing
//! is lost and byte comparison is meaningful. Run metadata (wall-clock
//! timings, timestamp, worker count) lives in one optional `run_meta`
//! block that deterministic mode omits entirely — everything else is a
//! pure function of the configuration.

use serde::{Deserialize, Serialize};
use shortsum::moments::{MomentReport, PointSample, TheoremReport};
use shortsum::params::ExperimentParams;

pub const SCHEMA_VERSION: u32 = 1;

/// Non-reproducible run facts; omitted under `--deterministic`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub generated_unix_ms: u128,
    pub elapsed_ms: u128,
    pub workers: usize,
}

/// One pass/fail verdict attached to a report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub name: String,
    /// "hard" checks must hold for any correct build; "soft" checks are
    /// finite-T trend bands.
    pub kind: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
}

impl CheckVerdict {
    pub fn hard(name: &str, value: f64, bound: f64, passed: bool) -> Self {
        CheckVerdict { name: name.into(), kind: "hard".into(), passed, value, bound }
    }

    pub fn soft(name: &str, value: f64, bound: f64, passed: bool) -> Self {
        CheckVerdict { name: name.into(), kind: "soft".into(), passed, value, bound }
    }
}

/// The full JSON report of one experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run_meta: Option<RunMeta>,
    pub params: ExperimentParams,
    pub report: MomentReport,
    /// (m_w, m_w1, m_cross) = the Q0-normalized moments.
    pub normalized: (f64, f64, f64),
    pub theorem: TheoremReport,
    pub checks: Vec<CheckVerdict>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn any_soft_failure(&self) -> bool {
        self.checks.iter().any(|c| c.kind == "soft" && !c.passed)
    }

    pub fn any_hard_failure(&self) -> bool {
        self.checks.iter().any(|c| c.kind == "hard" && !c.passed)
    }
}

/// One sweep row; `data` is None when that T failed, with the message in
/// `error` and the sweep carrying on.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub t_start: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<SweepData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Flattened per-T numbers, in CSV column order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepData {
    pub psi: f64,
    pub k: f64,
    pub u: f64,
    pub u_used: f64,
    pub p0: f64,
    pub range_count: u64,
    pub q0: u64,
    pub q0_predicted: f64,
    pub threshold: f64,
    pub g_count: u64,
    pub q2: u64,
    pub sum_w_sq: f64,
    pub pred_lemma_a: f64,
    pub lemma_a_ratio: f64,
    pub lemma_a_err_shape: f64,
    pub sum_w1_sq: f64,
    pub pred_lemma_b: f64,
    pub lemma_b_ratio: f64,
    pub lemma_b_err_shape: f64,
    pub sum_w_w1: f64,
    pub m_w: f64,
    pub m_w1: f64,
    pub m_cross: f64,
    pub sum_s_sq: f64,
    pub pred_mean_value: f64,
    pub mean_value_ratio: f64,
    pub max_abs_s: f64,
    pub sup_bound: f64,
    pub theorem_denominator: f64,
    pub theorem_ratio: f64,
    pub q0_shape_rhs: f64,
}

impl SweepData {
    pub fn from_report(r: &MomentReport) -> SweepData {
        let q = r.q0 as f64;
        SweepData {
            psi: r.psi,
            k: r.k,
            u: r.u,
            u_used: r.u_used,
            p0: r.p0,
            range_count: r.range_count,
            q0: r.q0,
            q0_predicted: r.q0_predicted,
            threshold: r.threshold,
            g_count: r.g_count,
            q2: r.q2,
            sum_w_sq: r.sum_w_sq,
            pred_lemma_a: r.pred_lemma_a,
            lemma_a_ratio: r.ratios.lemma_a,
            lemma_a_err_shape: r.ratios.lemma_a_err_shape,
            sum_w1_sq: r.sum_w1_sq,
            pred_lemma_b: r.pred_lemma_b,
            lemma_b_ratio: r.ratios.lemma_b,
            lemma_b_err_shape: r.ratios.lemma_b_err_shape,
            sum_w_w1: r.sum_w_w1,
            m_w: r.sum_w_sq / q,
            m_w1: r.sum_w1_sq / q,
            m_cross: r.sum_w_w1 / q,
            sum_s_sq: r.sum_s_sq,
            pred_mean_value: r.pred_mean_value,
            mean_value_ratio: r.ratios.mean_value,
            max_abs_s: r.max_abs_s,
            sup_bound: r.ratios.sup_bound,
            theorem_denominator: r.theorem_denominator,
            theorem_ratio: r.ratios.theorem,
            q0_shape_rhs: r.q0 as f64 * r.t_start.powf(-1.0 / 3.0) / (12.0 * r.k),
        }
    }
}

/// CSV header for sweep rows; the column order is part of the schema.
pub const SWEEP_CSV_HEADER: &str = "t_start,psi,k,u,u_used,p0,range_count,q0,q0_predicted,threshold,g_count,q2,sum_w_sq,pred_lemma_a,lemma_a_ratio,lemma_a_err_shape,sum_w1_sq,pred_lemma_b,lemma_b_ratio,lemma_b_err_shape,sum_w_w1,m_w,m_w1,m_cross,sum_s_sq,pred_mean_value,mean_value_ratio,max_abs_s,sup_bound,theorem_denominator,theorem_ratio,q0_shape_rhs,error";

pub fn sweep_rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        match (&row.data, &row.error) {
            (Some(d), _) => {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},\n",
                    row.t_start, d.psi, d.k, d.u, d.u_used, d.p0, d.range_count, d.q0,
                    d.q0_predicted, d.threshold, d.g_count, d.q2, d.sum_w_sq, d.pred_lemma_a,
                    d.lemma_a_ratio, d.lemma_a_err_shape, d.sum_w1_sq, d.pred_lemma_b,
                    d.lemma_b_ratio, d.lemma_b_err_shape, d.sum_w_w1, d.m_w, d.m_w1, d.m_cross,
                    d.sum_s_sq, d.pred_mean_value, d.mean_value_ratio, d.max_abs_s, d.sup_bound,
                    d.theorem_denominator, d.theorem_ratio, d.q0_shape_rhs
                ));
            }
            (None, Some(err)) => {
                out.push_str(&format!("{}", row.t_start));
                // 31 empty data columns, then the quoted error marker.
                out.push_str(&",".repeat(32));
                out.push_str(&format!("\"{}\"\n", err.replace('"', "'")));
            }
            (None, None) => unreachable!("sweep row without data or error"),
        }
    }
    out
}

/// Per-point CSV: one row per Gram point.
pub fn points_to_csv(points: &[PointSample]) -> String {
    let mut out = String::from("nu,t,s,w,w1,s_star_mag\n");
    for p in points {
        out.push_str(&format!("{},{},{},{},{},{}\n", p.nu, p.t, p.s, p.w, p.w1, p.s_star_mag));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_rows_keep_column_count() {
        let rows = vec![SweepRow { t_start: 10.0, data: None, error: Some("nope".into()) }];
        let csv = sweep_rows_to_csv(&rows);
        let header_cols = SWEEP_CSV_HEADER.split(',').count();
        for line in csv.lines() {
            assert_eq!(line.split(',').count(), header_cols, "line: {line}");
        }
    }
}
