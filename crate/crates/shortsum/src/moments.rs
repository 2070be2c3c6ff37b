//! Discrete moments over a Gram interval: `sum w^2`, `sum w1^2`,
//! `sum w w1`, `sum S^2`, the exceedance count `Q1 = G` against the
//! threshold `(1/2) sqrt(P0/K)`, and the predictions they are compared
//! with.
//!
//! Points are processed in fixed-size index chunks whose partials merge
//! in chunk order, so a run is bit-identical no matter how many workers
//! the surrounding pool has.

use crate::accum::CompensatedSum;
use crate::gram::{gram_range, q0_main_term, GramError};
use crate::kernels::{linear_sums, RangeTable};
use crate::params::ExperimentParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("empty Gram interval: no t_nu in [T, T+U] for T = {t_start}, U = {u_used}")]
    EmptyGramInterval { t_start: f64, u_used: f64 },
    #[error("normalized moments need Q0 > 0")]
    ZeroQ0,
    #[error("sup_bound_check needs at least one value")]
    EmptyInput,
    #[error(transparent)]
    Gram(#[from] GramError),
}

/// The exceedance threshold `(1/2) sqrt(P0 / K)`.
pub fn exceedance_threshold(p0: f64, k: f64) -> f64 {
    0.5 * (p0 / k).sqrt()
}

/// Knobs for a moment run.
#[derive(Clone, Copy, Debug)]
pub struct MomentOptions {
    /// Cap the enumerated window at min(U, u_cap); predictions are scaled
    /// to the capped length, and the report keeps both lengths.
    pub u_cap: Option<f64>,
    /// Points per accumulation chunk (fixed; part of the reproducibility
    /// contract).
    pub chunk_size: usize,
    /// Keep per-point rows for CSV emission.
    pub collect_points: bool,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions { u_cap: None, chunk_size: 1024, collect_points: false }
    }
}

/// Per-point evaluations, one row per Gram point.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PointSample {
    pub nu: u64,
    pub t: f64,
    pub s: f64,
    pub w: f64,
    pub w1: f64,
    pub s_star_mag: f64,
}

/// Empirical/predicted comparisons derived from a report.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MomentRatios {
    /// sum w^2 over its Lemma-A prediction.
    pub lemma_a: f64,
    /// sum w1^2 over its Lemma-B prediction.
    pub lemma_b: f64,
    /// (sum S^2 / Q0) over P0/(2K).
    pub mean_value: f64,
    /// |sum w^2 - pred| / (K^{-1} sqrt(T) ln^2 T).
    pub lemma_a_err_shape: f64,
    /// |sum w1^2 - pred| / (K^{-3} sqrt(T) ln^2 T).
    pub lemma_b_err_shape: f64,
    /// g_count / (T^{1/6} K^{-1} psi ln^2 T); reported, never pass/fail
    /// (the theorem's constant is unspecified).
    pub theorem: f64,
    /// max |S| / (sqrt(P0) T^{1/6}).
    pub sup_bound: f64,
}

/// Aggregates over all Gram points in the (possibly capped) window.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MomentReport {
    pub t_start: f64,
    pub psi: f64,
    pub k: f64,
    /// Full window length U = sqrt(T) psi ln T.
    pub u: f64,
    /// Window length actually enumerated.
    pub u_used: f64,
    pub p0: f64,
    pub relaxed: bool,
    /// Terms in the summation range.
    pub range_count: u64,
    pub q0: u64,
    /// Q1 = G: points with |S| strictly above the threshold.
    pub g_count: u64,
    /// Q2 = Q0 - Q1.
    pub q2: u64,
    pub threshold: f64,
    pub sum_w_sq: f64,
    pub sum_w1_sq: f64,
    pub sum_w_w1: f64,
    pub sum_s_sq: f64,
    pub max_abs_s: f64,
    pub q0_predicted: f64,
    pub pred_lemma_a: f64,
    pub pred_lemma_b: f64,
    pub pred_mean_value: f64,
    pub theorem_denominator: f64,
    pub ratios: MomentRatios,
}

/// A moment run: the aggregate report plus optional per-point rows.
#[derive(Clone, Debug)]
pub struct MomentRun {
    pub report: MomentReport,
    pub points: Option<Vec<PointSample>>,
}

struct ChunkAccum {
    sw2: CompensatedSum,
    sw12: CompensatedSum,
    sww1: CompensatedSum,
    ss2: CompensatedSum,
    g: u64,
    max_abs_s: f64,
    rows: Option<Vec<PointSample>>,
}

/// Enumerates Gram points in `[T, T + min(U, u_cap)]`, evaluates S, w, w1
/// at each, and aggregates the moment sums and the exceedance count.
pub fn moments_over_gram(
    params: &ExperimentParams,
    opts: &MomentOptions,
) -> Result<MomentRun, MomentError> {
    let u_used = match opts.u_cap {
        Some(cap) => params.u.min(cap.max(0.0)),
        None => params.u,
    };
    let interval = gram_range(params.t_start, u_used)?;
    if interval.q0() == 0 {
        return Err(MomentError::EmptyGramInterval { t_start: params.t_start, u_used });
    }
    let tab = RangeTable::new(params.p0, params.k);
    let threshold = exceedance_threshold(params.p0, params.k);

    let points = &interval.points;
    let chunk = opts.chunk_size.max(1);
    let accums: Vec<ChunkAccum> = (0..points.len().div_ceil(chunk))
        .into_par_iter()
        .map(|ci| {
            let mut acc = ChunkAccum {
                sw2: CompensatedSum::new(),
                sw12: CompensatedSum::new(),
                sww1: CompensatedSum::new(),
                ss2: CompensatedSum::new(),
                g: 0,
                max_abs_s: 0.0,
                rows: opts.collect_points.then(Vec::new),
            };
            for p in &points[ci * chunk..((ci + 1) * chunk).min(points.len())] {
                let ls = linear_sums(p.t, &tab);
                acc.sw2.add(ls.w * ls.w);
                acc.sw12.add(ls.w1 * ls.w1);
                acc.sww1.add(ls.w * ls.w1);
                acc.ss2.add(ls.s * ls.s);
                if ls.s.abs() > threshold {
                    acc.g += 1;
                }
                acc.max_abs_s = acc.max_abs_s.max(ls.s.abs());
                if let Some(rows) = &mut acc.rows {
                    rows.push(PointSample {
                        nu: p.nu,
                        t: p.t.to_f64(),
                        s: ls.s,
                        w: ls.w,
                        w1: ls.w1,
                        s_star_mag: f64::hypot(ls.s, ls.s_sin),
                    });
                }
            }
            acc
        })
        .collect();

    let mut sw2 = CompensatedSum::new();
    let mut sw12 = CompensatedSum::new();
    let mut sww1 = CompensatedSum::new();
    let mut ss2 = CompensatedSum::new();
    let mut g_count = 0u64;
    let mut max_abs_s = 0.0f64;
    let mut rows = opts.collect_points.then(Vec::new);
    for acc in accums {
        sw2.merge(acc.sw2);
        sw12.merge(acc.sw12);
        sww1.merge(acc.sww1);
        ss2.merge(acc.ss2);
        g_count += acc.g;
        max_abs_s = max_abs_s.max(acc.max_abs_s);
        if let (Some(all), Some(part)) = (&mut rows, acc.rows) {
            all.extend(part);
        }
    }

    let q0 = interval.q0() as u64;
    let t = params.t_start;
    let k = params.k;
    let ln_ratio = (t / (2.0 * std::f64::consts::PI)).ln();
    let ln_t = t.ln();
    let sqrt_t = t.sqrt();
    let pred_lemma_a = u_used * ln_ratio / (4.0 * std::f64::consts::PI * k);
    let pred_lemma_b = u_used * ln_ratio / (48.0 * std::f64::consts::PI * k.powi(3));
    let pred_mean_value = params.p0 / (2.0 * k);
    let theorem_denominator = t.powf(1.0 / 6.0) / k * params.psi * ln_t * ln_t;
    let sum_w_sq = sw2.value();
    let sum_w1_sq = sw12.value();
    let sum_s_sq = ss2.value();

    let ratios = MomentRatios {
        lemma_a: sum_w_sq / pred_lemma_a,
        lemma_b: sum_w1_sq / pred_lemma_b,
        mean_value: sum_s_sq / q0 as f64 / pred_mean_value,
        lemma_a_err_shape: (sum_w_sq - pred_lemma_a).abs() * k / (sqrt_t * ln_t * ln_t),
        lemma_b_err_shape: (sum_w1_sq - pred_lemma_b).abs() * k.powi(3) / (sqrt_t * ln_t * ln_t),
        theorem: g_count as f64 / theorem_denominator,
        sup_bound: max_abs_s / (params.p0.sqrt() * t.powf(1.0 / 6.0)),
    };

    let report = MomentReport {
        t_start: t,
        psi: params.psi,
        k,
        u: params.u,
        u_used,
        p0: params.p0,
        relaxed: params.relaxed,
        range_count: tab.count(),
        q0,
        g_count,
        q2: q0 - g_count,
        threshold,
        sum_w_sq,
        sum_w1_sq,
        sum_w_w1: sww1.value(),
        sum_s_sq,
        max_abs_s,
        q0_predicted: q0_main_term(t, u_used),
        pred_lemma_a,
        pred_lemma_b,
        pred_mean_value,
        theorem_denominator,
        ratios,
    };
    Ok(MomentRun { report, points: rows })
}

/// Q0-normalized moments `(m_w, m_w1, m_cross)`; the asymptotic targets
/// are `1/(2K)`, `1/(24K^3)` and `O(1/K^2)`.
pub fn normalized_moments(report: &MomentReport) -> Result<(f64, f64, f64), MomentError> {
    if report.q0 == 0 {
        return Err(MomentError::ZeroQ0);
    }
    let q = report.q0 as f64;
    Ok((report.sum_w_sq / q, report.sum_w1_sq / q, report.sum_w_w1 / q))
}

/// The theorem-scale comparison. `ratio` carries no pass/fail meaning on
/// its own: the theorem's constant A is unspecified, so only positivity
/// and trends across a T-sweep are checked.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TheoremReport {
    pub g_count: u64,
    /// T^{1/6} K^{-1} psi ln^2 T.
    pub lower_scale: f64,
    /// g_count / lower_scale.
    pub ratio: f64,
    /// Q0 T^{-1/3} K^{-1} / 12, the right-hand shape of the count
    /// inequality the theorem rests on.
    pub q0_shape_rhs: f64,
}

pub fn theorem_report(report: &MomentReport) -> TheoremReport {
    let t = report.t_start;
    TheoremReport {
        g_count: report.g_count,
        lower_scale: report.theorem_denominator,
        ratio: report.g_count as f64 / report.theorem_denominator,
        q0_shape_rhs: report.q0 as f64 * t.powf(-1.0 / 3.0) / (12.0 * report.k),
    }
}

/// max |S| normalized by the a-priori scale `sqrt(P0) T^{1/6}`.
pub fn sup_bound_check(values: &[f64], params: &ExperimentParams) -> Result<f64, MomentError> {
    if values.is_empty() {
        return Err(MomentError::EmptyInput);
    }
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(max / (params.p0.sqrt() * params.t_start.powf(1.0 / 6.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_params, PsiSpec};

    fn small_run(collect: bool) -> MomentRun {
        let params = validate_params(1e6, PsiSpec::LogLog, (1e6f64).ln().ln(), false).unwrap();
        let opts = MomentOptions { u_cap: Some(40.0), collect_points: collect, ..Default::default() };
        moments_over_gram(&params, &opts).unwrap()
    }

    #[test]
    fn threshold_arithmetic() {
        assert_eq!(exceedance_threshold(1000.0, 10.0), 5.0);
    }

    #[test]
    fn empty_interval_is_an_error() {
        let params = validate_params(1e6, PsiSpec::LogLog, 3.0, false).unwrap();
        let opts = MomentOptions { u_cap: Some(0.0), ..Default::default() };
        assert!(matches!(
            moments_over_gram(&params, &opts),
            Err(MomentError::EmptyGramInterval { .. })
        ));
    }

    #[test]
    fn small_window_aggregates_consistently() {
        let run = small_run(true);
        let r = &run.report;
        assert!(r.q0 > 0);
        assert_eq!(r.q2, r.q0 - r.g_count);
        assert!(r.sum_w_sq >= 0.0 && r.sum_w1_sq >= 0.0 && r.sum_s_sq >= 0.0);
        // Schwarz inequality on the accumulated sums.
        assert!(r.sum_w_w1 * r.sum_w_w1 <= r.sum_w_sq * r.sum_w1_sq);
        // Recount g from the per-point rows: same against |S| and |-S|.
        let rows = run.points.as_ref().unwrap();
        assert_eq!(rows.len(), r.q0 as usize);
        let g1 = rows.iter().filter(|p| p.s.abs() > r.threshold).count() as u64;
        let g2 = rows.iter().filter(|p| (-p.s).abs() > r.threshold).count() as u64;
        assert_eq!(g1, r.g_count);
        assert_eq!(g2, r.g_count);
        for p in rows {
            assert!(p.s_star_mag >= p.s.abs());
        }
        // u_used is the cap, u is the full window.
        assert_eq!(r.u_used, 40.0);
        assert!(r.u > 36000.0);
    }

    #[test]
    fn deterministic_across_pool_sizes() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| small_run(false))
        };
        let a = run(1);
        let b = run(4);
        // Debug formatting round-trips f64 exactly, so equal strings mean
        // bit-identical reports.
        assert_eq!(format!("{:?}", a.report), format!("{:?}", b.report));
    }

    #[test]
    fn normalized_moments_and_zero_guard() {
        let run = small_run(false);
        let (m_w, m_w1, m_cross) = normalized_moments(&run.report).unwrap();
        assert!(m_w > 0.0 && m_w1 > 0.0);
        assert!(m_cross.abs() <= (m_w * m_w1).sqrt());

        let mut zero = run.report;
        zero.sum_w_sq = 0.0;
        zero.sum_w1_sq = 0.0;
        zero.sum_w_w1 = 0.0;
        assert_eq!(normalized_moments(&zero).unwrap(), (0.0, 0.0, 0.0));
        zero.q0 = 0;
        assert!(matches!(normalized_moments(&zero), Err(MomentError::ZeroQ0)));
    }

    #[test]
    fn theorem_report_example() {
        // T = 1e6, K = psi = 2.626: scale = 10 * (1/2.626) * 2.626 * ln^2(1e6).
        let run = small_run(false);
        let mut r = run.report;
        r.t_start = 1e6;
        r.k = 2.626;
        r.psi = 2.626;
        r.theorem_denominator = 1e6f64.powf(1.0 / 6.0) / 2.626 * 2.626 * (1e6f64).ln().powi(2);
        let tr = theorem_report(&r);
        assert!((tr.lower_scale - 1908.68).abs() < 0.5);
        assert!(tr.ratio >= 0.0);
        r.g_count = 0;
        assert_eq!(theorem_report(&r).ratio, 0.0);
    }

    #[test]
    fn sup_bound_examples() {
        let params = validate_params(1e6, PsiSpec::LogLog, 3.0, false).unwrap();
        assert!(matches!(sup_bound_check(&[], &params), Err(MomentError::EmptyInput)));
        assert_eq!(sup_bound_check(&[0.0, 0.0], &params).unwrap(), 0.0);
        // Synthetic t = 0 value: S = count, normalized by sqrt(P0) T^{1/6}.
        let count = 126.0;
        let want = count / (params.p0.sqrt() * 1e6f64.powf(1.0 / 6.0));
        assert_eq!(sup_bound_check(&[count], &params).unwrap(), want);
    }
}
