//! The short trigonometric sums over `n` in `(e^{-1/K} P0, P0)` and the
//! exact quadratic identities between them.
//!
//! Phase discipline: for every `n` in the range, `ln n` is prepared once
//! in double-double, the product `t * ln n` is formed in double-double and
//! reduced mod 2pi, and only the reduced phase drops to `f64`. At
//! `t ~ 1e8` a naively rounded `t * ln n` would already cost ~1e-7 rad,
//! which the 1e-9 oracle-equivalence budget cannot absorb.
//!
//! All accumulation is compensated; the quadratic pair passes run over
//! fixed-size blocks merged in index order, so results do not depend on
//! the number of worker threads.

use crate::accum::CompensatedSum;
use crate::dd::{two_prod, Dd};
use rayon::prelude::*;
use thiserror::Error;

/// Default cap on the term count a quadratic (pair) operation accepts.
pub const DEFAULT_COUNT_CAP: u64 = 10_000;

/// Outer-index block size for the parallel pair passes.
const PAIR_BLOCK: usize = 128;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("range has {count} terms, above the quadratic cap {cap}; use the identity route instead")]
    PairCapExceeded { count: u64, cap: u64 },
}

/// The integer summation range `e^{-1/K} P0 < n < P0`, endpoints strict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NRange {
    /// Lower endpoint `e^{-1/K} P0` (excluded).
    pub lo: f64,
    /// Upper endpoint `P0` (excluded).
    pub hi: f64,
    /// Smallest integer strictly above `lo`.
    pub n_min: u64,
    /// Largest integer strictly below `hi` (0 when the range is empty).
    pub n_max: u64,
}

impl NRange {
    pub fn count(&self) -> u64 {
        if self.n_max >= self.n_min {
            self.n_max - self.n_min + 1
        } else {
            0
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_max < self.n_min
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        if self.is_empty() {
            1..=0
        } else {
            self.n_min..=self.n_max
        }
    }
}

/// Builds the summation range for given `P0 > 0`, `K > 0`.
pub fn n_range(p0: f64, k: f64) -> NRange {
    debug_assert!(p0 > 0.0 && k > 0.0);
    let lo = (-1.0 / k).exp() * p0;
    let hi = p0;
    // Smallest integer > lo: floor(lo) + 1 covers both the integral and
    // fractional cases of the strict inequality.
    let n_min = (lo.floor() as i64 + 1).max(1) as u64;
    // Largest integer < hi.
    let n_max_signed = hi.ceil() as i64 - 1;
    let n_max = n_max_signed.max(0) as u64;
    NRange { lo, hi, n_min, n_max }
}

/// Per-`n` tables for one range: double-double `ln n` plus the f64 weights
/// used by the sums. Build once, evaluate at many abscissas.
#[derive(Clone, Debug)]
pub struct RangeTable {
    range: NRange,
    p0: f64,
    k: f64,
    ln_n: Vec<Dd>,
    /// 1/sqrt(n)
    rsqrt: Vec<f64>,
    /// 1/n
    inv_n: Vec<f64>,
    /// alpha(n) = 1 - sqrt(n/P0)
    alpha: Vec<f64>,
    /// 1/sqrt(n) - 1/sqrt(P0), the literal w1 weight
    w1_weight: Vec<f64>,
}

impl RangeTable {
    pub fn new(p0: f64, k: f64) -> RangeTable {
        let range = n_range(p0, k);
        let count = range.count() as usize;
        let mut ln_n = Vec::with_capacity(count);
        let mut rsqrt = Vec::with_capacity(count);
        let mut inv_n = Vec::with_capacity(count);
        let mut alpha = Vec::with_capacity(count);
        let mut w1_weight = Vec::with_capacity(count);
        let rsqrt_p0 = 1.0 / p0.sqrt();
        if !range.is_empty() {
            for n in range.n_min..=range.n_max {
                let nf = n as f64;
                ln_n.push(Dd::from(nf).ln());
                rsqrt.push(1.0 / nf.sqrt());
                inv_n.push(1.0 / nf);
                alpha.push(1.0 - (nf / p0).sqrt());
                w1_weight.push(1.0 / nf.sqrt() - rsqrt_p0);
            }
        }
        RangeTable { range, p0, k, ln_n, rsqrt, inv_n, alpha, w1_weight }
    }

    pub fn range(&self) -> &NRange {
        &self.range
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn count(&self) -> u64 {
        self.range.count()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Reduced phases `(t ln n) mod 2pi` for every `n` in the range.
    pub fn reduced_phases(&self, t: Dd) -> Vec<f64> {
        self.ln_n.iter().map(|&ln| (t * ln).rem_two_pi().to_f64()).collect()
    }
}

/// `(t * ln_n) mod 2pi` with the product formed through an error-free
/// two-product split, so the reduction sees the full 106-bit product.
pub fn phase_reduce(t: f64, ln_n: f64) -> f64 {
    let (p, e) = two_prod(t, ln_n);
    Dd::raw(p, e).rem_two_pi().to_f64()
}

/// All single-pass (linear) sums at one abscissa.
#[derive(Clone, Copy, Debug, Default)]
pub struct LinearSums {
    /// S = sum cos(t ln n)
    pub s: f64,
    /// sum sin(t ln n), the imaginary counterpart for |S*|
    pub s_sin: f64,
    /// w = sum cos(t ln n) / sqrt(n)
    pub w: f64,
    /// w1 = sum (1/sqrt(n) - 1/sqrt(P0)) cos(t ln n)
    pub w1: f64,
}

/// One fused pass producing S, the sine sum, w and w1.
pub fn linear_sums(t: Dd, tab: &RangeTable) -> LinearSums {
    let mut s = CompensatedSum::new();
    let mut s_sin = CompensatedSum::new();
    let mut w = CompensatedSum::new();
    let mut w1 = CompensatedSum::new();
    for (i, &ln) in tab.ln_n.iter().enumerate() {
        let phase = (t * ln).rem_two_pi().to_f64();
        let (sin, cos) = phase.sin_cos();
        s.add(cos);
        s_sin.add(sin);
        w.add(tab.rsqrt[i] * cos);
        w1.add(tab.w1_weight[i] * cos);
    }
    LinearSums { s: s.value(), s_sin: s_sin.value(), w: w.value(), w1: w1.value() }
}

/// S(t,T,K) = sum over the range of cos(t ln n).
pub fn sum_s(t: Dd, tab: &RangeTable) -> f64 {
    let mut acc = CompensatedSum::new();
    for &ln in &tab.ln_n {
        acc.add((t * ln).rem_two_pi().to_f64().cos());
    }
    acc.value()
}

/// |S*(t,T,K)| = |sum n^{it}|, the Euclidean magnitude of the full
/// exponential sum. Always >= |S|.
pub fn sum_s_star_mag(t: Dd, tab: &RangeTable) -> f64 {
    let ls = linear_sums(t, tab);
    f64::hypot(ls.s, ls.s_sin)
}

/// w(t,T,K) = sum cos(t ln n)/sqrt(n).
pub fn sum_w(t: Dd, tab: &RangeTable) -> f64 {
    let mut acc = CompensatedSum::new();
    for (i, &ln) in tab.ln_n.iter().enumerate() {
        acc.add(tab.rsqrt[i] * (t * ln).rem_two_pi().to_f64().cos());
    }
    acc.value()
}

/// w1(t,T,K) = sum (1/sqrt(n) - 1/sqrt(P0)) cos(t ln n).
pub fn sum_w1(t: Dd, tab: &RangeTable) -> f64 {
    let mut acc = CompensatedSum::new();
    for (i, &ln) in tab.ln_n.iter().enumerate() {
        acc.add(tab.w1_weight[i] * (t * ln).rem_two_pi().to_f64().cos());
    }
    acc.value()
}

/// Diagonal cosine sum `sum (1/n) cos(2 t ln n)`, without the 1/2 factor
/// (the decomposition applies it).
pub fn diag_cos(t: Dd, tab: &RangeTable) -> f64 {
    let mut acc = CompensatedSum::new();
    for (i, &ln) in tab.ln_n.iter().enumerate() {
        let p = (t * ln).rem_two_pi().to_f64();
        acc.add(tab.inv_n[i] * (2.0 * p).cos());
    }
    acc.value()
}

/// Harmonic sum `sum 1/n` over the range; ~1/K by Euler's formula.
pub fn harmonic_sum(tab: &RangeTable) -> f64 {
    let mut acc = CompensatedSum::new();
    for &v in &tab.inv_n {
        acc.add(v);
    }
    acc.value()
}

fn check_cap(tab: &RangeTable, cap: u64) -> Result<(), KernelError> {
    let count = tab.count();
    if count > cap {
        Err(KernelError::PairCapExceeded { count, cap })
    } else {
        Ok(())
    }
}

/// Both ordered-pair sums in one pass over m < n:
/// `sum wts_m wts_n cos(p_n - p_m)` and `sum wts_m wts_n cos(p_n + p_m)`.
///
/// Phases enter pre-reduced, so `p_n - p_m` and `p_n + p_m` agree with the
/// true pair phases modulo 2pi to within the reduction error.
fn pair_sums(phases: &[f64], wts: &[f64]) -> (f64, f64) {
    let blocks: Vec<(CompensatedSum, CompensatedSum)> = (0..phases.len().div_ceil(PAIR_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut diff = CompensatedSum::new();
            let mut sum = CompensatedSum::new();
            let end = ((b + 1) * PAIR_BLOCK).min(phases.len());
            for n in b * PAIR_BLOCK..end {
                let pn = phases[n];
                let wn = wts[n];
                for m in 0..n {
                    let wm = wn * wts[m];
                    diff.add(wm * (pn - phases[m]).cos());
                    sum.add(wm * (pn + phases[m]).cos());
                }
            }
            (diff, sum)
        })
        .collect();
    let mut diff = CompensatedSum::new();
    let mut sum = CompensatedSum::new();
    for (d, s) in blocks {
        diff.merge(d);
        sum.merge(s);
    }
    (diff.value(), sum.value())
}

/// w2 = sum over m < n of cos(t ln(n/m)) / sqrt(nm). Quadratic cost;
/// refuses ranges above `cap` terms.
pub fn double_sum_w2(t: Dd, tab: &RangeTable, cap: u64) -> Result<f64, KernelError> {
    check_cap(tab, cap)?;
    let phases = tab.reduced_phases(t);
    Ok(pair_sums(&phases, &tab.rsqrt).0)
}

/// w3 = sum over m < n of cos(t ln(nm)) / sqrt(nm). Quadratic cost.
pub fn double_sum_w3(t: Dd, tab: &RangeTable, cap: u64) -> Result<f64, KernelError> {
    check_cap(tab, cap)?;
    let phases = tab.reduced_phases(t);
    Ok(pair_sums(&phases, &tab.rsqrt).1)
}

/// The exact decomposition of w^2:
/// `w^2 = (1/2) sum 1/n + w2 + w3 + (1/2) sum (1/n) cos(2 t ln n)`.
#[derive(Clone, Copy, Debug)]
pub struct WSquaredDecomposition {
    pub w: f64,
    pub half_harmonic: f64,
    pub w2: f64,
    pub w3: f64,
    pub half_diag_cos: f64,
    /// w^2 minus the four parts.
    pub residual: f64,
}

pub fn decompose_w_squared(
    t: Dd,
    tab: &RangeTable,
    cap: u64,
) -> Result<WSquaredDecomposition, KernelError> {
    check_cap(tab, cap)?;
    let phases = tab.reduced_phases(t);
    let mut w_acc = CompensatedSum::new();
    let mut diag = CompensatedSum::new();
    for (i, &p) in phases.iter().enumerate() {
        w_acc.add(tab.rsqrt[i] * p.cos());
        diag.add(tab.inv_n[i] * (2.0 * p).cos());
    }
    let w = w_acc.value();
    let (w2, w3) = pair_sums(&phases, &tab.rsqrt);
    let half_harmonic = 0.5 * harmonic_sum(tab);
    let half_diag_cos = 0.5 * diag.value();
    let residual = w * w - (half_harmonic + w2 + w3 + half_diag_cos);
    Ok(WSquaredDecomposition { w, half_harmonic, w2, w3, half_diag_cos, residual })
}

/// The alpha-weighted analogue for w1^2:
/// `w1^2 = (1/2) sum a^2/n + wbar2 + wbar3 + (1/2) sum (a^2/n) cos(2 t ln n)`
/// with `a = alpha(n) = 1 - sqrt(n/P0)`.
#[derive(Clone, Copy, Debug)]
pub struct W1SquaredDecomposition {
    pub w1: f64,
    pub half_wbar1: f64,
    pub wbar2: f64,
    pub wbar3: f64,
    pub half_wbar4: f64,
    pub residual: f64,
}

pub fn decompose_w1_squared(
    t: Dd,
    tab: &RangeTable,
    cap: u64,
) -> Result<W1SquaredDecomposition, KernelError> {
    check_cap(tab, cap)?;
    let phases = tab.reduced_phases(t);
    let abar: Vec<f64> = tab
        .alpha
        .iter()
        .zip(&tab.rsqrt)
        .map(|(&a, &r)| a * r)
        .collect();
    let mut w1_acc = CompensatedSum::new();
    let mut bar1 = CompensatedSum::new();
    let mut bar4 = CompensatedSum::new();
    for (i, &p) in phases.iter().enumerate() {
        let a2n = tab.alpha[i] * tab.alpha[i] * tab.inv_n[i];
        w1_acc.add(abar[i] * p.cos());
        bar1.add(a2n);
        bar4.add(a2n * (2.0 * p).cos());
    }
    let w1 = w1_acc.value();
    let (wbar2, wbar3) = pair_sums(&phases, &abar);
    let half_wbar1 = 0.5 * bar1.value();
    let half_wbar4 = 0.5 * bar4.value();
    let residual = w1 * w1 - (half_wbar1 + wbar2 + wbar3 + half_wbar4);
    Ok(W1SquaredDecomposition { w1, half_wbar1, wbar2, wbar3, half_wbar4, residual })
}

/// Closed form of `int alpha^2(x)/x dx` over the range, with its K->inf
/// main term `1/(12 K^3)`.
///
/// The substitution `y = x/P0` removes P0 from the integral, so only K
/// enters. Evaluated through expm1 to survive the three-way cancellation
/// at large K.
#[derive(Clone, Copy, Debug)]
pub struct Wbar1ClosedForm {
    /// `1/K - 4(1 - e^{-1/(2K)}) + 1 - e^{-1/K}`, exactly as written.
    pub integral: f64,
    /// `1/(12 K^3)`.
    pub main_term: f64,
}

pub fn wbar1_closed_form(k: f64) -> Wbar1ClosedForm {
    let integral = 1.0 / k + 4.0 * (-0.5 / k).exp_m1() - (-1.0 / k).exp_m1();
    let main_term = 1.0 / (12.0 * k * k * k);
    Wbar1ClosedForm { integral, main_term }
}

/// Every per-point sum needed by the CLI `sum` command.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct SumValues {
    pub s: f64,
    pub s_star_mag: f64,
    pub w: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub diag_cos: f64,
    pub harmonic: f64,
}

impl SumValues {
    pub fn evaluate(t: Dd, tab: &RangeTable, cap: u64) -> Result<SumValues, KernelError> {
        check_cap(tab, cap)?;
        let ls = linear_sums(t, tab);
        let phases = tab.reduced_phases(t);
        let (w2, w3) = pair_sums(&phases, &tab.rsqrt);
        Ok(SumValues {
            s: ls.s,
            s_star_mag: f64::hypot(ls.s, ls.s_sin),
            w: ls.w,
            w1: ls.w1,
            w2,
            w3,
            diag_cos: diag_cos(t, tab),
            harmonic: harmonic_sum(tab),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // mpmath (60 digits), instance A: t = 1e6, P0 = 1000, K = 10,
    // range 905..=999 (95 terms).
    const A_T: f64 = 1e6;
    const A_S: f64 = -9.66990491992464;
    const A_S_STAR: f64 = 11.148915051441966;
    const A_W: f64 = -0.31602551547793256;
    const A_W1: f64 = -0.010236272435632656;
    const A_W2: f64 = 0.016742789947083385;
    const A_W3: f64 = 0.02970046392531396;
    const A_DIAG: f64 = 0.006984905237676562;
    const A_HARMONIC: f64 = 0.09987283988371473;

    fn table_a() -> RangeTable {
        RangeTable::new(1000.0, 10.0)
    }

    #[test]
    fn n_range_examples() {
        let r = n_range(1000.0, 10.0);
        assert!((r.lo - 904.8374180359596).abs() < 1e-9);
        assert_eq!((r.n_min, r.n_max, r.count()), (905, 999, 95));

        // Strict upper endpoint: integral P0 is excluded.
        assert_eq!(n_range(1000.0, 10.0).n_max, 999);

        // P0 = 5.5 boundary behavior.
        let r = n_range(5.5, 100.0); // lo ~ 5.445
        assert_eq!(r.count(), 0);
        let r = n_range(5.5, 10.0); // lo ~ 4.98
        assert_eq!((r.n_min, r.n_max, r.count()), (5, 5, 1));
    }

    #[test]
    fn count_tracks_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p0 = rng.gen_range(2.0..5e5f64);
            let k = rng.gen_range(0.5..60.0f64);
            let r = n_range(p0, k);
            let width = p0 * (1.0 - (-1.0 / k).exp());
            assert!(
                (r.count() as f64 - width).abs() <= 1.0,
                "p0={p0} k={k}: count {} vs width {width}",
                r.count()
            );
        }
    }

    #[test]
    fn alpha_stays_inside_open_interval() {
        for (p0, k) in [(1000.0, 10.0), (398.94, 2.6), (1e5, 30.0)] {
            let tab = RangeTable::new(p0, k);
            for &a in tab.alpha() {
                assert!(a > 0.0 && a < 1.0 / k, "alpha {a} outside (0, 1/{k})");
            }
        }
    }

    #[test]
    fn linear_sums_match_mpmath_instance_a() {
        let tab = table_a();
        let t = Dd::from(A_T);
        assert!((sum_s(t, &tab) - A_S).abs() < 1e-9);
        assert!((sum_s_star_mag(t, &tab) - A_S_STAR).abs() < 1e-9);
        assert!((sum_w(t, &tab) - A_W).abs() < 1e-9);
        assert!((sum_w1(t, &tab) - A_W1).abs() < 1e-9);
        assert!((diag_cos(t, &tab) - A_DIAG).abs() < 1e-9);
        assert!((harmonic_sum(&tab) - A_HARMONIC).abs() < 1e-12);
    }

    #[test]
    fn pair_sums_match_mpmath_instance_a() {
        let tab = table_a();
        let t = Dd::from(A_T);
        assert!((double_sum_w2(t, &tab, DEFAULT_COUNT_CAP).unwrap() - A_W2).abs() < 1e-9);
        assert!((double_sum_w3(t, &tab, DEFAULT_COUNT_CAP).unwrap() - A_W3).abs() < 1e-9);
    }

    #[test]
    fn instance_b_spot_values() {
        // mpmath, instance B: t = 123456.75, P0 = 400, K = 5, 328..=399.
        let tab = RangeTable::new(400.0, 5.0);
        assert_eq!((tab.range().n_min, tab.range().n_max), (328, 399));
        let t = Dd::from(123456.75);
        assert!((sum_s(t, &tab) - 0.07377861498886049).abs() < 1e-10);
        assert!((sum_w(t, &tab) - -0.003338878585732446).abs() < 1e-10);
        assert!((sum_w1(t, &tab) - -0.00702780933517547).abs() < 1e-10);
        assert!((double_sum_w2(t, &tab, 1000).unwrap() - -0.0765950428431427).abs() < 1e-10);
        assert!((double_sum_w3(t, &tab, 1000).unwrap() - -0.018013764754902597).abs() < 1e-10);
    }

    #[test]
    fn zero_abscissa_degenerates_to_weight_sums() {
        let tab = table_a();
        let t = Dd::ZERO;
        assert_eq!(sum_s(t, &tab), 95.0);
        assert_eq!(sum_s_star_mag(t, &tab), 95.0);
        assert!(sum_w(t, &tab) > 0.0);
        assert!(sum_w1(t, &tab) > 0.0);
        assert_eq!(diag_cos(t, &tab), harmonic_sum(&tab));
        // w2 = w3 = sum over pairs of 1/sqrt(nm) = ((sum 1/sqrt n)^2 - sum 1/n)/2.
        let sr: f64 = (905..=999u64).map(|n| 1.0 / (n as f64).sqrt()).sum();
        let want = (sr * sr - harmonic_sum(&tab)) / 2.0;
        assert!((double_sum_w2(t, &tab, 1000).unwrap() - want).abs() < 1e-10);
        assert!((double_sum_w3(t, &tab, 1000).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn empty_range_sums_are_zero() {
        let tab = RangeTable::new(5.5, 100.0);
        assert_eq!(tab.count(), 0);
        let t = Dd::from(1e6);
        assert_eq!(sum_s(t, &tab), 0.0);
        assert_eq!(sum_s_star_mag(t, &tab), 0.0);
        assert_eq!(sum_w(t, &tab), 0.0);
        assert_eq!(sum_w1(t, &tab), 0.0);
        assert_eq!(double_sum_w2(t, &tab, 10).unwrap(), 0.0);
        let d = decompose_w_squared(t, &tab, 10).unwrap();
        assert_eq!(
            (d.w, d.half_harmonic, d.w2, d.w3, d.half_diag_cos, d.residual),
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn star_magnitude_dominates_real_part() {
        let tab = table_a();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let t = Dd::from(rng.gen_range(0.0..1e9f64));
            let s = sum_s(t, &tab);
            assert!(sum_s_star_mag(t, &tab) >= s.abs());
        }
    }

    #[test]
    fn identity_2_9_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let p0 = rng.gen_range(50.0..5e4f64);
            let k = rng.gen_range(2.2..40.0f64);
            let tab = RangeTable::new(p0, k);
            let t = Dd::from(rng.gen_range(1e4..1e9f64));
            let s = sum_s(t, &tab);
            let w = sum_w(t, &tab);
            let w1 = sum_w1(t, &tab);
            let lhs = w - (s / p0.sqrt() + w1);
            let scale = w.abs().max((s / p0.sqrt()).abs()).max(w1.abs()).max(1e-300);
            assert!(
                lhs.abs() <= 1e-10 * scale,
                "p0={p0} k={k}: residual {lhs} vs scale {scale}"
            );
        }
    }

    #[test]
    fn decomposition_identities_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..60 {
            let p0 = rng.gen_range(100.0..3e3f64);
            let k = rng.gen_range(2.2..20.0f64);
            let tab = RangeTable::new(p0, k);
            let t = Dd::from(rng.gen_range(1e6..1e7f64));
            let d = decompose_w_squared(t, &tab, DEFAULT_COUNT_CAP).unwrap();
            assert!(
                d.residual.abs() <= 1e-9 * (d.w * d.w).max(1.0),
                "(6.1) residual {}",
                d.residual
            );
            let d1 = decompose_w1_squared(t, &tab, DEFAULT_COUNT_CAP).unwrap();
            assert!(
                d1.residual.abs() <= 1e-9 * (d1.w1 * d1.w1).max(1.0),
                "(6.3) residual {}",
                d1.residual
            );
        }
    }

    #[test]
    fn decomposition_at_zero_abscissa_is_square_of_sum() {
        let tab = table_a();
        let d = decompose_w_squared(Dd::ZERO, &tab, 1000).unwrap();
        assert!(d.residual.abs() < 1e-12);
        let d1 = decompose_w1_squared(Dd::ZERO, &tab, 1000).unwrap();
        assert!(d1.residual.abs() < 1e-14);
    }

    #[test]
    fn pair_cap_is_enforced() {
        let tab = table_a();
        match double_sum_w2(Dd::ONE, &tab, 10) {
            Err(KernelError::PairCapExceeded { count: 95, cap: 10 }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
        assert!(decompose_w1_squared(Dd::ONE, &tab, 10).is_err());
        assert!(SumValues::evaluate(Dd::ONE, &tab, 10).is_err());
    }

    #[test]
    fn closed_form_values() {
        // mpmath: K = 10 -> 8.027996689646320e-5; main 8.3333...e-5.
        let cf = wbar1_closed_form(10.0);
        assert!((cf.integral - 8.02799668964632e-5).abs() < 1e-17);
        assert!((cf.main_term - 8.333333333333333e-5).abs() < 1e-19);
        // Taylor remainder: |integral - main| * K^4 -> 1/32.
        for k in [5.0, 10.0, 50.0, 100.0] {
            let cf = wbar1_closed_form(k);
            let scaled = (cf.integral - cf.main_term).abs() * k.powi(4);
            assert!(scaled <= 1.0, "K={k}: {scaled}");
        }
        // Large K: relative gap <= 10/K.
        for k in [1e3, 1e4] {
            let cf = wbar1_closed_form(k);
            let rel = (cf.integral - cf.main_term).abs() / cf.main_term;
            assert!(rel <= 10.0 / k, "K={k}: rel {rel}");
        }
    }

    #[test]
    fn discrete_sum_approaches_integral() {
        // (1/2) sum alpha^2/n vs (1/2) integral, within 5/P0 at P0 = 1e4.
        let p0 = 1e4;
        let k = 10.0;
        let tab = RangeTable::new(p0, k);
        let half_disc = 0.5
            * tab
                .alpha
                .iter()
                .zip(&tab.inv_n)
                .map(|(&a, &inv)| a * a * inv)
                .sum::<f64>();
        let half_int = 0.5 * wbar1_closed_form(k).integral;
        assert!(
            (half_disc - half_int).abs() <= 5.0 / p0,
            "disc {half_disc} vs int {half_int}"
        );
    }

    #[test]
    fn harmonic_close_to_inv_k() {
        let tab = table_a();
        let h = harmonic_sum(&tab);
        assert!((h - 0.1).abs() / 0.1 < 0.02);
        for (p0, k) in [(1e4, 5.0), (5e4, 12.0)] {
            let tab = RangeTable::new(p0, k);
            let h = harmonic_sum(&tab);
            assert!(
                (h - 1.0 / k).abs() * k <= 4.0 * k / p0,
                "p0={p0} k={k}: h={h}"
            );
        }
    }

    #[test]
    fn phase_reduce_examples() {
        assert_eq!(phase_reduce(0.0, 5.0), 0.0);
        // mpmath: (1e9 * fl(ln 31623)) mod 2pi
        let got = phase_reduce(1e9, 31623f64.ln());
        assert!((got - 5.157646551896479).abs() < 1e-12);
        let got = phase_reduce(1e10, 40000f64.ln());
        assert!((got - 0.7230035307034104).abs() < 1e-12);
        // Constructed near-multiple of 2pi: fl(4pi) * 0.5.
        let got = phase_reduce(4.0 * std::f64::consts::PI, 0.5);
        let wrap = got.min(2.0 * std::f64::consts::PI - got);
        assert!(wrap < 1e-12);
        // Phases stay in [0, 2pi).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let p = phase_reduce(rng.gen_range(0.0..1e10), rng.gen_range(0.0..20.0));
            assert!((0.0..2.0 * std::f64::consts::PI).contains(&p));
        }
    }

    #[test]
    fn sum_values_bundle() {
        let tab = table_a();
        let v = SumValues::evaluate(Dd::from(A_T), &tab, DEFAULT_COUNT_CAP).unwrap();
        assert!((v.s - A_S).abs() < 1e-9);
        assert!((v.w2 - A_W2).abs() < 1e-9);
        assert!((v.harmonic - A_HARMONIC).abs() < 1e-12);
        assert!(v.s_star_mag >= v.s.abs());
    }
}
