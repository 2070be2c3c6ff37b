//! Brute-force double-double evaluation of every kernel sum.
//!
//! This is the reference side of the oracle-equivalence checks. It stays
//! deliberately naive and separate from the production path in the
//! `shortsum` crate: phases are full unreduced products `t * ln n`, the
//! cosine is the double-double one (its own pi/2 reduction, not the
//! production 2pi route), pair phases use `ln` of the exact ratio and the
//! exact product rather than sums of per-n logs, and accumulation is plain
//! double-double addition instead of compensated f64.

use shortsum::dd::Dd;
use shortsum::kernels::NRange;

/// All sums of one instance, brute-forced in double-double.
#[derive(Clone, Copy, Debug, Default)]
pub struct BruteSums {
    pub s: f64,
    pub s_star_mag: f64,
    pub w: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub diag_cos: f64,
    pub harmonic: f64,
}

/// Evaluates every sum over the range by direct summation. Quadratic in
/// the term count; intended for counts up to ~1e3.
pub fn brute_sums(t: Dd, range: &NRange, p0: f64) -> BruteSums {
    let rsqrt_p0 = Dd::from(p0).sqrt().recip();
    let mut s = Dd::ZERO;
    let mut s_im = Dd::ZERO;
    let mut w = Dd::ZERO;
    let mut w1 = Dd::ZERO;
    let mut diag = Dd::ZERO;
    let mut harm = Dd::ZERO;
    for n in range.iter() {
        let nd = Dd::from(n);
        let (sin, cos) = (t * nd.ln()).sin_cos();
        let rsqrt = nd.sqrt().recip();
        s += cos;
        s_im += sin;
        w += rsqrt * cos;
        w1 += (rsqrt - rsqrt_p0) * cos;
        diag += (t * nd.ln()).mul_pwr2(2.0).cos() / nd;
        harm += nd.recip();
    }
    let mut w2 = Dd::ZERO;
    let mut w3 = Dd::ZERO;
    for n in range.iter() {
        for m in range.iter().take_while(|&m| m < n) {
            // n*m stays exact in f64 for the sizes this oracle accepts.
            let prod = Dd::from(n * m);
            let ratio = Dd::from(n) / Dd::from(m);
            let rs = prod.sqrt().recip();
            w2 += rs * (t * ratio.ln()).cos();
            w3 += rs * (t * prod.ln()).cos();
        }
    }
    BruteSums {
        s: s.to_f64(),
        s_star_mag: (s.sqr() + s_im.sqr()).sqrt().to_f64(),
        w: w.to_f64(),
        w1: w1.to_f64(),
        w2: w2.to_f64(),
        w3: w3.to_f64(),
        diag_cos: diag.to_f64(),
        harmonic: harm.to_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use shortsum::kernels::n_range;

    #[test]
    fn matches_frozen_mpmath_instance() {
        // Instance A: t = 1e6, P0 = 1000, K = 10 (60-digit mpmath).
        let r = n_range(1000.0, 10.0);
        let b = brute_sums(Dd::from(1e6), &r, 1000.0);
        assert!((b.s - -9.66990491992464).abs() < 1e-12);
        assert!((b.s_star_mag - 11.148915051441966).abs() < 1e-12);
        assert!((b.w - -0.31602551547793256).abs() < 1e-13);
        assert!((b.w1 - -0.010236272435632656).abs() < 1e-13);
        assert!((b.w2 - 0.016742789947083385).abs() < 1e-13);
        assert!((b.w3 - 0.02970046392531396).abs() < 1e-13);
        assert!((b.diag_cos - 0.006984905237676562).abs() < 1e-13);
        assert!((b.harmonic - 0.09987283988371473).abs() < 1e-14);
    }

    #[test]
    fn empty_range_is_all_zero() {
        let r = n_range(5.5, 100.0);
        let b = brute_sums(Dd::from(1e7), &r, 5.5);
        assert_eq!(b.s, 0.0);
        assert_eq!(b.w2, 0.0);
        assert_eq!(b.harmonic, 0.0);
    }
}
