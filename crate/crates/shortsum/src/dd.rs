//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! with `|lo| <= ulp(hi)/2`, giving roughly 106 significand bits.
//!
//! Abscissas around `T ~ 1e8` push theta values past 1e9, where a single
//! `f64` cannot hold a phase to the 1e-9 radians the Gram residuals need,
//! so every phase-critical path in this crate runs on [`Dd`].
//!
//! The building blocks are the classic error-free transformations
//! (Knuth two-sum, FMA two-product); the transcendentals use argument
//! reduction against double-double constants plus Taylor tails, with one
//! or two Newton corrections where a seed from `std` is available.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// `a + b` as a rounded sum and exact error term, for any inputs.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    (s, e)
}

/// `a + b` assuming `|a| >= |b|` (or a = 0).
#[inline]
pub(crate) fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// `a * b` as a rounded product and exact error term.
#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = f64::mul_add(a, b, -p);
    (p, e)
}

/// Double-double number.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

impl std::fmt::Debug for Dd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Dd({:?} + {:?})", self.hi, self.lo)
    }
}

impl std::fmt::Display for Dd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Display::fmt(&self.hi, f)
    }
}

impl From<f64> for Dd {
    #[inline]
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl From<u64> for Dd {
    #[inline]
    fn from(n: u64) -> Self {
        debug_assert!(n < (1u64 << 53), "u64 -> Dd exact only below 2^53");
        Dd { hi: n as f64, lo: 0.0 }
    }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub const PI: Dd = Dd::raw(3.141592653589793, 1.2246467991473532e-16);
    pub const TWO_PI: Dd = Dd::raw(6.283185307179586, 2.4492935982947064e-16);
    pub const HALF_PI: Dd = Dd::raw(1.5707963267948966, 6.123233995736766e-17);
    pub const PI_OVER_8: Dd = Dd::raw(0.39269908169872414, 1.5308084989341915e-17);
    pub const INV_TWO_PI: Dd = Dd::raw(0.15915494309189535, -9.839338337591243e-18);
    pub const LN_2PI: Dd = Dd::raw(1.8378770664093456, -7.756588316134483e-17);
    pub const LN_PI: Dd = Dd::raw(1.1447298858494002, 1.0265951162707826e-17);
    pub const LN_2: Dd = Dd::raw(0.6931471805599453, 2.3190468138462996e-17);

    /// Constructs from parts verbatim. The caller promises the pair is
    /// already normalized (`lo` no larger than half an ulp of `hi`).
    #[inline]
    pub const fn raw(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    /// Constructs from an arbitrary pair, renormalizing.
    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Nearest f64 (the high word, by the normalization invariant).
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    /// Exact scaling by a power of two.
    #[inline]
    pub fn mul_pwr2(self, k: f64) -> Dd {
        debug_assert!(k.abs().log2().fract() == 0.0);
        Dd { hi: self.hi * k, lo: self.lo * k }
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        let (p, mut e) = two_prod(self.hi, self.hi);
        e += 2.0 * self.hi * self.lo;
        e += self.lo * self.lo;
        let (s, lo) = quick_two_sum(p, e);
        Dd { hi: s, lo }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn floor(self) -> Dd {
        let f = self.hi.floor();
        if f == self.hi {
            // High word already integral; the low word decides.
            let g = self.lo.floor();
            let (s, e) = quick_two_sum(f, g);
            Dd { hi: s, lo: e }
        } else {
            Dd { hi: f, lo: 0.0 }
        }
    }

    pub fn ceil(self) -> Dd {
        let c = self.hi.ceil();
        if c == self.hi {
            let g = self.lo.ceil();
            let (s, e) = quick_two_sum(c, g);
            Dd { hi: s, lo: e }
        } else {
            Dd { hi: c, lo: 0.0 }
        }
    }

    /// Nearest integer, ties away from zero (inherited from `f64::round`).
    pub fn round(self) -> Dd {
        let r = self.hi.round();
        if (r - self.hi).abs() == 0.5 {
            // The high word sits exactly on a half-integer: lo breaks the tie.
            let base = self.hi.floor();
            if self.lo > 0.0 {
                Dd { hi: base + 1.0, lo: 0.0 }
            } else if self.lo < 0.0 || self.hi < 0.0 {
                Dd { hi: base, lo: 0.0 }
            } else {
                Dd { hi: r, lo: 0.0 }
            }
        } else {
            Dd { hi: r, lo: 0.0 }
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ZERO;
        }
        debug_assert!(self.hi > 0.0, "sqrt of negative dd");
        // One Karp-Markstein style correction on the f64 seed:
        // y ~ 1/sqrt(x); s = x*y; e = (x - s^2)*y/2; result s + e.
        let y = 1.0 / self.hi.sqrt();
        let s = self.hi * y;
        let sd = Dd::from(s);
        let e = (self - sd.sqr()).hi * (y * 0.5);
        let (h, l) = quick_two_sum(s, e);
        Dd { hi: h, lo: l }
    }

    /// exp(self), valid for |self| < 700.
    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -709.0 {
            return Dd::ZERO;
        }
        // self = k ln2 + r with |r| <= ln2/2, then a Taylor tail on r.
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self - Dd::LN_2 * k;
        let mut sum = Dd::ONE + r;
        let mut term = r;
        let mut j = 2.0;
        loop {
            term = term * r / j;
            sum += term;
            if term.hi.abs() < 1e-35 || j > 30.0 {
                break;
            }
            j += 1.0;
        }
        // Scale by 2^k exactly.
        let scale = f64::powi(2.0, k as i32);
        Dd { hi: sum.hi * scale, lo: sum.lo * scale }
    }

    /// Natural logarithm, for self > 0.
    pub fn ln(self) -> Dd {
        debug_assert!(self.hi > 0.0, "ln of non-positive dd");
        // Newton on f(y) = exp(y) - x from the f64 seed; two passes land
        // on the double-double noise floor.
        let mut y = Dd::from(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }

    /// Reduces into [0, 2pi). Exact-integer multiples of the dd 2*pi
    /// constant land on 0. Intended for |self| up to ~1e12; beyond that
    /// the quotient rounding in f64 starts to bite.
    pub fn rem_two_pi(self) -> Dd {
        let q = (self.hi * Dd::INV_TWO_PI.hi).round();
        let mut r = self - Dd::TWO_PI * q;
        // One correction pass in case hi sat within rounding of a multiple.
        if r.hi < 0.0 {
            r += Dd::TWO_PI;
        } else if r >= Dd::TWO_PI {
            r -= Dd::TWO_PI;
        }
        if r.hi < 0.0 {
            r += Dd::TWO_PI;
        }
        r
    }

    /// Simultaneous sine and cosine.
    pub fn sin_cos(self) -> (Dd, Dd) {
        // Reduce mod 2pi, then to |r| <= pi/4 with quadrant bookkeeping.
        let x = self.rem_two_pi();
        let q = (x.hi / std::f64::consts::FRAC_PI_2).round();
        let r = x - Dd::HALF_PI * q;
        let (s, c) = sin_cos_taylor(r);
        match (q as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    pub fn cos(self) -> Dd {
        self.sin_cos().1
    }

    /// Four-quadrant arctangent refined from the f64 seed.
    pub fn atan2(y: Dd, x: Dd) -> Dd {
        if y.hi == 0.0 && y.lo == 0.0 {
            return if x.hi >= 0.0 { Dd::ZERO } else { Dd::PI };
        }
        let seed = f64::atan2(y.hi, x.hi);
        let (s0, c0) = Dd::from(seed).sin_cos();
        // tan(theta - seed) = (y c0 - x s0) / (x c0 + y s0); the ratio is
        // ~1e-16 so a cubic arctangent term closes the gap.
        let num = y * c0 - x * s0;
        let den = x * c0 + y * s0;
        let e = num / den;
        let corr = e - e * e * e / 3.0;
        Dd::from(seed) + corr
    }
}

/// Taylor sine and cosine on |r| <= pi/4 + eps.
fn sin_cos_taylor(r: Dd) -> (Dd, Dd) {
    let r2 = r.sqr();
    // sin
    let mut s = r;
    let mut term = r;
    let mut k = 1.0;
    loop {
        term = term * r2 / ((k + 1.0) * (k + 2.0));
        term = -term;
        s += term;
        k += 2.0;
        if term.hi.abs() < 1e-35 || k > 40.0 {
            break;
        }
    }
    // cos
    let mut c = Dd::ONE;
    let mut term = Dd::ONE;
    let mut k = 0.0;
    loop {
        term = term * r2 / ((k + 1.0) * (k + 2.0));
        term = -term;
        c += term;
        k += 2.0;
        if term.hi.abs() < 1e-35 || k > 40.0 {
            break;
        }
    }
    (s, c)
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s2, e2) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s2, e2 + f);
        Dd { hi, lo }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: f64) -> Dd {
        let (s, e) = two_sum(self.hi, rhs);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }
}

impl Add<Dd> for f64 {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        rhs + self
    }
}

impl AddAssign for Dd {
    #[inline]
    fn add_assign(&mut self, rhs: Dd) {
        *self = *self + rhs;
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: f64) -> Dd {
        self + (-rhs)
    }
}

impl Sub<Dd> for f64 {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        -rhs + self
    }
}

impl SubAssign for Dd {
    #[inline]
    fn sub_assign(&mut self, rhs: Dd) {
        *self = *self - rhs;
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, mut e) = two_prod(self.hi, rhs.hi);
        e += self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: f64) -> Dd {
        let (p, mut e) = two_prod(self.hi, rhs);
        e += self.lo * rhs;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<Dd> for f64 {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        rhs * self
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        // Long division: two quotient corrections on the f64 seed.
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r2 = r - rhs * q2;
        let q3 = r2.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e } + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: f64) -> Dd {
        let q1 = self.hi / rhs;
        let (p, e) = two_prod(q1, rhs);
        let r = ((self.hi - p) + (self.lo - e)) / rhs;
        let (hi, lo) = quick_two_sum(q1, r);
        Dd { hi, lo }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl PartialEq<f64> for Dd {
    fn eq(&self, other: &f64) -> bool {
        self.hi == *other && self.lo == 0.0
    }
}

impl PartialOrd<f64> for Dd {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&Dd::from(*other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// |a - b| as f64, for assertions against decimal references.
    fn diff(a: Dd, b: Dd) -> f64 {
        (a - b).abs().to_f64()
    }

    // Reference values below were produced with mpmath at 60 digits and
    // split into hi/lo pairs.

    #[test]
    fn constants_are_normalized_and_close() {
        for c in [Dd::PI, Dd::TWO_PI, Dd::HALF_PI, Dd::PI_OVER_8, Dd::INV_TWO_PI, Dd::LN_2PI, Dd::LN_PI, Dd::LN_2] {
            let (s, e) = quick_two_sum(c.hi, c.lo);
            assert_eq!(s, c.hi);
            assert_eq!(e, c.lo);
        }
        assert!((Dd::PI.hi - std::f64::consts::PI).abs() == 0.0);
    }

    #[test]
    fn add_mul_roundtrip() {
        let a = Dd::from(1.0) / 3.0;
        let b = a * 3.0;
        assert!(diff(b, Dd::ONE) < 1e-31);
        let c = Dd::from(1e17) + 1.0 - Dd::from(1e17);
        assert_eq!(c.to_f64(), 1.0);
    }

    #[test]
    fn division_and_sqrt() {
        let x = Dd::from(2.0);
        let r = x.sqrt();
        // sqrt(2) = 1.41421356237309504880168872420969808
        let want = Dd::raw(1.4142135623730951, -9.667293313452913e-17);
        assert!(diff(r, want) < 1e-31);
        assert!(diff(r.sqr(), x) < 1e-31);
        let q = Dd::ONE / Dd::from(48.0);
        assert!(diff(q * 48.0, Dd::ONE) < 1e-31);
    }

    #[test]
    fn exp_matches_reference() {
        // exp(0.34375) with exactly representable argument
        let want = Dd::raw(1.4102260349257107, -4.1758810273684196e-17);
        assert!(diff(Dd::from(0.34375).exp(), want) < 1e-30);
        assert!(diff(Dd::ZERO.exp(), Dd::ONE) == 0.0);
    }

    #[test]
    fn ln_matches_reference() {
        // ln(999) and ln(31623)
        let want = Dd::raw(6.906754778648554, -3.977443381153687e-16);
        assert!(diff(Dd::from(999.0).ln(), want) < 1e-30);
        let want = Dd::raw(10.361639982923299, 3.1271671539529044e-16);
        assert!(diff(Dd::from(31623.0).ln(), want) < 1e-30);
        assert!(diff(Dd::ONE.ln(), Dd::ZERO) < 1e-32);
        // round-trip
        let x = Dd::from(12345.6789);
        assert!(diff(x.ln().exp(), x) < 1e-26);
    }

    #[test]
    fn sin_cos_small_and_large() {
        let (s, c) = Dd::from(1.5).sin_cos();
        let want_s = Dd::raw(0.9974949866040544, -1.4558643538840918e-17);
        let want_c = Dd::raw(0.0707372016677029, 3.683512075225569e-18);
        assert!(diff(s, want_s) < 1e-31);
        assert!(diff(c, want_c) < 1e-31);
        // Large argument: 8000000000.5 rad
        let (s, c) = Dd::from(8000000000.5).sin_cos();
        let want_s = Dd::raw(-0.9184018007324386, 4.953502743127013e-19);
        let want_c = Dd::raw(0.39564900152965654, -2.6650847234053228e-17);
        assert!(diff(s, want_s) < 1e-21);
        assert!(diff(c, want_c) < 1e-21);
    }

    #[test]
    fn atan2_refines_seed() {
        // atan2(1e8, 0.25)
        let want = Dd::raw(1.5707963242948966, 4.603866253527062e-17);
        let got = Dd::atan2(Dd::from(1e8), Dd::from(0.25));
        assert!(diff(got, want) < 1e-30);
        assert!(diff(Dd::atan2(Dd::ONE, Dd::ONE), Dd::PI.mul_pwr2(0.25)) < 1e-31);
    }

    #[test]
    fn rem_two_pi_ranges() {
        let r = Dd::from(1e9).rem_two_pi();
        assert!(r.hi >= 0.0 && r < Dd::TWO_PI);
        // An exact dd multiple of TWO_PI reduces to ~0 (mod the constant's
        // own distance from the real 2*pi, far below 1e-25 at this size).
        let x = Dd::TWO_PI * 12345.0;
        let r = x.rem_two_pi();
        assert!(r.to_f64() < 1e-25 || (Dd::TWO_PI - r).to_f64() < 1e-25);
    }

    #[test]
    fn floor_ceil_round_with_low_word() {
        let x = Dd::raw(3.0, 1e-20);
        assert_eq!(x.floor().to_f64(), 3.0);
        assert_eq!(x.ceil().to_f64(), 4.0);
        let y = Dd::raw(3.0, -1e-20);
        assert_eq!(y.floor().to_f64(), 2.0);
        assert_eq!(y.ceil().to_f64(), 3.0);
        assert_eq!(Dd::from(2.3).round().to_f64(), 2.0);
        assert_eq!(Dd::raw(2.5, 1e-18).round().to_f64(), 3.0);
        assert_eq!(Dd::raw(2.5, -1e-18).round().to_f64(), 2.0);
    }

    #[test]
    fn ordering_uses_both_words() {
        let a = Dd::raw(1.0, 1e-20);
        let b = Dd::raw(1.0, -1e-20);
        assert!(b < a);
        assert!(a > 0.5);
        assert!(Dd::from(2.0) < 3.0);
    }
}
