//! The Riemann-Siegel theta function: `theta(t) = -(t/2) ln pi +
//! Im ln Gamma(1/4 + i t/2)`.
//!
//! Two evaluation routes are kept deliberately separate:
//!
//! * [`theta_asymptotic`] — the Stirling-derived expansion
//!   `(t/2) ln(t/2pi) - t/2 - pi/8 + 1/(48t) + 7/(5760 t^3)`, valid from
//!   [`ASYMPTOTIC_FLOOR`] upward. This is the production path.
//! * [`theta_oracle`] — direct evaluation of the defining formula through
//!   a double-double complex log-gamma (argument recurrence plus Stirling
//!   series once `|z|` is large). It is slower, works for any `t > 0`, and
//!   serves as the independent reference the asymptotic path is tested
//!   against.
//!
//! [`theta`] dispatches between them so callers never see the seam.

use crate::dd::Dd;
use thiserror::Error;

/// Below this abscissa the two-term asymptotic expansion is not trusted
/// and [`theta`] falls back to the oracle.
pub const ASYMPTOTIC_FLOOR: f64 = 100.0;

/// Largest precision request [`theta_oracle`] can honor, in significant
/// decimal digits (the double-double significand carries ~31).
pub const ORACLE_MAX_DIGITS: u32 = 28;

#[derive(Debug, Error)]
pub enum ThetaError {
    #[error("theta is defined here for t > 0 only (got t = {t})")]
    NonpositiveAbscissa { t: f64 },
    #[error("asymptotic theta requires t >= {ASYMPTOTIC_FLOOR} (got t = {t})")]
    BelowAsymptoticFloor { t: f64 },
    #[error("oracle precision capped at {ORACLE_MAX_DIGITS} digits (requested {digits})")]
    UnsupportedPrecision { digits: u32 },
}

/// One theta evaluation: value, derivative and an absolute error bound.
#[derive(Clone, Copy, Debug)]
pub struct ThetaEval {
    pub t: Dd,
    /// theta(t) in radians.
    pub value: Dd,
    /// theta'(t) = (1/2) ln(t/2pi) - 1/(48 t^2) - ...
    pub deriv: f64,
    /// Absolute bound on |value - theta(t)|.
    pub err_bound: f64,
}

/// Evaluates theta(t) for any t > 0, using the asymptotic expansion from
/// [`ASYMPTOTIC_FLOOR`] upward and the oracle below it.
pub fn theta(t: Dd) -> Result<ThetaEval, ThetaError> {
    if t.hi() >= ASYMPTOTIC_FLOOR {
        theta_asymptotic(t)
    } else {
        let value = theta_oracle(t, 25)?;
        Ok(ThetaEval {
            t,
            value,
            deriv: theta_deriv(t.to_f64()),
            err_bound: 1e-28 * value.to_f64().abs().max(1.0),
        })
    }
}

/// Asymptotic-only evaluation; errors below [`ASYMPTOTIC_FLOOR`].
pub fn theta_asymptotic(t: Dd) -> Result<ThetaEval, ThetaError> {
    let th = t.hi();
    if !(th > 0.0) {
        return Err(ThetaError::NonpositiveAbscissa { t: th });
    }
    if th < ASYMPTOTIC_FLOOR {
        return Err(ThetaError::BelowAsymptoticFloor { t: th });
    }
    let ln_u = (t * Dd::INV_TWO_PI).ln();
    // (t/2)(ln(t/2pi) - 1) - pi/8 + 1/(48t) + 7/(5760 t^3)
    let mut value = (t * (ln_u - Dd::ONE)).mul_pwr2(0.5) - Dd::PI_OVER_8;
    let c1 = Dd::ONE / (t * 48.0);
    let t3 = t * t * t;
    let c2 = Dd::from(7.0) / (t3 * 5760.0);
    value = value + c1 + c2;
    // Twice the first omitted term, plus the double-double noise floor of
    // the arithmetic above.
    let t5 = th * th * th * th * th;
    let err_bound = 2.0 * 31.0 / (80640.0 * t5) + 5e-31 * value.to_f64().abs();
    Ok(ThetaEval { t, value, deriv: theta_deriv(th), err_bound })
}

/// theta'(t), accurate to a few ulps for t >= 20.
pub fn theta_deriv(t: f64) -> f64 {
    let t2 = t * t;
    0.5 * (t / (2.0 * std::f64::consts::PI)).ln() - 1.0 / (48.0 * t2) - 7.0 / (1920.0 * t2 * t2)
}

/// Evaluates theta(t) from the definition via an extended-precision
/// complex log-gamma. The result is accurate to at least `digits`
/// significant decimal digits (in practice to the double-double floor).
pub fn theta_oracle(t: Dd, digits: u32) -> Result<Dd, ThetaError> {
    if !(t.hi() > 0.0) {
        return Err(ThetaError::NonpositiveAbscissa { t: t.hi() });
    }
    if digits > ORACLE_MAX_DIGITS {
        return Err(ThetaError::UnsupportedPrecision { digits });
    }
    let im = t.mul_pwr2(0.5);
    Ok(im * (-Dd::LN_PI) + lngamma_imag_quarter(im))
}

/// Radius |z| must reach before the Stirling series is applied.
const STIRLING_RADIUS: f64 = 40.0;

/// Stirling coefficients B_{2n} / ((2n)(2n-1)) for n = 1..=20 as
/// double-double pairs (split with mpmath at 60 digits).
const STIRLING_COEFFS: [(f64, f64); 20] = [
    (0.08333333333333333, 4.625929269271485e-18),
    (-0.002777777777777778, 1.0601087908747154e-19),
    (0.0007936507936507937, 6.883823317368282e-22),
    (-0.0005952380952380953, 5.36938218754726e-20),
    (0.0008417508417508417, 3.6870174889237694e-20),
    (-0.0019175269175269176, 1.0675702776872475e-19),
    (0.00641025641025641, 2.2240044563805217e-19),
    (-0.029550653594771242, 4.861760957508855e-19),
    (0.17964437236883057, -6.401600482710946e-19),
    (-1.3924322169059011, 1.5837056989230303e-17),
    (13.402864044168393, -6.154114101993966e-16),
    (-156.84828462600203, 9.391823141715389e-15),
    (2193.1033333333335, -1.3339255626002948e-13),
    (-36108.77125372499, 5.897583353514365e-13),
    (691472.268851313, 2.5585296305158e-11),
    (-15238221.539407415, -8.76774522490625e-10),
    (382900751.39141417, -2.4082684757733585e-08),
    (-10882266035.784391, 3.141830930219749e-07),
    (347320283765.00226, -6.048528997747748e-06),
    (-12369602142269.275, 0.0009363732896507286),
];

/// Complex double-double, just enough surface for the Stirling series.
#[derive(Clone, Copy)]
struct DdC {
    re: Dd,
    im: Dd,
}

impl DdC {
    fn mul(self, o: DdC) -> DdC {
        DdC {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn recip(self) -> DdC {
        let d = self.re.sqr() + self.im.sqr();
        DdC { re: self.re / d, im: -self.im / d }
    }

    fn mag_hi(self) -> f64 {
        f64::hypot(self.re.hi(), self.im.hi())
    }
}

/// Im ln Gamma(1/4 + i y) for y > 0, with the continuous branch.
///
/// The argument is shifted up by an integer until |z| reaches
/// [`STIRLING_RADIUS`]; each shift contributes -arg(z + k), and the shifted
/// point is handled by the Stirling series. Re(z + k) > 0 throughout, so
/// the principal arctangents never cross a branch cut.
fn lngamma_imag_quarter(y: Dd) -> Dd {
    let mut shift_sum = Dd::ZERO;
    let mut re0 = 0.25;
    if y.hi() < STIRLING_RADIUS {
        let m = ((STIRLING_RADIUS * STIRLING_RADIUS - y.hi() * y.hi())
            .max(0.0)
            .sqrt()
            - 0.25)
            .ceil() as usize
            + 1;
        for k in 0..m {
            shift_sum += Dd::atan2(y, Dd::from(0.25 + k as f64));
        }
        re0 = 0.25 + m as f64;
    }
    let z = DdC { re: Dd::from(re0), im: y };

    // Im[(z - 1/2) ln z - z]
    let mod_sq = z.re.sqr() + z.im.sqr();
    let ln_mod = mod_sq.ln().mul_pwr2(0.5);
    let arg = Dd::atan2(z.im, z.re);
    let base = (z.re - 0.5) * arg + z.im * ln_mod - z.im;

    // Im sum a_n z^(1-2n)
    let u = z.recip();
    let u2 = u.mul(u);
    let mut v = u;
    let mut series = Dd::ZERO;
    let scale = base.to_f64().abs().max(1.0);
    for (hi, lo) in STIRLING_COEFFS {
        let a = Dd::raw(hi, lo);
        series += a * v.im;
        if hi.abs() * v.mag_hi() < 1e-36 * scale {
            break;
        }
        v = v.mul(u2);
    }

    base + series - shift_sum
}
