//! Gram-Titchmarsh points: solutions of `theta(t_nu) = pi nu`, nu = 1, 2, ...
//!
//! Individual points come from Newton iteration on the double-double theta
//! with the derivative `(1/2) ln(t/2pi)`; the initial guess inverts the
//! leading asymptotic term through `x (ln x - 1) = nu + 1/8`. Interval
//! enumeration derives the index window from theta at both endpoints and
//! solves every index independently, so a parallel run is bit-identical
//! to a sequential one.

use crate::dd::Dd;
use crate::params::ExperimentParams;
use crate::theta::{theta, ThetaError};
use rayon::prelude::*;
use thiserror::Error;

/// Residual each returned point is guaranteed to satisfy.
pub const RESIDUAL_BOUND: f64 = 1e-9;

const MAX_NEWTON_ITERS: usize = 50;

#[derive(Debug, Error)]
pub enum GramError {
    #[error("Gram indices start at nu = 1")]
    InvalidIndex,
    #[error("Newton failed to converge for nu = {nu}: last iterate t = {t_last}, residual {residual}")]
    ConvergenceFailure { nu: u64, t_last: f64, residual: f64 },
    #[error("gram_range requires T >= 100 (got {t_start})")]
    StartBelowFloor { t_start: f64 },
    #[error("gram_range requires U >= 0 (got {u})")]
    NegativeLength { u: f64 },
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

/// One Gram point: index, abscissa, and the achieved residual
/// `|theta(t) - pi nu|`.
#[derive(Clone, Copy, Debug)]
pub struct GramPoint {
    pub nu: u64,
    pub t: Dd,
    pub residual: f64,
}

/// All Gram points in the closed interval `[T, T+U]`, ordered by index.
#[derive(Clone, Debug)]
pub struct GramInterval {
    pub t_start: f64,
    pub u: f64,
    pub points: Vec<GramPoint>,
}

impl GramInterval {
    /// Q0, the number of points in the interval.
    pub fn q0(&self) -> usize {
        self.points.len()
    }
}

/// Solves `theta(t) = pi nu` for a single index.
pub fn gram_point(nu: u64) -> Result<GramPoint, GramError> {
    if nu == 0 {
        return Err(GramError::InvalidIndex);
    }
    let target = Dd::PI * (nu as f64);
    // Coarse tolerance: converge the phase to 1e-10 relative, polish once.
    // A final Newton step from there lands far below RESIDUAL_BOUND
    // because theta'' ~ 1/(2t).
    let coarse = 1e-10 * (std::f64::consts::PI * nu as f64).max(1.0);

    let mut t = Dd::from(initial_guess(nu));
    let mut residual = f64::INFINITY;
    for iter in 0..MAX_NEWTON_ITERS {
        let ev = theta(t)?;
        let f = ev.value - target;
        residual = f.abs().to_f64();
        if residual <= coarse {
            // Polish: one more full-precision step, then re-measure.
            t = t - f / ev.deriv;
            let ev = theta(t)?;
            residual = (ev.value - target).abs().to_f64();
            if residual <= RESIDUAL_BOUND {
                return Ok(GramPoint { nu, t, residual });
            }
            // Rare: keep iterating within the overall budget.
        }
        t = t - f / ev.deriv;
        if t.hi() < 10.0 {
            // Theta is not monotone down there; a sane guess never lands
            // here, so treat it as divergence.
            break;
        }
        if iter == MAX_NEWTON_ITERS - 1 {
            break;
        }
    }
    Err(GramError::ConvergenceFailure { nu, t_last: t.to_f64(), residual })
}

/// Initial guess from `theta(t) ~ (t/2) ln(t/(2 pi e)) - pi/8`: with
/// `x = t/(2 pi)` the equation becomes `x (ln x - 1) = nu + 1/8`.
fn initial_guess(nu: u64) -> f64 {
    let a = nu as f64 + 0.125;
    let mut x = a.max(4.0);
    for _ in 0..40 {
        let f = x * (x.ln() - 1.0) - a;
        let fp = x.ln();
        let step = f / fp;
        x -= step;
        if x < 3.0 {
            x = 3.0;
        }
        if step.abs() < 1e-12 * x {
            break;
        }
    }
    2.0 * std::f64::consts::PI * x
}

/// Enumerates every Gram point with `T <= t_nu <= T + U` (closed interval).
pub fn gram_range(t_start: f64, u: f64) -> Result<GramInterval, GramError> {
    if !(t_start >= 100.0) {
        return Err(GramError::StartBelowFloor { t_start });
    }
    if !(u >= 0.0) {
        return Err(GramError::NegativeLength { u });
    }
    let lo = theta(Dd::from(t_start))?.value / Dd::PI;
    let hi = theta(Dd::from(t_start) + u)?.value / Dd::PI;
    let nu_lo = lo.ceil().to_f64() as i64;
    let nu_hi = hi.floor().to_f64() as i64;
    let points = if nu_hi < nu_lo || nu_hi < 1 {
        Vec::new()
    } else {
        let nu_lo = nu_lo.max(1) as u64;
        let nu_hi = nu_hi as u64;
        (nu_lo..=nu_hi)
            .into_par_iter()
            .map(gram_point)
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(GramInterval { t_start, u, points })
}

/// Main term of Eq.-style density count: `U ln(T/2pi) / (2 pi)`.
pub fn q0_main_term(t_start: f64, u: f64) -> f64 {
    u * (t_start / (2.0 * std::f64::consts::PI)).ln() / (2.0 * std::f64::consts::PI)
}

/// Predicted Q0 for an experiment's full window.
pub fn q0_predicted(params: &ExperimentParams) -> f64 {
    q0_main_term(params.t_start, params.u)
}
