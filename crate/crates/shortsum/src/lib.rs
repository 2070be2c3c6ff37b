//! Gram points, short trigonometric sums over `n` near `sqrt(T/2pi)`, and
//! their discrete moments.
//!
//! The crate is organized around five pieces:
//!
//! * [`dd`] — double-double arithmetic; every phase-critical path runs on
//!   it because abscissas near 1e8 push theta values past the reach of a
//!   single f64.
//! * [`theta`] — the Riemann-Siegel theta function, with an asymptotic
//!   production path and a log-gamma oracle for cross-checking.
//! * [`gram`] — solving `theta(t_nu) = pi nu` and enumerating all Gram
//!   points in an interval.
//! * [`kernels`] — the sums `S`, `|S*|`, `w`, `w1`, the quadratic double
//!   sums, and the exact decomposition identities relating them.
//! * [`moments`] + [`params`] — aggregation over a Gram interval, the
//!   moment predictions, the exceedance count, and the parameter regime
//!   checks.

pub mod accum;
pub mod dd;
pub mod gram;
pub mod kernels;
pub mod moments;
pub mod params;
pub mod theta;

pub use dd::Dd;
pub use gram::{gram_point, gram_range, q0_main_term, q0_predicted, GramError, GramInterval, GramPoint};
pub use kernels::{
    decompose_w1_squared, decompose_w_squared, diag_cos, double_sum_w2, double_sum_w3,
    harmonic_sum, n_range, phase_reduce, sum_s, sum_s_star_mag, sum_w, sum_w1,
    wbar1_closed_form, KernelError, NRange, RangeTable, SumValues,
};
pub use moments::{
    moments_over_gram, normalized_moments, sup_bound_check, theorem_report, MomentError,
    MomentOptions, MomentRatios, MomentReport, PointSample, TheoremReport,
};
pub use params::{validate_params, ExperimentParams, ParamError, PsiKind, PsiSpec};
pub use theta::{theta, theta_asymptotic, theta_deriv, theta_oracle, ThetaError, ThetaEval};
