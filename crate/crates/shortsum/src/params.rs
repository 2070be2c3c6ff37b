//! Experiment parameters and the regime constraints tying them together:
//! `U = sqrt(T) psi ln T`, `psi <= K <= T^{1/6} ln^2 T`, `psi < ln T`,
//! `P0 = sqrt(T/2pi)`.
//!
//! `relaxed` mode keeps the derived quantities but skips the regime
//! checks, so small-T smoke runs remain possible; reports carry the flag.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// e^e, the smallest T for which ln ln T exceeds 1.
pub const MIN_T_FOR_LOGLOG: f64 = 15.154262241479262;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("T must be positive and finite (got {t})")]
    BadT { t: f64 },
    #[error("T = {t} is too small for psi = {kind:?}; need T > e^e ~ 15.154")]
    TTooSmallForPsiKind { t: f64, kind: PsiKind },
    #[error("psi must be positive and finite (got {psi})")]
    BadPsi { psi: f64 },
    #[error("K must be positive and finite (got {k})")]
    BadK { k: f64 },
    #[error("K = {k} is below psi = {psi}; the regime requires psi <= K")]
    KBelowPsi { k: f64, psi: f64 },
    #[error("K = {k} exceeds the ceiling T^(1/6) ln^2 T = {ceiling}")]
    KAboveCeiling { k: f64, ceiling: f64 },
    #[error("psi = {psi} is not below ln T = {ln_t}; the regime requires psi < ln T")]
    PsiNotBelowLnT { psi: f64, ln_t: f64 },
}

/// Which slowly increasing function psi(T) is in use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiKind {
    LogLog,
    LogLogLog,
    Custom,
}

/// Requested psi: a named slowly increasing function or a fixed value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PsiSpec {
    LogLog,
    LogLogLog,
    Value(f64),
}

impl PsiSpec {
    pub fn kind(&self) -> PsiKind {
        match self {
            PsiSpec::LogLog => PsiKind::LogLog,
            PsiSpec::LogLogLog => PsiKind::LogLogLog,
            PsiSpec::Value(_) => PsiKind::Custom,
        }
    }

    /// psi(T) under this spec.
    pub fn eval(&self, t_start: f64) -> Result<f64, ParamError> {
        let v = match self {
            PsiSpec::LogLog | PsiSpec::LogLogLog if t_start <= MIN_T_FOR_LOGLOG => {
                return Err(ParamError::TTooSmallForPsiKind { t: t_start, kind: self.kind() });
            }
            PsiSpec::LogLog => t_start.ln().ln(),
            PsiSpec::LogLogLog => t_start.ln().ln().ln(),
            PsiSpec::Value(v) => *v,
        };
        if !v.is_finite() || v <= 0.0 {
            return Err(ParamError::BadPsi { psi: v });
        }
        Ok(v)
    }
}

impl std::str::FromStr for PsiSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "loglog" => Ok(PsiSpec::LogLog),
            "logloglog" => Ok(PsiSpec::LogLogLog),
            other => other
                .parse::<f64>()
                .map(PsiSpec::Value)
                .map_err(|_| format!("psi must be 'loglog', 'logloglog' or a number (got '{other}')")),
        }
    }
}

/// The validated tuple (T, psi, K, U, P0).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExperimentParams {
    /// Window start T.
    pub t_start: f64,
    /// psi(T).
    pub psi: f64,
    pub psi_kind: PsiKind,
    pub k: f64,
    /// Window length U = sqrt(T) psi ln T.
    pub u: f64,
    /// P0 = sqrt(T / 2pi).
    pub p0: f64,
    /// Regime checks were skipped.
    pub relaxed: bool,
}

/// Computes psi, U, P0 from (T, psi, K) and enforces the regime unless
/// `relaxed`. Every violated constraint maps to its own error.
pub fn validate_params(
    t_start: f64,
    psi: PsiSpec,
    k: f64,
    relaxed: bool,
) -> Result<ExperimentParams, ParamError> {
    if !t_start.is_finite() || t_start <= 0.0 {
        return Err(ParamError::BadT { t: t_start });
    }
    let psi_value = psi.eval(t_start)?;
    let psi_kind = psi.kind();
    if !k.is_finite() || k <= 0.0 {
        return Err(ParamError::BadK { k });
    }
    let ln_t = t_start.ln();
    if !relaxed {
        if k < psi_value {
            return Err(ParamError::KBelowPsi { k, psi: psi_value });
        }
        let ceiling = t_start.powf(1.0 / 6.0) * ln_t * ln_t;
        if k > ceiling {
            return Err(ParamError::KAboveCeiling { k, ceiling });
        }
        if psi_value >= ln_t {
            return Err(ParamError::PsiNotBelowLnT { psi: psi_value, ln_t });
        }
    }
    Ok(ExperimentParams {
        t_start,
        psi: psi_value,
        psi_kind,
        k,
        u: t_start.sqrt() * psi_value * ln_t,
        p0: (t_start / (2.0 * std::f64::consts::PI)).sqrt(),
        relaxed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglog_defaults_at_1e8() {
        let p = validate_params(1e8, PsiSpec::LogLog, 2.9134739869277917, false).unwrap();
        assert!((p.psi - 2.9134739869277917).abs() < 1e-12);
        // mpmath: U = 536681.74169006898846
        assert!((p.u - 536681.7416900690).abs() < 1e-6);
        assert!((p.p0 - (1e8 / (2.0 * std::f64::consts::PI)).sqrt()).abs() == 0.0);
        assert_eq!(p.psi_kind, PsiKind::LogLog);
    }

    #[test]
    fn each_constraint_has_its_own_error() {
        // K below psi.
        let psi = (1e8f64).ln().ln();
        assert!(matches!(
            validate_params(1e8, PsiSpec::LogLog, psi / 2.0, false),
            Err(ParamError::KBelowPsi { .. })
        ));
        // psi = ln T is not below ln T.
        let ln_t = (1e8f64).ln();
        assert!(matches!(
            validate_params(1e8, PsiSpec::Value(ln_t), ln_t, false),
            Err(ParamError::PsiNotBelowLnT { .. })
        ));
        // K above the ceiling.
        let ceiling = (1e8f64).powf(1.0 / 6.0) * ln_t * ln_t;
        assert!(matches!(
            validate_params(1e8, PsiSpec::LogLog, ceiling * 2.0, false),
            Err(ParamError::KAboveCeiling { .. })
        ));
        // Bad T values.
        assert!(matches!(
            validate_params(-1.0, PsiSpec::LogLog, 3.0, false),
            Err(ParamError::BadT { .. })
        ));
        assert!(matches!(
            validate_params(10.0, PsiSpec::LogLog, 3.0, false),
            Err(ParamError::TTooSmallForPsiKind { .. })
        ));
    }

    #[test]
    fn relaxed_skips_regime_but_not_sanity() {
        let psi = (1e4f64).ln().ln();
        // K < psi passes when relaxed.
        let p = validate_params(1e4, PsiSpec::LogLog, psi / 2.0, true).unwrap();
        assert!(p.relaxed);
        // Nonpositive K still rejected.
        assert!(matches!(
            validate_params(1e4, PsiSpec::LogLog, 0.0, true),
            Err(ParamError::BadK { .. })
        ));
    }

    #[test]
    fn psi_spec_parses() {
        assert_eq!("loglog".parse::<PsiSpec>().unwrap(), PsiSpec::LogLog);
        assert_eq!("logloglog".parse::<PsiSpec>().unwrap(), PsiSpec::LogLogLog);
        assert_eq!("2.5".parse::<PsiSpec>().unwrap(), PsiSpec::Value(2.5));
        assert!("bogus".parse::<PsiSpec>().is_err());
    }
}
