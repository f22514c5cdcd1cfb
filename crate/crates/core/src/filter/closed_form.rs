//! Slow-bath asymptotics (`Rτ ≪ 1`, `b τ_c ≫ 1`).
//!
//! With `N_d` unit delays of length `τ = T/N_d` and `T_2 = (12 τ_c/b²)^{1/3}`:
//!
//! * PDD, `N_c R T_c ≪ 1`: `S = exp[-(4/N_d²)(T/T_2)³]`
//! * PDD, `N_c R T_c ≫ 1`: `S = exp[-(1/N_d²)(T/T_2)³]`
//! * XY4/CPMG-timed: `S = exp[-(4/N_d²)(T/T_2)³]`, hence `T_1/e = (N_d/2)^{2/3} T_2`.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::noise::{echo_analytic, echo_t2, fid_analytic, OuParams};

/// `Rτ` above which the asymptotic forms are flagged.
pub const REGIME_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClosedFormKind {
    PddShort,
    PddLong,
    Xy4,
    T1e,
    Fid,
    Echo,
}

impl ClosedFormKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClosedFormKind::PddShort => "pdd_short",
            ClosedFormKind::PddLong => "pdd_long",
            ClosedFormKind::Xy4 => "xy4",
            ClosedFormKind::T1e => "t_1e",
            ClosedFormKind::Fid => "fid",
            ClosedFormKind::Echo => "echo",
        }
    }
}

impl FromStr for ClosedFormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "pdd_short" => ClosedFormKind::PddShort,
            "pdd_long" => ClosedFormKind::PddLong,
            "xy4" => ClosedFormKind::Xy4,
            "t_1e" | "t1e" => ClosedFormKind::T1e,
            "fid" => ClosedFormKind::Fid,
            "echo" => ClosedFormKind::Echo,
            _ => {
                return Err(Error::Unknown {
                    what: "closed form",
                    name: s.to_string(),
                })
            }
        })
    }
}

/// Closed-form value with a flag set when `Rτ` exceeds [`REGIME_LIMIT`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub value: f64,
    pub regime_warning: bool,
}

pub fn pdd_short(t: f64, n_d: f64, t2: f64) -> f64 {
    (-4.0 / (n_d * n_d) * (t / t2).powi(3)).exp()
}

pub fn pdd_long(t: f64, n_d: f64, t2: f64) -> f64 {
    (-1.0 / (n_d * n_d) * (t / t2).powi(3)).exp()
}

pub fn xy4(t: f64, n_d: f64, t2: f64) -> f64 {
    pdd_long(t, n_d / 2.0, t2)
}

pub fn t_1e(n_d: f64, t2: f64) -> f64 {
    (n_d / 2.0).powf(2.0 / 3.0) * t2
}

/// Evaluates `kind` at time `t` (ignored for `T1e`) with `n_d` delays.
pub fn closed_form(kind: ClosedFormKind, p: &OuParams, t: f64, n_d: f64) -> Result<ClosedForm> {
    if !(t >= 0.0) {
        return Err(invalid(format!("time must be >= 0, got {t}")));
    }
    let needs_nd = !matches!(kind, ClosedFormKind::Fid | ClosedFormKind::Echo);
    if needs_nd && !(n_d > 0.0) {
        return Err(invalid(format!("delay count must be > 0, got {n_d}")));
    }
    let t2 = echo_t2(p);
    let value = match kind {
        ClosedFormKind::PddShort => pdd_short(t, n_d, t2),
        ClosedFormKind::PddLong => pdd_long(t, n_d, t2),
        ClosedFormKind::Xy4 => xy4(t, n_d, t2),
        ClosedFormKind::T1e => t_1e(n_d, t2),
        ClosedFormKind::Fid => fid_analytic(p, t),
        ClosedFormKind::Echo => echo_analytic(p, t),
    };
    let tau = match kind {
        ClosedFormKind::T1e => value / n_d,
        ClosedFormKind::Fid => 0.0,
        ClosedFormKind::Echo => t / 2.0,
        _ => t / n_d,
    };
    Ok(ClosedForm {
        value,
        regime_warning: p.rate() * tau > REGIME_LIMIT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t1e_exact_power() {
        let p = OuParams::nv_default();
        let t2 = echo_t2(&p);
        let v = closed_form(ClosedFormKind::T1e, &p, 0.0, 16.0).unwrap().value;
        assert!((v - 4.0 * t2).abs() < 1e-12);
        assert!((t_1e(16.0, 3.023) - 12.092).abs() < 1e-3);
    }

    #[test]
    fn short_long_ratio_and_xy4_identity() {
        let (t, nd, t2) = (7.0, 24.0, 3.0);
        let ws = -pdd_short(t, nd, t2).ln();
        let wl = -pdd_long(t, nd, t2).ln();
        assert!((ws / wl - 4.0).abs() < 1e-12);
        assert_eq!(xy4(t, 2.0 * nd, t2), pdd_long(t, nd, t2));
    }

    #[test]
    fn kinds_parse_and_flag() {
        assert_eq!("xy4".parse::<ClosedFormKind>().unwrap(), ClosedFormKind::Xy4);
        assert!("bogus".parse::<ClosedFormKind>().is_err());
        let p = OuParams::nv_default();
        assert!(
            !closed_form(ClosedFormKind::Xy4, &p, 10.0, 16.0)
                .unwrap()
                .regime_warning
        );
        assert!(
            closed_form(ClosedFormKind::Xy4, &p, 100.0, 16.0)
                .unwrap()
                .regime_warning
        );
        assert!(closed_form(ClosedFormKind::Xy4, &p, 1.0, 0.0).is_err());
    }
}
