//! Static-noise propagators under small pulse errors.
//!
//! With a constant field the whole sequence is a fixed SU(2) element. For
//! errors `λ·e` it departs from `±1` by a term linear in `λ` (quadratic for
//! the symmetrized SDD and XY8), whose form is known for each family. The
//! checks here compare exact products with those forms and confirm the
//! residual shrinks at the next order when `λ` is halved.

use serde::Serialize;

use super::unitary::{axis_pulse_unitary, free_phase_unitary, AxisErrors, SpinUnitary};
use crate::error::{invalid, Error, Result};
use crate::sequence::{MergePolicy, Protocol, PulseSequence};

/// Error magnitudes used by [`static_expansion_check`].
pub const LAMBDAS: [f64; 4] = [1e-3, 5e-4, 2.5e-4, 1.25e-4];

/// Exact propagator of `seq` under a constant field `field` and faulty pulses.
pub fn static_unitary(seq: &PulseSequence, field: f64, e: &AxisErrors) -> Result<SpinUnitary> {
    let px = axis_pulse_unitary(crate::sequence::Axis::X, e)?;
    let py = axis_pulse_unitary(crate::sequence::Axis::Y, e)?;
    let mut q = SpinUnitary::IDENTITY;
    let mut t = 0.0;
    for p in &seq.pulses {
        q = q.then(free_phase_unitary(field * (p.time - t)));
        q = q.then(match p.axis {
            crate::sequence::Axis::X => px,
            crate::sequence::Axis::Y => py,
        });
        t = p.time;
    }
    Ok(q.then(free_phase_unitary(field * (seq.duration - t))))
}

/// Sequence and field realising free phase `phi_d` per delay unit.
///
/// Grid families use one delay unit per grid step; UDD and QDD use
/// `T = 1`, so `phi_d = B·T`.
pub fn static_setup(protocol: &Protocol, phi_d: f64) -> Result<(PulseSequence, f64)> {
    protocol.validate()?;
    let total = protocol.grid_units().map_or(1.0, |u| u as f64);
    Ok((protocol.build(total, MergePolicy::Keep)?, phi_d))
}

/// Leading-order form of the propagator, `s·(1 − i g·σ)` or a structural
/// constraint on which components may appear.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    Explicit {
        sign: f64,
        g: [f64; 3],
        order: u32,
    },
    /// Only the listed vector components may be nonzero at first order.
    Span {
        allowed: [bool; 3],
    },
}

fn sign_pow(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn form(protocol: &Protocol, e: &AxisErrors, phi: f64) -> Result<(Form, &'static str)> {
    let (c, s) = (phi.cos(), phi.sin());
    let a = e.m_x + e.n_y;
    let cx = e.eps_x * c + 2.0 * e.n_z * s;
    let cy = e.eps_y * c + 2.0 * e.m_z * s;
    let zero_time = phi == 0.0;
    Ok(match *protocol {
        Protocol::Cpmg(n) => {
            let k = n as f64;
            (
                Form::Explicit {
                    sign: sign_pow(n),
                    g: [k * cx, 0.0, 0.0],
                    order: 1,
                },
                "(-1)^n [1 - i n (eps_x cos phi + 2 n_z sin phi) sx]",
            )
        }
        Protocol::Xy4(n) | Protocol::Pdd(n) => {
            let k = n as f64;
            (
                Form::Explicit {
                    sign: sign_pow(n),
                    g: [0.0, 0.0, -2.0 * k * a],
                    order: 1,
                },
                "(-1)^n [1 + 2 i n (m_x + n_y) sz]",
            )
        }
        Protocol::Cdd { level, repeats } | Protocol::CddXy4 { level, repeats } => {
            if level == 0 {
                return Err(invalid("CDD expansion needs level >= 1"));
            }
            let k = repeats as f64;
            (
                Form::Explicit {
                    sign: sign_pow(repeats),
                    g: [0.0, 0.0, -2.0 * k * a],
                    order: 1,
                },
                "(-1)^r [1 + 2 i r (m_x + n_y) sz]",
            )
        }
        Protocol::Sdd(n) => {
            let k = n as f64;
            (
                Form::Explicit {
                    sign: 1.0,
                    g: [-2.0 * k * a * e.eps_y, -2.0 * k * a * cx, 0.0],
                    order: 2,
                },
                "1 + 2 i n (m_x + n_y)[eps_y sx + (eps_x cos phi + 2 n_z sin phi) sy]",
            )
        }
        Protocol::Xy8(n) => {
            let k = n as f64;
            (
                Form::Explicit {
                    sign: 1.0,
                    g: [-2.0 * k * a * cy, -2.0 * k * a * cx, 0.0],
                    order: 2,
                },
                "1 + 2 i n (m_x + n_y)[(eps_y cos phi + 2 m_z sin phi) sx + (eps_x cos phi + 2 n_z sin phi) sy]",
            )
        }
        Protocol::Udd(l) if zero_time => {
            let n = l.div_ceil(2);
            (
                Form::Explicit {
                    sign: sign_pow(n),
                    g: [n as f64 * e.eps_x, 0.0, 0.0],
                    order: 1,
                },
                "(-1)^n (1 - i n eps_x sx)",
            )
        }
        Protocol::Udd(l) if l % 2 == 0 => (
            Form::Span {
                allowed: [true, false, false],
            },
            "+-(1 - i theta sx)",
        ),
        Protocol::Udd(_) => (
            Form::Span {
                allowed: [true, true, false],
            },
            "+-(1 - i theta sx - i eta sy)",
        ),
        Protocol::Qdd(l) if zero_time => {
            let n = l.div_ceil(2);
            if l % 2 == 0 {
                let k = n as f64;
                (
                    Form::Explicit {
                        sign: 1.0,
                        g: [k * e.eps_x, k * e.eps_y, 0.0],
                        order: 1,
                    },
                    "1 - i n (eps_x sx + eps_y sy)",
                )
            } else {
                (
                    Form::Explicit {
                        sign: sign_pow(n),
                        g: [n as f64 * e.eps_x, 0.0, 0.0],
                        order: 1,
                    },
                    "(-1)^n (1 - i n eps_x sx)",
                )
            }
        }
        Protocol::Qdd(_) => {
            return Err(invalid("QDD has a known expansion only at T -> 0 (phi_d = 0)"));
        }
        Protocol::Fid | Protocol::Hahn => {
            return Err(Error::Unknown {
                what: "expansion for protocol",
                name: protocol.to_string(),
            });
        }
    })
}

fn residual(form: &Form, u: &SpinUnitary) -> f64 {
    match *form {
        Form::Explicit { sign, g, .. } => {
            let d = [
                u.w - sign,
                u.x - sign * g[0],
                u.y - sign * g[1],
                u.z - sign * g[2],
            ];
            d.iter().map(|v| v * v).sum::<f64>().sqrt()
        }
        Form::Span { allowed } => {
            let v = u.vector();
            let off: f64 = (0..3).filter(|&i| !allowed[i]).map(|i| v[i] * v[i]).sum();
            let w_dev = 1.0 - u.w.abs();
            (off + w_dev * w_dev).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub protocol: String,
    pub formula: &'static str,
    /// Order of the residual's leading term minus one: 1 for first-order
    /// formulas (residual ∝ λ²), 2 for second-order ones.
    pub order: u32,
    pub phi_d: f64,
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `r(λ/2)/r(λ)` for consecutive entries.
    pub ratios: Vec<f64>,
    /// `‖v − s·g‖/‖g‖` at the largest λ, for explicit forms.
    pub coefficient_error: Option<f64>,
}

impl ExpansionReport {
    pub fn ratio_band(&self) -> (f64, f64) {
        if self.order == 2 {
            (0.11, 0.14)
        } else {
            (0.22, 0.28)
        }
    }

    pub fn scaling_ok(&self) -> bool {
        let (lo, hi) = self.ratio_band();
        self.ratios.iter().all(|&r| r >= lo && r <= hi)
    }
}

/// Exact propagators at `λ·e` for each λ in [`LAMBDAS`] against the
/// family's leading-order form. `phi_d = 0` selects the `T → 0` forms of
/// UDD and QDD.
pub fn static_expansion_check(protocol: &Protocol, e: &AxisErrors, phi_d: f64) -> Result<ExpansionReport> {
    let (seq, field) = static_setup(protocol, phi_d)?;
    let mut residuals = Vec::with_capacity(LAMBDAS.len());
    let mut coefficient_error = None;
    let mut formula = "";
    let mut order = 1;
    for (i, &lambda) in LAMBDAS.iter().enumerate() {
        let el = e.scaled(lambda);
        let (f, text) = form(protocol, &el, phi_d)?;
        formula = text;
        let u = static_unitary(&seq, field, &el)?;
        residuals.push(residual(&f, &u));
        if let Form::Explicit { sign, g, order: o } = f {
            order = o;
            if i == 0 {
                let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                let v = u.vector();
                let dn = (0..3).map(|k| (v[k] - sign * g[k]).powi(2)).sum::<f64>().sqrt();
                coefficient_error = (gn > 0.0).then(|| dn / gn);
            }
        }
    }
    let ratios = residuals.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(ExpansionReport {
        protocol: protocol.to_string(),
        formula,
        order,
        phi_d,
        lambdas: LAMBDAS.to_vec(),
        residuals,
        ratios,
        coefficient_error,
    })
}

/// One of the six pulse-error components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ErrorComponent {
    EpsX,
    EpsY,
    Ny,
    Nz,
    Mx,
    Mz,
}

impl ErrorComponent {
    pub const ALL: [Self; 6] = [Self::EpsX, Self::EpsY, Self::Ny, Self::Nz, Self::Mx, Self::Mz];

    pub fn name(&self) -> &'static str {
        match self {
            Self::EpsX => "eps_x",
            Self::EpsY => "eps_y",
            Self::Ny => "n_y",
            Self::Nz => "n_z",
            Self::Mx => "m_x",
            Self::Mz => "m_z",
        }
    }
}

/// Free phases at which finite-time sensitivities are probed.
pub const PROBE_PHASES: [f64; 3] = [0.37, 1.1, 2.3];
/// Derivative magnitudes below this are structural zeros.
pub const ZERO_THRESHOLD: f64 = 1e-8;
const STEP: f64 = 1e-5;

/// First-order generator `G_k` with `U0†U(λ e_k) ≈ 1 − iλ G_k·σ`, from a
/// Richardson-refined central difference.
pub fn generators(seq: &PulseSequence, field: f64) -> Result<[[f64; 3]; 6]> {
    let u0 = static_unitary(seq, field, &AxisErrors::default())?.adjoint();
    let mut out = [[0.0; 3]; 6];
    for (k, g) in out.iter_mut().enumerate() {
        let at = |h: f64| -> Result<[f64; 3]> {
            let mut a = [0.0; 6];
            a[k] = h;
            Ok((u0 * static_unitary(seq, field, &AxisErrors::from_array(a))?).vector())
        };
        let d = |h: f64| -> Result<[f64; 3]> {
            let (p, m) = (at(h)?, at(-h)?);
            Ok([0, 1, 2].map(|i| (p[i] - m[i]) / (2.0 * h)))
        };
        let (d1, d2) = (d(STEP)?, d(STEP / 2.0)?);
        *g = [0, 1, 2].map(|i| (4.0 * d2[i] - d1[i]) / 3.0);
    }
    Ok(out)
}

/// Which error components shift `S_X` and `S_Y` at first order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sensitivity {
    pub protocol: String,
    pub sx: Vec<ErrorComponent>,
    pub sy: Vec<ErrorComponent>,
}

/// A state is sensitive when some first-order generator has a component
/// perpendicular to it; it is then affected by every error whose generator
/// is nonzero. Finite-time protocols are probed at [`PROBE_PHASES`],
/// `zero_time` probes only `B = 0`.
pub fn sensitivity(protocol: &Protocol, zero_time: bool) -> Result<Sensitivity> {
    let phases: &[f64] = if zero_time { &[0.0] } else { &PROBE_PHASES };
    let mut sx = Vec::new();
    let mut sy = Vec::new();
    for &phi in phases {
        let (seq, field) = static_setup(protocol, phi)?;
        let g = generators(&seq, field)?;
        let nonzero: Vec<ErrorComponent> = ErrorComponent::ALL
            .iter()
            .zip(&g)
            .filter(|(_, v)| v.iter().any(|c| c.abs() > ZERO_THRESHOLD))
            .map(|(c, _)| *c)
            .collect();
        // perpendicular to x̂ means a y or z component
        let hits_x = g
            .iter()
            .any(|v| v[1].abs() > ZERO_THRESHOLD || v[2].abs() > ZERO_THRESHOLD);
        let hits_y = g
            .iter()
            .any(|v| v[0].abs() > ZERO_THRESHOLD || v[2].abs() > ZERO_THRESHOLD);
        if hits_x {
            sx.extend(&nonzero);
        }
        if hits_y {
            sy.extend(&nonzero);
        }
    }
    for v in [&mut sx, &mut sy] {
        v.sort();
        v.dedup();
    }
    Ok(Sensitivity {
        protocol: protocol.to_string(),
        sx,
        sy,
    })
}

/// A column of the sensitivity table: label, protocols it covers, whether
/// it is evaluated at `T → 0`.
pub struct TableColumn {
    pub label: &'static str,
    pub protocols: Vec<Protocol>,
    pub zero_time: bool,
}

/// Columns in the customary order. UDD uses X pulses only; QDD nests Y
/// pulses inside an X-pulse outer level.
pub fn standard_columns() -> Vec<TableColumn> {
    vec![
        TableColumn {
            label: "CPMG",
            protocols: vec![Protocol::Cpmg(1), Protocol::Cpmg(3)],
            zero_time: false,
        },
        TableColumn {
            label: "XY,XY4",
            protocols: vec![Protocol::Pdd(1), Protocol::Xy4(1), Protocol::Xy4(2)],
            zero_time: false,
        },
        TableColumn {
            label: "UDD even",
            protocols: vec![Protocol::Udd(2), Protocol::Udd(4), Protocol::Udd(6)],
            zero_time: false,
        },
        TableColumn {
            label: "UDD odd",
            protocols: vec![Protocol::Udd(3), Protocol::Udd(5), Protocol::Udd(7)],
            zero_time: false,
        },
        TableColumn {
            label: "QDD even (T->0)",
            protocols: vec![Protocol::Qdd(2), Protocol::Qdd(4)],
            zero_time: true,
        },
        TableColumn {
            label: "QDD odd (T->0)",
            protocols: vec![Protocol::Qdd(1), Protocol::Qdd(3), Protocol::Qdd(5)],
            zero_time: true,
        },
        TableColumn {
            label: "SDD,XY8",
            protocols: vec![Protocol::Sdd(1), Protocol::Xy8(1), Protocol::Xy8(2)],
            zero_time: false,
        },
        TableColumn {
            label: "CDD (XY, XY4)",
            protocols: vec![
                Protocol::Cdd { level: 2, repeats: 1 },
                Protocol::Cdd { level: 3, repeats: 1 },
                Protocol::CddXy4 { level: 2, repeats: 1 },
            ],
            zero_time: false,
        },
    ]
}

/// Sensitivity per column; errors if protocols within a column disagree.
pub fn sensitivity_table(columns: &[TableColumn]) -> Result<Vec<(&'static str, Sensitivity)>> {
    columns
        .iter()
        .map(|col| {
            let mut first: Option<Sensitivity> = None;
            for p in &col.protocols {
                let s = sensitivity(p, col.zero_time)?;
                match &first {
                    None => first = Some(s),
                    Some(f) if f.sx == s.sx && f.sy == s.sy => {}
                    Some(f) => {
                        return Err(Error::Numerical(format!(
                            "{} disagrees with {} in column {}",
                            s.protocol, f.protocol, col.label
                        )))
                    }
                }
            }
            first
                .map(|s| (col.label, s))
                .ok_or_else(|| invalid(format!("column {} has no protocols", col.label)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ErrorComponent::*;

    fn generic() -> AxisErrors {
        AxisErrors {
            eps_x: 1.0,
            eps_y: 0.6,
            n_y: 0.3,
            n_z: 0.7,
            m_x: 0.5,
            m_z: -0.4,
        }
    }

    #[test]
    fn cpmg_first_order() {
        let r = static_expansion_check(&Protocol::Cpmg(1), &generic(), 0.3).unwrap();
        assert!(r.scaling_ok(), "{r:?}");
        assert!(r.coefficient_error.unwrap() < 0.01);
    }

    #[test]
    fn xy4_independent_of_phase() {
        for phi in [0.1, 0.9, 2.0] {
            let r = static_expansion_check(&Protocol::Xy4(1), &generic(), phi).unwrap();
            assert!(r.scaling_ok() && r.coefficient_error.unwrap() < 0.01, "{r:?}");
        }
    }

    #[test]
    fn second_order_families() {
        for p in [Protocol::Sdd(1), Protocol::Xy8(1), Protocol::Xy8(3)] {
            let r = static_expansion_check(&p, &generic(), 0.3).unwrap();
            assert_eq!(r.order, 2);
            assert!(r.scaling_ok(), "{r:?}");
        }
    }

    #[test]
    fn qdd_zero_time() {
        for l in 1..=5 {
            let r = static_expansion_check(&Protocol::Qdd(l), &generic(), 0.0).unwrap();
            assert!(r.scaling_ok(), "{r:?}");
        }
        assert!(static_expansion_check(&Protocol::Qdd(2), &generic(), 0.3).is_err());
        assert!(static_expansion_check(&Protocol::Hahn, &generic(), 0.3).is_err());
    }

    #[test]
    fn udd_odd_eta_vanishes_at_zero_time() {
        let e = AxisErrors {
            eps_x: 1.0,
            n_z: 0.7,
            ..Default::default()
        };
        let eta = |bt: f64| {
            let (seq, f) = static_setup(&Protocol::Udd(3), bt).unwrap();
            generators(&seq, f).unwrap()[0][1] * e.eps_x + generators(&seq, f).unwrap()[3][1] * e.n_z
        };
        assert!(eta(1.0).abs() > 1e-3);
        assert!(eta(1e-3).abs() < 1e-2 * eta(1.0).abs());
        assert!(eta(0.0).abs() < ZERO_THRESHOLD);
    }

    #[test]
    fn cpmg_and_sdd_rows() {
        let s = sensitivity(&Protocol::Cpmg(1), false).unwrap();
        assert!(s.sx.is_empty());
        assert_eq!(s.sy, vec![EpsX, Nz]);
        let s = sensitivity(&Protocol::Xy8(1), false).unwrap();
        assert!(s.sx.is_empty() && s.sy.is_empty());
    }
}
