//! ESR lines of substitutional nitrogen (P1) centres.
//!
//! An electron spin-1/2 coupled to a ¹⁴N nucleus (I = 1) through an axial
//! hyperfine tensor along the Jahn-Teller axis `n`, plus a quadrupole term:
//!
//! `H = γ_e B0 S_z + A_x S·I + (A_z − A_x)(S·n)(I·n) + P (I·n)²`  [MHz]
//!
//! The field defines lab `z` and points along [111]. Type-1 centres have
//! their axis along the field; type-2 centres along one of the three other
//! ⟨111⟩ directions, at `arccos(1/3)` from it. Each ESR line can be given
//! its own noise amplitude and rate and summed into a [`BathComposition`].

use nalgebra::{Complex, Matrix2, Matrix3, Matrix6, SymmetricEigen, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::noise::{BathComposition, OuParams};

type C = Complex<f64>;

/// Free-electron gyromagnetic ratio [MHz/G].
pub const GAMMA_E: f64 = 2.8025;
/// Lines with a smaller share of the ESR weight are dropped by default.
pub const WEIGHT_FLOOR: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct P1Params {
    pub a_z: f64,
    pub a_x: f64,
    pub p: f64,
    /// Gauss
    pub b0: f64,
    /// MHz/G
    pub gamma_e: f64,
    pub axis: [f64; 3],
}

impl Default for P1Params {
    fn default() -> Self {
        Self {
            a_z: 114.0,
            a_x: 81.3,
            p: -4.0,
            b0: 114.0,
            gamma_e: GAMMA_E,
            axis: [0.0, 0.0, 1.0],
        }
    }
}

impl P1Params {
    pub fn with_axis(self, axis: [f64; 3]) -> Self {
        Self { axis, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let n = Vector3::from(self.axis).norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("P1 axis must be a unit vector, |n| = {n}")));
        }
        let all = [self.a_z, self.a_x, self.p, self.b0, self.gamma_e];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("P1 parameters must be finite"));
        }
        Ok(())
    }
}

/// The three ⟨111⟩ directions other than the field, in the lab frame with
/// `z ∥ [111]`.
pub fn type2_axes() -> [[f64; 3]; 3] {
    let s3 = 3f64.sqrt();
    let e3 = Vector3::new(1.0, 1.0, 1.0) / s3;
    let e1 = Vector3::new(1.0, -1.0, 0.0) / 2f64.sqrt();
    let e2 = e3.cross(&e1);
    [[1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]].map(|c| {
        let v = Vector3::from(c) / s3;
        [v.dot(&e1), v.dot(&e2), v.dot(&e3)]
    })
}

fn spin_half() -> [Matrix2<C>; 3] {
    let z = C::new(0.0, 0.0);
    let h = C::new(0.5, 0.0);
    let ih = C::new(0.0, 0.5);
    [
        Matrix2::new(z, h, h, z),
        Matrix2::new(z, -ih, ih, z),
        Matrix2::new(h, z, z, -h),
    ]
}

fn spin_one() -> [Matrix3<C>; 3] {
    let z = C::new(0.0, 0.0);
    let r = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let ir = C::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let one = C::new(1.0, 0.0);
    [
        Matrix3::new(z, r, z, r, z, r, z, r, z),
        Matrix3::new(z, -ir, z, ir, z, -ir, z, ir, z),
        Matrix3::new(one, z, z, z, z, z, z, z, -one),
    ]
}

/// Electron and nuclear operators on the 6-dim product space, electron first.
fn operators() -> ([Matrix6<C>; 3], [Matrix6<C>; 3]) {
    let s = spin_half();
    let i = spin_one();
    let e2 = Matrix2::<C>::identity();
    let e3 = Matrix3::<C>::identity();
    (
        [0, 1, 2].map(|k| s[k].kronecker(&e3)),
        [0, 1, 2].map(|k| e2.kronecker(&i[k])),
    )
}

pub fn build_hamiltonian(p: &P1Params) -> Result<Matrix6<C>> {
    p.validate()?;
    let (s, i) = operators();
    let c = |v: f64| C::new(v, 0.0);
    let n = p.axis;
    let sn = s[0] * c(n[0]) + s[1] * c(n[1]) + s[2] * c(n[2]);
    let in_ = i[0] * c(n[0]) + i[1] * c(n[1]) + i[2] * c(n[2]);
    let sdoti = s[0] * i[0] + s[1] * i[1] + s[2] * i[2];
    Ok(s[2] * c(p.gamma_e * p.b0) + sdoti * c(p.a_x) + sn * in_ * c(p.a_z - p.a_x) + in_ * in_ * c(p.p))
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn diagonalize(h: &Matrix6<C>) -> Result<(Vector6<f64>, Matrix6<C>)> {
    let herm = (h - h.adjoint()).camax();
    if herm > 1e-9 * h.camax().max(1.0) {
        return Err(Error::Eigen(format!(
            "matrix is not Hermitian (deviation {herm})"
        )));
    }
    let eig = SymmetricEigen::new(*h);
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector6::from_fn(|k, _| eig.eigenvalues[order[k]]);
    let vectors = Matrix6::from_fn(|r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionLine {
    /// 1 for axis along the field, 2 otherwise.
    pub p1_type: u8,
    /// MHz
    pub frequency: f64,
    /// Share of the ESR weight of this centre type.
    pub weight: f64,
    /// Nearest integer to the mean lab-frame `⟨I_z⟩` of the two levels.
    pub iz_label: i8,
}

/// ESR lines with `weight ≥ floor`, sorted by frequency.
///
/// A transition counts as ESR when it flips the electron (`|Δ⟨S_z⟩| > ½`);
/// its weight is `|⟨i|S_x|j⟩|²` normalized over all ESR transitions.
pub fn transition_lines(p: &P1Params, floor: f64) -> Result<Vec<TransitionLine>> {
    let h = build_hamiltonian(p)?;
    let (e, v) = diagonalize(&h)?;
    let (s, i) = operators();
    let vd = v.adjoint();
    let sx = vd * s[0] * v;
    let sz = vd * s[2] * v;
    let iz = vd * i[2] * v;
    let p1_type = if (p.axis[2].abs() - 1.0).abs() < 1e-9 {
        1
    } else {
        2
    };
    let mut lines = Vec::new();
    for a in 0..6 {
        for b in a + 1..6 {
            if (sz[(a, a)].re - sz[(b, b)].re).abs() <= 0.5 {
                continue;
            }
            lines.push(TransitionLine {
                p1_type,
                frequency: e[b] - e[a],
                weight: sx[(a, b)].norm_sqr(),
                iz_label: (0.5 * (iz[(a, a)].re + iz[(b, b)].re)).round() as i8,
            });
        }
    }
    let total: f64 = lines.iter().map(|l| l.weight).sum();
    if !(total > 0.0) {
        return Err(Error::Eigen("no electron-spin transitions found".into()));
    }
    for l in &mut lines {
        l.weight /= total;
    }
    // degenerate levels spread one line over several eigenvector pairs
    lines.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    let mut merged: Vec<TransitionLine> = Vec::new();
    for l in lines {
        match merged.last_mut() {
            Some(m) if (l.frequency - m.frequency).abs() < 1e-6 => {
                if l.weight > m.weight {
                    m.iz_label = l.iz_label;
                }
                m.weight += l.weight;
            }
            _ => merged.push(l),
        }
    }
    merged.retain(|l| l.weight >= floor);
    Ok(merged)
}

/// One noise line per ESR line, with user-chosen rms `b` and rate `R`.
pub fn bath_from_lines(lines: &[TransitionLine], b: &[f64], rates: &[f64]) -> Result<BathComposition> {
    if lines.len() != b.len() || lines.len() != rates.len() {
        return Err(invalid(format!(
            "{} lines but {} amplitudes and {} rates",
            lines.len(),
            b.len(),
            rates.len()
        )));
    }
    b.iter()
        .zip(rates)
        .map(|(&bk, &rk)| {
            if rk < 0.0 {
                Err(invalid(format!("negative rate {rk}")))
            } else {
                OuParams::from_rate(bk, rk)
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(BathComposition::new)
}

/// Splits a global `(b, R)` over `lines` in proportion to their weights:
/// `b_k² = b² w_k / Σw`, `R_k = R`.
pub fn split_bath(lines: &[TransitionLine], b: f64, rate: f64) -> Result<BathComposition> {
    let total: f64 = lines.iter().map(|l| l.weight).sum();
    if !(total > 0.0) {
        return Err(invalid("lines carry no weight"));
    }
    let bs: Vec<f64> = lines.iter().map(|l| b * (l.weight / total).sqrt()).collect();
    bath_from_lines(lines, &bs, &vec![rate; lines.len()])
}

/// Adds a quasi-static line (`R = 0`) of rms `b`.
pub fn with_static_line(mut bath: BathComposition, b: f64) -> Result<BathComposition> {
    bath.lines.push(OuParams::static_line(b)?);
    Ok(bath)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn main_lines(p: &P1Params) -> Vec<f64> {
        let mut l = transition_lines(p, 0.1).unwrap();
        l.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        l.iter().map(|l| l.frequency).collect()
    }

    #[test]
    fn hermitian_trace_and_eigenvectors() {
        let p = P1Params::default().with_axis(type2_axes()[0]);
        let h = build_hamiltonian(&p).unwrap();
        assert_eq!((h - h.adjoint()).camax(), 0.0);
        let tr = h.trace();
        assert!((tr.re - 4.0 * p.p).abs() < 1e-10 && tr.im.abs() < 1e-12);
        let (e, v) = diagonalize(&h).unwrap();
        let unit = (v.adjoint() * v - Matrix6::<C>::identity()).camax();
        assert!(unit < 1e-10);
        for k in 0..6 {
            let col = v.column(k);
            let r = (h * col - col * C::new(e[k], 0.0)).norm();
            assert!(r < 1e-9, "residual {r}");
        }
    }

    #[test]
    fn type1_lines() {
        let f = main_lines(&P1Params::default());
        assert_eq!(f.len(), 3);
        for (got, want) in f.iter().zip([217.0, 339.0, 441.0]) {
            assert!((got - want).abs() < 5.0, "{got} vs {want}");
        }
        let lines = transition_lines(&P1Params::default(), WEIGHT_FLOOR).unwrap();
        let labels: Vec<i8> = lines.iter().map(|l| l.iz_label).collect();
        assert_eq!(labels, vec![-1, 0, 1]);
    }

    #[test]
    fn type2_lines_and_axis_invariance() {
        let axes = type2_axes();
        let base = main_lines(&P1Params::default().with_axis(axes[0]));
        assert_eq!(base.len(), 3);
        for (got, want) in base.iter().zip([249.0, 347.0, 417.0]) {
            assert!((got - want).abs() < 5.0, "{got} vs {want}");
        }
        for a in &axes[1..] {
            let f = main_lines(&P1Params::default().with_axis(*a));
            for (x, y) in f.iter().zip(&base) {
                assert!((x - y).abs() < 1e-9);
            }
            assert!((a[2] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bare_zeeman_and_weak_coupling() {
        let p = P1Params {
            a_z: 0.0,
            a_x: 0.0,
            p: 0.0,
            ..Default::default()
        };
        let l = transition_lines(&p, WEIGHT_FLOOR).unwrap();
        assert_eq!(l.len(), 1);
        assert!((l[0].frequency - GAMMA_E * 114.0).abs() < 1e-9);
        assert!((l[0].weight - 1.0).abs() < 1e-12);
        // isotropic A ≪ γB: E ≈ γB m_S + A m_S m_I
        let weak = P1Params {
            a_z: 1.0,
            a_x: 1.0,
            p: 0.0,
            ..Default::default()
        };
        let (e, _) = diagonalize(&build_hamiltonian(&weak).unwrap()).unwrap();
        let zb = GAMMA_E * 114.0;
        let mut want: Vec<f64> = [-0.5, 0.5]
            .iter()
            .flat_map(|&ms| [-1.0, 0.0, 1.0].map(|mi| zb * ms + ms * mi))
            .collect();
        want.sort_by(f64::total_cmp);
        for k in 0..6 {
            assert!((e[k] - want[k]).abs() < 1e-2);
        }
    }

    #[test]
    fn non_unit_axis_rejected() {
        assert!(build_hamiltonian(&P1Params::default().with_axis([0.0, 0.1, 1.0])).is_err());
    }

    #[test]
    fn bath_construction() {
        let lines = transition_lines(&P1Params::default(), WEIGHT_FLOOR).unwrap();
        let bath = split_bath(&lines, 3.3, 0.04).unwrap();
        let eff = bath.compose().unwrap();
        assert!((eff.b() - 3.3).abs() < 1e-12 && (eff.rate() - 0.04).abs() < 1e-15);
        assert!(bath_from_lines(&lines, &[1.0], &[0.1]).is_err());
        assert!(bath_from_lines(&lines, &[1.0; 3], &[0.1, -0.1, 0.1]).is_err());
        let seven = with_static_line(bath, 0.5).unwrap();
        assert_eq!(seven.lines.len(), 4);
        assert!(seven.lines[3].is_static());
    }
}
