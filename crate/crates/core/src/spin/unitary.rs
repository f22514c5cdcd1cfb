//! SU(2) propagators in quaternion form.
//!
//! `U = w·1 − i(x σx + y σy + z σz)` with `w² + x² + y² + z² = 1`. Products
//! stay on the unit sphere up to rounding, and the Bloch rotation follows
//! without building a matrix.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PulseErrors;
use crate::error::{invalid, Result};
use crate::sequence::Axis;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinUnitary {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub type Matrix2 = [[Complex64; 2]; 2];

impl SpinUnitary {
    pub const IDENTITY: Self = Self {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// `exp(−iθ n·σ/2)` for a unit axis `n`.
    pub fn rotation(theta: f64, n: [f64; 3]) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Self::new(c, s * n[0], s * n[1], s * n[2])
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Applies `next` after `self`, i.e. returns `next · self`.
    #[inline]
    pub fn then(self, next: Self) -> Self {
        next * self
    }

    /// Image of a Bloch vector under `ρ → UρU†`.
    #[inline]
    pub fn rotate(&self, r: [f64; 3]) -> [f64; 3] {
        let v = self.vector();
        let c1 = cross(v, r);
        let c2 = cross(v, c1);
        [
            r[0] + 2.0 * (self.w * c1[0] + c2[0]),
            r[1] + 2.0 * (self.w * c1[1] + c2[1]),
            r[2] + 2.0 * (self.w * c1[2] + c2[2]),
        ]
    }

    pub fn to_matrix(&self) -> Matrix2 {
        let c = Complex64::new;
        [
            [c(self.w, -self.z), c(-self.y, -self.x)],
            [c(self.y, -self.x), c(self.w, self.z)],
        ]
    }

    /// `‖U†U − 1‖_max` computed on the matrix form.
    pub fn unitarity_error(&self) -> f64 {
        let m = self.to_matrix();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    s += m[k][i].conj() * m[k][j];
                }
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    /// Bloch rotation angle in `[0, π]`.
    pub fn rotation_angle(&self) -> f64 {
        let v = self.vector();
        2.0 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            .sqrt()
            .atan2(self.w.abs())
    }
}

impl Mul for SpinUnitary {
    type Output = Self;

    #[inline]
    fn mul(self, r: Self) -> Self {
        let c = cross(self.vector(), r.vector());
        Self {
            w: self.w * r.w - (self.x * r.x + self.y * r.y + self.z * r.z),
            x: self.w * r.x + r.w * self.x + c[0],
            y: self.w * r.y + r.w * self.y + c[1],
            z: self.w * r.z + r.w * self.z + c[2],
        }
    }
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// 3×3 rotation `R_ij = ½ Tr(σ_i U σ_j U†)` from an arbitrary 2×2 unitary.
/// Independent of the quaternion path and of any global phase.
pub fn bloch_from_matrix(u: &Matrix2) -> [[f64; 3]; 3] {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let paulis: [Matrix2; 3] = [
        [[zero, one], [one, zero]],
        [[zero, -i], [i, zero]],
        [[one, zero], [zero, -one]],
    ];
    let mul = |a: &Matrix2, b: &Matrix2| -> Matrix2 {
        let mut c = [[zero; 2]; 2];
        for r in 0..2 {
            for s in 0..2 {
                c[r][s] = a[r][0] * b[0][s] + a[r][1] * b[1][s];
            }
        }
        c
    };
    let dag =
        |a: &Matrix2| -> Matrix2 { [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]] };
    let ud = dag(u);
    let mut out = [[0.0; 3]; 3];
    for (r, si) in paulis.iter().enumerate() {
        for (c, sj) in paulis.iter().enumerate() {
            let m = mul(&mul(si, u), &mul(sj, &ud));
            out[r][c] = 0.5 * (m[0][0] + m[1][1]).re;
        }
    }
    out
}

/// Rotation-axis components and angle errors of both pulse axes for one
/// nuclear projection.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxisErrors {
    pub eps_x: f64,
    pub eps_y: f64,
    pub n_y: f64,
    pub n_z: f64,
    pub m_x: f64,
    pub m_z: f64,
}

impl AxisErrors {
    pub fn validate(&self) -> Result<()> {
        let all = [self.eps_x, self.eps_y, self.n_y, self.n_z, self.m_x, self.m_z];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("pulse errors must be finite"));
        }
        if self.n_y * self.n_y + self.n_z * self.n_z >= 1.0 {
            return Err(invalid("X-pulse axis needs n_y² + n_z² < 1"));
        }
        if self.m_x * self.m_x + self.m_z * self.m_z >= 1.0 {
            return Err(invalid("Y-pulse axis needs m_x² + m_z² < 1"));
        }
        Ok(())
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            eps_x: lambda * self.eps_x,
            eps_y: lambda * self.eps_y,
            n_y: lambda * self.n_y,
            n_z: lambda * self.n_z,
            m_x: lambda * self.m_x,
            m_z: lambda * self.m_z,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.eps_x, self.eps_y, self.n_y, self.n_z, self.m_x, self.m_z]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            eps_x: a[0],
            eps_y: a[1],
            n_y: a[2],
            n_z: a[3],
            m_x: a[4],
            m_z: a[5],
        }
    }
}

/// Faulty π pulse with explicit axis components.
pub fn axis_pulse_unitary(axis: Axis, e: &AxisErrors) -> Result<SpinUnitary> {
    e.validate()?;
    Ok(match axis {
        Axis::X => {
            let nx = (1.0 - e.n_y * e.n_y - e.n_z * e.n_z).sqrt();
            SpinUnitary::rotation(std::f64::consts::PI + e.eps_x, [nx, e.n_y, e.n_z])
        }
        Axis::Y => {
            let my = (1.0 - e.m_x * e.m_x - e.m_z * e.m_z).sqrt();
            SpinUnitary::rotation(std::f64::consts::PI + e.eps_y, [e.m_x, my, e.m_z])
        }
    })
}

/// Faulty π pulse for nuclear projection `iz`, with `n_z = n_0 I_z` and
/// `m_z = m_0 I_z`.
pub fn pulse_unitary(axis: Axis, e: &PulseErrors, iz: i8) -> Result<SpinUnitary> {
    axis_pulse_unitary(axis, &e.for_iz(iz))
}

/// `exp(−iφσz/2)`: free precession by phase `φ`.
#[inline]
pub fn free_phase_unitary(phi: f64) -> SpinUnitary {
    let (s, c) = (0.5 * phi).sin_cos();
    SpinUnitary::new(c, 0.0, 0.0, s)
}
