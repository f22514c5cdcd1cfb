//! Classical dephasing field acting on the central spin.
//!
//! The bath is modelled as one or more independent stationary
//! Ornstein-Uhlenbeck processes `B(t)` with autocorrelation
//! `b² exp(-|t|/tau_c)`, plus a static offset made of the detuning of the
//! drive and the hyperfine shift of the host nuclear spin. Units are
//! angular frequency (rad/µs) and µs throughout; `mhz_to_angular` converts
//! published MHz values at the boundary.
//!
//! Trajectories are integrated with an exact joint sampler of the field
//! value and its time integral over a segment, so Monte Carlo results carry
//! no time-step bias.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::{ou_phase_variance_ratio, phi1};

/// Converts a cyclic frequency in MHz to rad/µs.
pub fn mhz_to_angular(mhz: f64) -> f64 {
    2.0 * PI * mhz
}

/// One Ornstein-Uhlenbeck noise line.
///
/// `tau_c = f64::INFINITY` encodes a quasi-static Gaussian line (rate zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    /// rms amplitude [rad/µs]
    pub b: f64,
    /// correlation time [µs]
    pub tau_c: f64,
}

impl OuParams {
    pub fn new(b: f64, tau_c: f64) -> Result<Self> {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(invalid(format!(
                "noise amplitude b must be finite and >= 0, got {b}"
            )));
        }
        if !(tau_c > 0.0) {
            return Err(invalid(format!("correlation time must be > 0, got {tau_c}")));
        }
        Ok(Self { b, tau_c })
    }

    /// Builds a line from its decay rate `R = 1/tau_c`; `rate = 0` gives a static line.
    pub fn from_rate(b: f64, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(invalid(format!("decay rate must be finite and >= 0, got {rate}")));
        }
        let tau_c = if rate == 0.0 { f64::INFINITY } else { 1.0 / rate };
        Self::new(b, tau_c)
    }

    /// Quasi-static Gaussian line with rms `b`.
    pub fn static_line(b: f64) -> Result<Self> {
        Self::new(b, f64::INFINITY)
    }

    /// Bath fitted to the Hahn-echo and Ramsey decays of the NV sample:
    /// `b = 3.3 µs⁻¹`, `tau_c = 25 µs`.
    pub fn nv_default() -> Self {
        Self { b: 3.3, tau_c: 25.0 }
    }

    /// Correlation decay rate `R = 1/tau_c` [1/µs].
    pub fn rate(&self) -> f64 {
        if self.tau_c.is_infinite() {
            0.0
        } else {
            1.0 / self.tau_c
        }
    }

    pub fn is_static(&self) -> bool {
        self.tau_c.is_infinite()
    }

    /// `C(t) = b² exp(-|t|/tau_c)`.
    pub fn correlation(&self, t: f64) -> f64 {
        self.b * self.b * (-t.abs() * self.rate()).exp()
    }

    /// Draws `B(0)` from the stationary distribution `N(0, b²)`.
    pub fn sample_stationary<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.b * z
    }
}

/// Field value at the end of a segment and the phase accumulated over it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStep {
    pub b_next: f64,
    pub phase_increment: f64,
}

/// Conditional mean and Cholesky factor of `(B(t+Δ), ∫B)` given `B(t)`.
///
/// Precomputing these once per distinct segment length keeps the inner
/// Monte Carlo loop to two normal draws and a handful of flops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    pub delta: f64,
    /// `exp(-RΔ)`
    pub decay: f64,
    /// `(1 - exp(-RΔ))/R`, the mean phase per unit of current field
    pub phase_gain: f64,
    l_bb: f64,
    l_pb: f64,
    l_pp: f64,
}

impl StepCoefficients {
    pub fn new(p: &OuParams, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid(format!("segment length must be > 0, got {delta}")));
        }
        let b2 = p.b * p.b;
        let x = p.rate() * delta;
        let decay = (-x).exp();
        let phase_gain = delta * phi1(x);
        // Var(B_next | B) = b²(1 - e^{-2x})
        let var_b = -b2 * (-2.0 * x).exp_m1();
        // Cov = (b²/R)(1 - e^{-x})² = b² Δ x φ1(x)²
        let cov = b2 * delta * x * phi1(x) * phi1(x);
        // Var(Φ | B) = (b²/R²)(2x - 3 + 4e^{-x} - e^{-2x})
        let var_phi = b2 * delta * delta * ou_phase_variance_ratio(x);
        let l_bb = var_b.max(0.0).sqrt();
        let l_pb = if l_bb > 0.0 { cov / l_bb } else { 0.0 };
        let l_pp = (var_phi - l_pb * l_pb).max(0.0).sqrt();
        Ok(Self {
            delta,
            decay,
            phase_gain,
            l_bb,
            l_pb,
            l_pp,
        })
    }

    /// Conditional variance of the phase increment given the current field.
    pub fn phase_variance(&self) -> f64 {
        self.l_pb * self.l_pb + self.l_pp * self.l_pp
    }

    /// Conditional variance of the next field value.
    pub fn field_variance(&self) -> f64 {
        self.l_bb * self.l_bb
    }

    /// Conditional covariance of next field and phase increment.
    pub fn covariance(&self) -> f64 {
        self.l_bb * self.l_pb
    }

    /// Maps two independent standard normals onto the joint step.
    #[inline]
    pub fn apply(&self, b_current: f64, z1: f64, z2: f64) -> NoiseStep {
        NoiseStep {
            b_next: b_current * self.decay + self.l_bb * z1,
            phase_increment: b_current * self.phase_gain + self.l_pb * z1 + self.l_pp * z2,
        }
    }

    /// Draws one step. Always consumes exactly two standard normals.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, b_current: f64, rng: &mut R) -> NoiseStep {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        self.apply(b_current, z1, z2)
    }
}

/// Exact draw of `(B(t+Δ), ∫_t^{t+Δ} B ds)` conditional on `B(t) = b_current`.
pub fn sample_step<R: Rng + ?Sized>(
    p: &OuParams,
    b_current: f64,
    delta: f64,
    rng: &mut R,
) -> Result<NoiseStep> {
    Ok(StepCoefficients::new(p, delta)?.sample(b_current, rng))
}

/// Static part of the field: drive detuning plus the hyperfine shift of the
/// host nitrogen nucleus, whose projection is redrawn every run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticFieldModel {
    /// `B_dtn` [rad/µs]
    pub detuning: f64,
    /// `A_0` [rad/µs]
    pub hyperfine: f64,
    /// probabilities of `I_z = +1, -1, 0`
    pub iz_probabilities: [f64; 3],
}

/// Outcome of [`StaticFieldModel::sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticDraw {
    pub field: f64,
    pub iz: i8,
}

impl StaticFieldModel {
    pub fn new(detuning: f64, hyperfine: f64, iz_probabilities: [f64; 3]) -> Result<Self> {
        if iz_probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid("I_z probabilities must be nonnegative"));
        }
        let total: f64 = iz_probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("I_z probabilities sum to {total}, expected 1")));
        }
        if !detuning.is_finite() || !hyperfine.is_finite() {
            return Err(invalid("static fields must be finite"));
        }
        Ok(Self {
            detuning,
            hyperfine,
            iz_probabilities,
        })
    }

    /// No static field at all.
    pub fn zero() -> Self {
        Self {
            detuning: 0.0,
            hyperfine: 0.0,
            iz_probabilities: [0.0, 0.0, 1.0],
        }
    }

    /// `B_dtn = -2π·0.5 MHz`, `A_0 = -2π·2.16 MHz` (¹⁴N), `p = (0.5, 0.2, 0.3)`.
    pub fn nv_default() -> Self {
        Self {
            detuning: mhz_to_angular(-0.5),
            hyperfine: mhz_to_angular(-2.16),
            iz_probabilities: [0.5, 0.2, 0.3],
        }
    }

    /// Draws `I_z` with one uniform and returns `B_dtn + A_0 I_z`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> StaticDraw {
        let u: f64 = rng.random();
        let [p_plus, p_minus, _] = self.iz_probabilities;
        let iz = if u < p_plus {
            1
        } else if u < p_plus + p_minus {
            -1
        } else {
            0
        };
        StaticDraw {
            field: self.field_for(iz),
            iz,
        }
    }

    pub fn field_for(&self, iz: i8) -> f64 {
        self.detuning + self.hyperfine * f64::from(iz)
    }
}

/// Several independent noise lines acting additively on the spin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathComposition {
    pub lines: Vec<OuParams>,
}

/// Single-line equivalent of a composition: `b² = Σ b_j²`, `b²R = Σ b_j² R_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveBath {
    pub b_squared: f64,
    pub b_squared_rate: f64,
}

impl EffectiveBath {
    pub fn b(&self) -> f64 {
        self.b_squared.sqrt()
    }

    pub fn rate(&self) -> f64 {
        if self.b_squared == 0.0 {
            0.0
        } else {
            self.b_squared_rate / self.b_squared
        }
    }

    pub fn as_ou_params(&self) -> Result<OuParams> {
        OuParams::from_rate(self.b(), self.rate())
    }
}

impl BathComposition {
    pub fn new(lines: Vec<OuParams>) -> Self {
        Self { lines }
    }

    pub fn single(p: OuParams) -> Self {
        Self { lines: vec![p] }
    }

    pub fn compose(&self) -> Result<EffectiveBath> {
        compose_baths(self)
    }
}

pub fn compose_baths(c: &BathComposition) -> Result<EffectiveBath> {
    if c.lines.is_empty() {
        return Err(Error::EmptyComposition);
    }
    let (b_squared, b_squared_rate) = c.lines.iter().fold((0.0, 0.0), |(s, sr), l| {
        let b2 = l.b * l.b;
        (s + b2, sr + b2 * l.rate())
    });
    Ok(EffectiveBath {
        b_squared,
        b_squared_rate,
    })
}

/// Free-induction decay in the slow-bath limit, `exp(-b²T²/2)`.
pub fn fid_analytic(p: &OuParams, t: f64) -> f64 {
    (-0.5 * p.b * p.b * t * t).exp()
}

/// Hahn-echo time `T_2 = (12 tau_c / b²)^{1/3}`; infinite for a static or empty bath.
pub fn echo_t2(p: &OuParams) -> f64 {
    if p.b == 0.0 || p.is_static() {
        f64::INFINITY
    } else {
        (12.0 * p.tau_c / (p.b * p.b)).cbrt()
    }
}

/// Hahn-echo decay in the slow-bath limit (`b·tau_c ≫ 1`), `exp(-(T/T_2)³)`.
pub fn echo_analytic(p: &OuParams, t: f64) -> f64 {
    let t2 = echo_t2(p);
    if t2.is_infinite() {
        1.0
    } else {
        (-(t / t2).powi(3)).exp()
    }
}
