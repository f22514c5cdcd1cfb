//! Spin dynamics under noisy free evolution and faulty π pulses.
//!
//! Pulses are instantaneous rotations `exp[−i(π+ε)σ·n/2]` whose axis tilts
//! out of the xy plane in proportion to the host nuclear projection `I_z`.

mod ensemble;
mod expansion;
mod unitary;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use ensemble::{
    ensemble_fidelity, run_trajectory, trajectory_rng, FidelityCurve, InitialState, RunConfig, SegmentPlan,
    TrajectoryResult, CHUNK,
};
pub use expansion::{
    generators, sensitivity, sensitivity_table, standard_columns, static_expansion_check, static_setup,
    static_unitary, ErrorComponent, ExpansionReport, Sensitivity, TableColumn, LAMBDAS, PROBE_PHASES,
    ZERO_THRESHOLD,
};
pub use unitary::{
    axis_pulse_unitary, bloch_from_matrix, free_phase_unitary, pulse_unitary, AxisErrors, Matrix2,
    SpinUnitary,
};

/// Systematic pulse errors. `n_z = n_0 I_z` and `m_z = m_0 I_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseErrors {
    pub eps_x: f64,
    pub eps_y: f64,
    pub n_y: f64,
    pub m_x: f64,
    pub n_0: f64,
    pub m_0: f64,
}

impl Default for PulseErrors {
    fn default() -> Self {
        Self::ideal()
    }
}

impl PulseErrors {
    pub fn ideal() -> Self {
        Self {
            eps_x: 0.0,
            eps_y: 0.0,
            n_y: 0.0,
            m_x: 0.0,
            n_0: 0.0,
            m_0: 0.0,
        }
    }

    /// Values measured for the NV setup: `ε_x = ε_y = −0.02`, `m_x = 0.005`,
    /// `n_0 = m_0 = 0.05`, `n_y = 0`.
    pub fn measured() -> Self {
        Self {
            eps_x: -0.02,
            eps_y: -0.02,
            n_y: 0.0,
            m_x: 0.005,
            n_0: 0.05,
            m_0: 0.05,
        }
    }

    pub fn is_ideal(&self) -> bool {
        *self == Self::ideal()
    }

    pub fn for_iz(&self, iz: i8) -> AxisErrors {
        let iz = f64::from(iz);
        AxisErrors {
            eps_x: self.eps_x,
            eps_y: self.eps_y,
            n_y: self.n_y,
            n_z: self.n_0 * iz,
            m_x: self.m_x,
            m_z: self.m_0 * iz,
        }
    }

    /// Axis norms must stay below one for every `I_z`.
    pub fn validate(&self) -> Result<()> {
        for iz in [-1, 0, 1] {
            self.for_iz(iz)
                .validate()
                .map_err(|e| invalid(format!("pulse errors at I_z={iz}: {e}")))?;
        }
        Ok(())
    }
}
