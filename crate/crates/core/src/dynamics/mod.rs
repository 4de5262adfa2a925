//! Rotating-frame Hamiltonians, the Lindblad generator and density-matrix
//! propagation for the three-level and four-level + metastable models.

mod density;
mod hamiltonian;
mod integrator;
mod lindblad;
mod oracle;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{DecayParams, Level, LevelScheme, Variant};
use crate::pulses::PulsePair;

pub use density::DensityMatrix;
pub use hamiltonian::{hamiltonian_3, hamiltonian_4};
pub use integrator::{Dopri5, StepCap};
pub use lindblad::{lindblad_rhs, Liouvillian};
pub use oracle::evolve_expm_oracle;
pub use trajectory::{evolve, evolve_from, InvariantReport, Trajectory};

/// Readout delay after the pump center, µs.
pub const PROBE_DELAY: f64 = 300.0;

/// Which of the two prepared ion classes is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleRole {
    /// Stokes resonant with the strong |3⟩–|4⟩ line; the pump sees the weak |1⟩–|4⟩.
    StokesOnStrong,
    /// Stokes resonant with the weak |3⟩–|2⟩ line; the pump sees the strong |1⟩–|2⟩.
    StokesOnWeak,
}

impl EnsembleRole {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleRole::StokesOnStrong => "stokes-on-strong",
            EnsembleRole::StokesOnWeak => "stokes-on-weak",
        }
    }
}

/// Reference frame of the equations of motion. Populations do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    /// Ground |1⟩ rotates with the pump and |3⟩ with the Stokes; only the
    /// crossed couplings oscillate, at the pump–Stokes difference frequency.
    #[default]
    Laser,
    /// Interaction picture of the bare level energies: every coupling carries
    /// its own detuning phase.
    Interaction,
    /// Laser frame with every level energy shifted by the same amount, MHz.
    Shifted(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// One-photon detuning of the Stokes from its reference transition, MHz.
    pub delta_opt: f64,
    /// Two-photon detuning, MHz; the pump sits at Stokes + Δg − δ.
    pub delta_two: f64,
    pub scheme: LevelScheme,
    pub pair: PulsePair,
    pub decay: DecayParams,
    pub ensemble_role: EnsembleRole,
    pub frame: Frame,
}

impl DriveConfig {
    pub fn new(scheme: LevelScheme, pair: PulsePair) -> Self {
        let mut pair = pair;
        pair.dipole_weak_ratio = scheme.dipole_weak_ratio;
        DriveConfig {
            delta_opt: 0.0,
            delta_two: 0.0,
            scheme,
            pair,
            decay: DecayParams::default(),
            ensemble_role: EnsembleRole::StokesOnStrong,
            frame: Frame::Laser,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.pair.validate()?;
        self.decay.validate()?;
        if !self.delta_opt.is_finite() {
            return Err(crate::Error::invalid("delta_opt", "must be finite"));
        }
        if !self.delta_two.is_finite() {
            return Err(crate::Error::invalid("delta_two", "must be finite"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.scheme.n_states()
    }

    /// Excited level whose population is subtracted in the efficiency readout.
    pub fn probed_excited(&self) -> Level {
        match (self.scheme.variant, self.ensemble_role) {
            (Variant::ThreeLevel, _) => Level::Two,
            (Variant::FourLevelMeta, EnsembleRole::StokesOnStrong) => Level::Four,
            (Variant::FourLevelMeta, EnsembleRole::StokesOnWeak) => Level::Two,
        }
    }

    /// From 4 amplitude FWHMs before the earlier pulse to the probe time.
    pub fn default_window(&self) -> (f64, f64) {
        (self.pair.support().0, self.probe_time())
    }

    pub fn probe_time(&self) -> f64 {
        self.pair.pump_center + PROBE_DELAY
    }
}

/// Integrator settings for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Keep dense-output coefficients for interpolation inside the window.
    pub dense: bool,
    /// Record trace, Hermiticity and positivity errors at every accepted step.
    pub track_invariants: bool,
    /// Overrides the automatic cap of 1/(20 f_max) inside the drive window.
    pub max_step: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rtol: 1e-8,
            atol: 1e-10,
            dense: true,
            track_invariants: false,
            max_step: None,
        }
    }
}

impl EvolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(crate::Error::invalid("rtol", "must lie in (0, 1)"));
        }
        if !(self.atol > 0.0) {
            return Err(crate::Error::invalid("atol", "must be > 0"));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(crate::Error::invalid("max_step", "must be > 0"));
            }
        }
        Ok(())
    }
}
