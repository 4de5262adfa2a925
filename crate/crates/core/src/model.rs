//! Level schemes, decay constants and the magnetic-field conversion.
//!
//! Every frequency crossing a public interface is in cyclic MHz and every
//! time in microseconds. The factor 2π is applied only when the
//! Hamiltonian is assembled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio of spin-flip to spin-conserving transition dipole moments.
pub const DIPOLE_WEAK_RATIO: f64 = 0.37;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Single Λ: grounds |1⟩, |3⟩ and one excited level |2⟩.
    ThreeLevel,
    /// Two ground and two excited Zeeman levels plus the metastable reservoir.
    FourLevelMeta,
}

/// Bare levels, named as in the usual Tm:YAG diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    One,
    Two,
    Three,
    Four,
    Meta,
}

impl Level {
    pub fn is_excited(self) -> bool {
        matches!(self, Level::Two | Level::Four)
    }

    pub fn is_ground(self) -> bool {
        matches!(self, Level::One | Level::Three)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub variant: Variant,
    /// Ground hyperfine splitting E3 − E1, MHz.
    pub delta_g: f64,
    /// Excited hyperfine splitting E2 − E4, MHz. Ignored by the three-level model.
    pub delta_e: f64,
    pub dipole_weak_ratio: f64,
}

impl LevelScheme {
    pub fn three_level(delta_g: f64) -> Self {
        LevelScheme {
            variant: Variant::ThreeLevel,
            delta_g,
            delta_e: 0.0,
            dipole_weak_ratio: DIPOLE_WEAK_RATIO,
        }
    }

    pub fn four_level(delta_g: f64, delta_e: f64) -> Self {
        LevelScheme {
            variant: Variant::FourLevelMeta,
            delta_g,
            delta_e,
            dipole_weak_ratio: DIPOLE_WEAK_RATIO,
        }
    }

    /// Four-level scheme with the excited splitting fixed at Δg / 2.5.
    pub fn four_level_nominal(delta_g: f64) -> Self {
        Self::four_level(delta_g, delta_g / 2.5)
    }

    pub fn with_weak_ratio(mut self, ratio: f64) -> Self {
        self.dipole_weak_ratio = ratio;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_g.is_finite() && self.delta_g >= 0.0) {
            return Err(Error::invalid("delta_g", "must be finite and >= 0"));
        }
        if !(self.delta_e.is_finite() && self.delta_e >= 0.0) {
            return Err(Error::invalid("delta_e", "must be finite and >= 0"));
        }
        if !(self.dipole_weak_ratio > 0.0 && self.dipole_weak_ratio <= 1.0) {
            return Err(Error::invalid("dipole_weak_ratio", "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        match self.variant {
            Variant::ThreeLevel => 3,
            Variant::FourLevelMeta => 5,
        }
    }

    pub fn levels(&self) -> &'static [Level] {
        match self.variant {
            Variant::ThreeLevel => &[Level::One, Level::Two, Level::Three],
            Variant::FourLevelMeta => &[Level::One, Level::Two, Level::Three, Level::Four, Level::Meta],
        }
    }

    /// Matrix index of a level, if the scheme contains it.
    pub fn index(&self, level: Level) -> Option<usize> {
        self.levels().iter().position(|&l| l == level)
    }
}

/// Population and coherence relaxation. Lifetimes in µs, rates in 1/µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    pub t1_excited: f64,
    pub t1_meta: f64,
    /// Fraction of excited-state decay that ends in the metastable level.
    pub branch_meta: f64,
    /// Pure dephasing rate of ground–excited (optical) coherences.
    pub gamma_opt: f64,
    /// Pure dephasing rate of the |1⟩–|3⟩ coherence.
    pub gamma_spin: f64,
    /// Fraction of metastable decay returning to |1⟩; the rest goes to |3⟩.
    pub meta_to_one: f64,
}

impl Default for DecayParams {
    fn default() -> Self {
        DecayParams {
            t1_excited: 800.0,
            t1_meta: 10_000.0,
            branch_meta: 0.75,
            gamma_opt: 0.01,
            gamma_spin: 0.001,
            meta_to_one: 0.5,
        }
    }
}

impl DecayParams {
    /// Lifetimes so long and rates so small that the evolution is unitary to
    /// well below integrator tolerance.
    pub fn none() -> Self {
        DecayParams {
            t1_excited: f64::INFINITY,
            t1_meta: f64::INFINITY,
            branch_meta: 0.75,
            gamma_opt: 0.0,
            gamma_spin: 0.0,
            meta_to_one: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1_excited > 0.0) {
            return Err(Error::invalid("t1_excited", "must be > 0"));
        }
        if !(self.t1_meta > 0.0) {
            return Err(Error::invalid("t1_meta", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.branch_meta) {
            return Err(Error::invalid("branch_meta", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.meta_to_one) {
            return Err(Error::invalid("meta_to_one", "must lie in [0, 1]"));
        }
        if !(self.gamma_opt.is_finite() && self.gamma_opt >= 0.0) {
            return Err(Error::invalid("gamma_opt", "must be finite and >= 0"));
        }
        if !(self.gamma_spin.is_finite() && self.gamma_spin >= 0.0) {
            return Err(Error::invalid("gamma_spin", "must be finite and >= 0"));
        }
        // Pairwise dephasing rates must come from a valid set of Lindblad
        // operators: sqrt(rates) obey the triangle inequality.
        if self.gamma_spin > 4.0 * self.gamma_opt {
            return Err(Error::invalid(
                "gamma_spin",
                "must not exceed 4 * gamma_opt (no Lindblad form otherwise)",
            ));
        }
        Ok(())
    }

    pub fn excited_rate(&self) -> f64 {
        1.0 / self.t1_excited
    }

    pub fn meta_rate(&self) -> f64 {
        1.0 / self.t1_meta
    }
}

/// Linear Zeeman rates of the splittings and of the Raman inhomogeneous width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldToScheme {
    pub dg_per_tesla: f64,
    pub de_per_tesla: f64,
    pub gamma_raman_per_tesla: f64,
}

pub const TM_YAG: FieldToScheme = FieldToScheme {
    dg_per_tesla: 41.0,
    de_per_tesla: 16.0,
    gamma_raman_per_tesla: 0.4,
};

impl FieldToScheme {
    /// Four-level scheme and Raman inhomogeneous FWHM (MHz) at field `b` tesla.
    pub fn scheme_at(&self, b: f64) -> Result<(LevelScheme, f64)> {
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::invalid("field_tesla", "must be finite and >= 0"));
        }
        let scheme = LevelScheme::four_level(self.dg_per_tesla * b, self.de_per_tesla * b);
        Ok((scheme, self.gamma_raman_per_tesla * b))
    }
}

pub fn scheme_from_field(b: f64) -> Result<(LevelScheme, f64)> {
    TM_YAG.scheme_at(b)
}
