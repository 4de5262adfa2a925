//! Delayed Gaussian pump/Stokes pulse pair.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DIPOLE_WEAK_RATIO;

/// Pulses vanish beyond this many amplitude FWHMs from their centers.
pub const TRUNCATION_FWHMS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulsePair {
    /// Peak Rabi frequency either field produces on a strong transition, MHz.
    pub peak_rabi_strong: f64,
    /// Intensity FWHM, µs. The Rabi (amplitude) FWHM is √2 times larger.
    pub fwhm_intensity: f64,
    /// Stokes center minus pump center, µs. Negative means Stokes first.
    pub delay: f64,
    pub pump_center: f64,
    pub dipole_weak_ratio: f64,
    /// Optional AOM saturation of the Stokes amplitude, Ω → Ωmax·tanh(Ω/Ωmax).
    pub stokes_saturation: Option<f64>,
}

impl Default for PulsePair {
    fn default() -> Self {
        PulsePair {
            peak_rabi_strong: 0.51,
            fwhm_intensity: 30.0 / std::f64::consts::SQRT_2,
            delay: -17.0,
            pump_center: 0.0,
            dipole_weak_ratio: DIPOLE_WEAK_RATIO,
            stokes_saturation: None,
        }
    }
}

impl PulsePair {
    pub fn new(peak_rabi_strong: f64, fwhm_intensity: f64, delay: f64) -> Self {
        PulsePair {
            peak_rabi_strong,
            fwhm_intensity,
            delay,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm_intensity.is_finite() && self.fwhm_intensity > 0.0) {
            return Err(Error::invalid("fwhm_intensity", "must be finite and > 0"));
        }
        if !(self.peak_rabi_strong.is_finite() && self.peak_rabi_strong >= 0.0) {
            return Err(Error::invalid("peak_rabi_strong", "must be finite and >= 0"));
        }
        if !self.delay.is_finite() {
            return Err(Error::invalid("delay", "must be finite"));
        }
        if !self.pump_center.is_finite() {
            return Err(Error::invalid("pump_center", "must be finite"));
        }
        if !(self.dipole_weak_ratio > 0.0 && self.dipole_weak_ratio <= 1.0) {
            return Err(Error::invalid("dipole_weak_ratio", "must lie in (0, 1]"));
        }
        if let Some(max) = self.stokes_saturation {
            if !(max.is_finite() && max > 0.0) {
                return Err(Error::invalid("stokes_saturation", "must be finite and > 0"));
            }
        }
        Ok(())
    }

    pub fn amplitude_fwhm(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.fwhm_intensity
    }

    pub fn stokes_center(&self) -> f64 {
        self.pump_center + self.delay
    }

    /// Gaussian exponent coefficient a in exp(−a (t − c)²).
    fn rate(&self) -> f64 {
        let w = self.amplitude_fwhm();
        4.0 * LN_2 / (w * w)
    }

    fn half_support(&self) -> f64 {
        TRUNCATION_FWHMS * self.amplitude_fwhm()
    }

    /// Interval outside which both pulses are identically zero.
    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.centers_span();
        (lo - self.half_support(), hi + self.half_support())
    }

    /// Interval where at least one untruncated envelope exceeds `fraction` of its peak.
    pub fn window_above(&self, fraction: f64) -> (f64, f64) {
        let x = ((-fraction.ln()) / self.rate()).sqrt().min(self.half_support());
        let (lo, hi) = self.centers_span();
        (lo - x, hi + x)
    }

    fn centers_span(&self) -> (f64, f64) {
        let (p, s) = (self.pump_center, self.stokes_center());
        (p.min(s), p.max(s))
    }

    fn truncated(&self, t: f64, center: f64) -> (f64, f64) {
        if (t - center).abs() > self.half_support() {
            return (0.0, 0.0);
        }
        let value = envelope(t, center, self);
        (value, -2.0 * self.rate() * (t - center) * value)
    }

    fn saturate(&self, value: f64, slope: f64) -> (f64, f64) {
        match self.stokes_saturation {
            Some(max) => {
                let th = (value / max).tanh();
                (max * th, slope * (1.0 - th * th))
            }
            None => (value, slope),
        }
    }

    /// (Ωp, Ωs) at `t`, both referenced to a strong transition.
    pub fn rabi_at(&self, t: f64) -> (f64, f64) {
        let (p, _) = self.truncated(t, self.pump_center);
        let (s, ds) = self.truncated(t, self.stokes_center());
        (p, self.saturate(s, ds).0)
    }

    /// Time derivatives (dΩp/dt, dΩs/dt), MHz/µs.
    pub fn rabi_derivatives(&self, t: f64) -> (f64, f64) {
        let (_, dp) = self.truncated(t, self.pump_center);
        let (s, ds) = self.truncated(t, self.stokes_center());
        (dp, self.saturate(s, ds).1)
    }
}

/// Gaussian Rabi envelope centered at `center`: peak·exp(−4 ln2 (t−c)² / (√2·fwhm_intensity)²).
pub fn envelope(t: f64, center: f64, pair: &PulsePair) -> f64 {
    let x = t - center;
    pair.peak_rabi_strong * (-pair.rate() * x * x).exp()
}

pub fn rabi_at(t: f64, pair: &PulsePair) -> (f64, f64) {
    pair.rabi_at(t)
}

/// √(Ωp² + Ωs²)
pub fn effective_rabi(omega_p: f64, omega_s: f64) -> f64 {
    omega_p.hypot(omega_s)
}
