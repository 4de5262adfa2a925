//! Closed-form dressed states of the resonant three-level Λ and the
//! adiabaticity criteria built on them.
//!
//! Matrices here are in cyclic MHz: H = [[0, Ωp/2, 0], [Ωp/2, Δ, Ωs/2], [0, Ωs/2, 0]]
//! over the bare basis |1⟩, |2⟩, |3⟩.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pulses::{effective_rabi, PulsePair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingAngles {
    pub theta: f64,
    pub phi: f64,
}

/// tanθ = Ωp/Ωs, tan2φ = Ωeff/Δ.
pub fn mixing_angles(omega_p: f64, omega_s: f64, delta_opt: f64) -> Result<MixingAngles> {
    if omega_p == 0.0 && omega_s == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    Ok(MixingAngles {
        theta: omega_p.atan2(omega_s),
        phi: 0.5 * effective_rabi(omega_p, omega_s).atan2(delta_opt),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressedSystem {
    pub angles: MixingAngles,
    pub a_plus: [f64; 3],
    pub a_zero: [f64; 3],
    pub a_minus: [f64; 3],
    pub w_plus: f64,
    pub w_zero: f64,
    pub w_minus: f64,
}

pub fn dressed_system(omega_p: f64, omega_s: f64, delta_opt: f64) -> Result<DressedSystem> {
    let angles = mixing_angles(omega_p, omega_s, delta_opt)?;
    let (st, ct) = angles.theta.sin_cos();
    let (sp, cp) = angles.phi.sin_cos();
    let root = (delta_opt * delta_opt + omega_p * omega_p + omega_s * omega_s).sqrt();
    Ok(DressedSystem {
        angles,
        a_plus: [st * sp, cp, ct * sp],
        a_zero: [ct, 0.0, -st],
        a_minus: [st * cp, -sp, ct * cp],
        w_plus: 0.5 * (delta_opt + root),
        w_zero: 0.0,
        w_minus: 0.5 * (delta_opt - root),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalAdiabaticity {
    /// |θ̇|, rad/µs.
    pub coupling: f64,
    pub gap_plus: f64,
    pub gap_minus: f64,
    /// coupling / min(gap_plus, gap_minus); small means adiabatic.
    pub ratio: f64,
}

/// Nonadiabatic coupling against the bright-state gaps at time `t`.
///
/// The pump is taken on the weak transition and the Stokes on the strong one
/// (the pairing of the main Λ in the four-level scheme).
pub fn adiabaticity_local(pair: &PulsePair, t: f64, delta_opt: f64) -> Result<LocalAdiabaticity> {
    let r = pair.dipole_weak_ratio;
    let (p, s) = pair.rabi_at(t);
    let (dp, ds) = pair.rabi_derivatives(t);
    let (p, dp) = (r * p, r * dp);
    let norm = p * p + s * s;
    if norm == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    let coupling = ((dp * s - p * ds) / norm).abs();
    let root = (delta_opt * delta_opt + norm).sqrt();
    let gap_plus = (0.5 * (delta_opt + root)).abs();
    let gap_minus = (0.5 * (delta_opt - root)).abs();
    Ok(LocalAdiabaticity {
        coupling,
        gap_plus,
        gap_minus,
        ratio: coupling / gap_plus.min(gap_minus),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalConditions {
    /// Ωeff·τ, should be ≫ 1.
    pub near_res_product: f64,
    /// Ωeff²·τ, MHz; should be ≫ |Δ|.
    pub far_res_lhs: f64,
    pub far_res_rhs: f64,
}

/// Smooth-pulse adiabaticity conditions with Ωeff from the peak strong and
/// weak Rabi frequencies and τ the intensity FWHM.
pub fn global_conditions(pair: &PulsePair, delta_opt: f64) -> GlobalConditions {
    let peak = pair.peak_rabi_strong;
    let omega_eff = effective_rabi(peak, pair.dipole_weak_ratio * peak);
    let tau = pair.fwhm_intensity;
    GlobalConditions {
        near_res_product: omega_eff * tau,
        far_res_lhs: omega_eff * omega_eff * tau,
        far_res_rhs: delta_opt.abs(),
    }
}

/// Summary of the local criterion over a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct AdiabaticityReport {
    pub global: GlobalConditions,
    pub max_ratio: f64,
    pub t_max_ratio: f64,
    /// Mixing angle on the grid, held at its last defined value where both
    /// fields vanish.
    pub theta: Vec<(f64, f64)>,
}

pub fn adiabaticity_report(pair: &PulsePair, delta_opt: f64, window: (f64, f64), samples: usize) -> AdiabaticityReport {
    let samples = samples.max(2);
    let step = (window.1 - window.0) / (samples - 1) as f64;
    let mut theta = Vec::with_capacity(samples);
    let mut held = 0.0;
    let mut max_ratio = 0.0;
    let mut t_max_ratio = window.0;
    for i in 0..samples {
        let t = window.0 + step * i as f64;
        let (p, s) = pair.rabi_at(t);
        if let Ok(angles) = mixing_angles(pair.dipole_weak_ratio * p, s, delta_opt) {
            held = angles.theta;
        }
        theta.push((t, held));
        // deep in the tails the ratio is 0/0-dominated noise
        if effective_rabi(p, s) < 1e-3 * pair.peak_rabi_strong {
            continue;
        }
        if let Ok(local) = adiabaticity_local(pair, t, delta_opt) {
            if local.ratio > max_ratio {
                max_ratio = local.ratio;
                t_max_ratio = t;
            }
        }
    }
    AdiabaticityReport {
        global: global_conditions(pair, delta_opt),
        max_ratio,
        t_max_ratio,
        theta,
    }
}
