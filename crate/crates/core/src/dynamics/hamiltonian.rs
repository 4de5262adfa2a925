use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{DriveConfig, EnsembleRole, Frame};
use crate::error::{Error, Result};
use crate::model::{Level, LevelScheme, Variant};
use crate::pulses::PulsePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Field {
    Pump,
    Stokes,
}

/// One field driving one optical transition.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Coupling {
    pub ground: usize,
    pub excited: usize,
    pub field: Field,
    /// Relative dipole moment.
    pub dipole: f64,
    /// Detuning of the field from this transition, MHz.
    pub detuning: f64,
}

/// Time-dependent Hamiltonian in a chosen frame, H_ee' phases e^{-iωt}.
#[derive(Debug, Clone)]
pub(crate) struct Drive {
    pub dim: usize,
    /// Diagonal, rad/µs.
    pub diag: Vec<f64>,
    pub couplings: Vec<Coupling>,
    /// Per coupling: (2π·dipole/2, angular phase rate).
    coeffs: Vec<(f64, f64)>,
    pub pair: PulsePair,
}

fn idx(scheme: &LevelScheme, level: Level) -> usize {
    scheme.index(level).expect("level present in scheme")
}

impl Drive {
    pub fn new(cfg: &DriveConfig) -> Self {
        let scheme = &cfg.scheme;
        let dim = scheme.n_states();
        let r = scheme.dipole_weak_ratio;
        let (delta, delta2) = (cfg.delta_opt, cfg.delta_two);

        // Laser-frame level offsets (cyclic MHz); the Hamiltonian diagonal is −2π·offset.
        let mut offsets = vec![0.0; dim];
        let mut couplings = Vec::new();
        match scheme.variant {
            Variant::ThreeLevel => {
                let (one, two, three) = (0, 1, 2);
                let (d_pump, d_stokes) = match cfg.ensemble_role {
                    EnsembleRole::StokesOnStrong => (r, 1.0),
                    EnsembleRole::StokesOnWeak => (1.0, r),
                };
                // H = 2π·diag(0, Δ, δ) with static couplings
                offsets[two] = -delta;
                offsets[three] = -delta2;
                couplings.push(Coupling {
                    ground: one,
                    excited: two,
                    field: Field::Pump,
                    dipole: d_pump,
                    detuning: offsets[two] - offsets[one],
                });
                couplings.push(Coupling {
                    ground: three,
                    excited: two,
                    field: Field::Stokes,
                    dipole: d_stokes,
                    detuning: offsets[two] - offsets[three],
                });
            }
            Variant::FourLevelMeta => {
                let one = idx(scheme, Level::One);
                let two = idx(scheme, Level::Two);
                let three = idx(scheme, Level::Three);
                let four = idx(scheme, Level::Four);
                let (dg, de) = (scheme.delta_g, scheme.delta_e);
                // Bare energies with the |3⟩–|4⟩ optical frequency removed.
                let mut energy = vec![0.0; dim];
                energy[three] = dg;
                energy[four] = dg;
                energy[two] = dg + de;
                // Stokes detuning from |3⟩–|4⟩ depends on which line it addresses.
                let stokes = match cfg.ensemble_role {
                    EnsembleRole::StokesOnStrong => delta,
                    EnsembleRole::StokesOnWeak => delta + de,
                };
                let pump = stokes + dg - delta2;
                offsets[three] = -delta2;
                for e in [two, four] {
                    offsets[e] = pump - (energy[e] - energy[one]);
                }
                let strong = |g: usize, e: usize| (g == one && e == two) || (g == three && e == four);
                for (field, freq) in [(Field::Stokes, stokes), (Field::Pump, pump)] {
                    for g in [one, three] {
                        for e in [four, two] {
                            couplings.push(Coupling {
                                ground: g,
                                excited: e,
                                field,
                                dipole: if strong(g, e) { 1.0 } else { r },
                                detuning: freq - (energy[e] - energy[g]),
                            });
                        }
                    }
                }
            }
        }

        match cfg.frame {
            Frame::Laser => {}
            Frame::Interaction => offsets.iter_mut().for_each(|f| *f = 0.0),
            Frame::Shifted(c) => offsets.iter_mut().for_each(|f| *f += c),
        }
        let diag = offsets.iter().map(|f| -TAU * f).collect();
        let coeffs = couplings
            .iter()
            .map(|c| {
                let rate = c.detuning - (offsets[c.excited] - offsets[c.ground]);
                (0.5 * TAU * c.dipole, TAU * rate)
            })
            .collect();
        Drive {
            dim,
            diag,
            couplings,
            coeffs,
            pair: cfg.pair,
        }
    }

    /// Fill `h` (row-major, dim²) with H(t) in rad/µs.
    pub fn fill(&self, t: f64, h: &mut [Complex64]) {
        let n = self.dim;
        h.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for i in 0..n {
            h[i * n + i].re = self.diag[i];
        }
        let (op, os) = self.pair.rabi_at(t);
        if op == 0.0 && os == 0.0 {
            return;
        }
        for (c, &(amp, rate)) in self.couplings.iter().zip(&self.coeffs) {
            let omega = match c.field {
                Field::Pump => op,
                Field::Stokes => os,
            };
            if omega == 0.0 {
                continue;
            }
            let v = if rate == 0.0 {
                Complex64::new(amp * omega, 0.0)
            } else {
                let (s, co) = (rate * t).sin_cos();
                Complex64::new(co, -s) * (amp * omega)
            };
            h[c.excited * n + c.ground] += v;
            h[c.ground * n + c.excited] += v.conj();
        }
    }

    pub fn matrix(&self, t: f64) -> DMatrix<Complex64> {
        let mut h = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        self.fill(t, &mut h);
        DMatrix::from_row_slice(self.dim, self.dim, &h)
    }

    /// Fastest oscillation in the equations of motion, cyclic MHz.
    pub fn max_frequency(&self) -> f64 {
        let phases = self.coeffs.iter().map(|&(_, w)| w.abs());
        let splittings = self
            .diag
            .iter()
            .flat_map(|a| self.diag.iter().map(move |b| (a - b).abs()));
        phases.chain(splittings).fold(0.0, f64::max) / TAU
    }
}

pub fn hamiltonian_3(t: f64, cfg: &DriveConfig) -> Result<DMatrix<Complex64>> {
    if cfg.scheme.variant != Variant::ThreeLevel {
        return Err(Error::WrongScheme {
            expected: "three-level",
        });
    }
    Ok(Drive::new(cfg).matrix(t))
}

pub fn hamiltonian_4(t: f64, cfg: &DriveConfig) -> Result<DMatrix<Complex64>> {
    if cfg.scheme.variant != Variant::FourLevelMeta {
        return Err(Error::WrongScheme { expected: "four-level" });
    }
    Ok(Drive::new(cfg).matrix(t))
}
