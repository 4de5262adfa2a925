use nalgebra::DMatrix;
use num_complex::Complex64;

use super::hamiltonian::Drive;
use super::{DensityMatrix, DriveConfig, EnsembleRole};
use crate::error::{Error, Result};
use crate::model::{Level, LevelScheme, Variant};

/// Incoherent transfer |from⟩ → |to⟩, L = √rate·|to⟩⟨from|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jump {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

/// Generator ρ̇ = −i[H(t), ρ] + D[ρ] for one drive configuration.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub(crate) drive: Drive,
    pub(crate) jumps: Vec<Jump>,
    /// Total decay rate of each coherence ρ_ij (row-major); diagonal holds
    /// the population loss rates.
    damping: Vec<f64>,
    /// Diagonal Lindblad operators realizing the pure dephasing.
    pub(crate) dephasing: Vec<Vec<f64>>,
}

fn jumps_for(cfg: &DriveConfig) -> Vec<Jump> {
    let s = &cfg.scheme;
    let d = &cfg.decay;
    let r2 = s.dipole_weak_ratio * s.dipole_weak_ratio;
    let at = |l: Level| s.index(l).expect("level present");
    let mut jumps = Vec::new();
    let mut push = |from: usize, to: usize, rate: f64| {
        if rate > 0.0 {
            jumps.push(Jump { from, to, rate });
        }
    };
    // Spontaneous decay to the grounds splits as the squared dipole moments.
    let mut to_grounds = |excited: Level, strong_to: Level, weak_to: Level, total: f64| {
        push(at(excited), at(strong_to), total / (1.0 + r2));
        push(at(excited), at(weak_to), total * r2 / (1.0 + r2));
    };
    match s.variant {
        Variant::ThreeLevel => {
            // no reservoir: the full rate returns to the grounds
            let (strong_to, weak_to) = match cfg.ensemble_role {
                EnsembleRole::StokesOnStrong => (Level::Three, Level::One),
                EnsembleRole::StokesOnWeak => (Level::One, Level::Three),
            };
            to_grounds(Level::Two, strong_to, weak_to, d.excited_rate());
        }
        Variant::FourLevelMeta => {
            let ground_rate = (1.0 - d.branch_meta) * d.excited_rate();
            to_grounds(Level::Two, Level::One, Level::Three, ground_rate);
            to_grounds(Level::Four, Level::Three, Level::One, ground_rate);
            let meta_rate = d.branch_meta * d.excited_rate();
            push(at(Level::Two), at(Level::Meta), meta_rate);
            push(at(Level::Four), at(Level::Meta), meta_rate);
            push(at(Level::Meta), at(Level::One), d.meta_to_one * d.meta_rate());
            push(at(Level::Meta), at(Level::Three), (1.0 - d.meta_to_one) * d.meta_rate());
        }
    }
    jumps
}

/// Places every level in the plane so that ½|v_i − v_j|² is the pure
/// dephasing rate of ρ_ij: grounds at (±a, 0), excited and metastable
/// levels at (0, b). Ground–excited coherences dephase at γ_opt and the
/// |1⟩–|3⟩ coherence at γ_spin.
fn dephasing_coordinates(scheme: &LevelScheme, gamma_opt: f64, gamma_spin: f64) -> Vec<[f64; 2]> {
    let a = (0.5 * gamma_spin).sqrt();
    let b = (2.0 * gamma_opt - 0.5 * gamma_spin).max(0.0).sqrt();
    scheme
        .levels()
        .iter()
        .map(|l| match l {
            Level::One => [a, 0.0],
            Level::Three => [-a, 0.0],
            _ => [0.0, b],
        })
        .collect()
}

impl Liouvillian {
    pub fn new(cfg: &DriveConfig) -> Self {
        let drive = Drive::new(cfg);
        let n = drive.dim;
        let jumps = jumps_for(cfg);
        let coords = dephasing_coordinates(&cfg.scheme, cfg.decay.gamma_opt, cfg.decay.gamma_spin);

        let mut loss = vec![0.0; n];
        for j in &jumps {
            loss[j.from] += j.rate;
        }
        let mut damping = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let dx = coords[i][0] - coords[k][0];
                let dy = coords[i][1] - coords[k][1];
                damping[i * n + k] = 0.5 * (loss[i] + loss[k]) + 0.5 * (dx * dx + dy * dy);
            }
        }
        let dephasing = (0..2)
            .map(|axis| coords.iter().map(|c| c[axis]).collect::<Vec<_>>())
            .filter(|op: &Vec<f64>| op.iter().any(|&x| x != 0.0))
            .collect();
        Liouvillian {
            drive,
            jumps,
            damping,
            dephasing,
        }
    }

    pub fn dim(&self) -> usize {
        self.drive.dim
    }

    pub fn hamiltonian(&self, t: f64) -> DMatrix<Complex64> {
        self.drive.matrix(t)
    }

    /// Pure dephasing rate of ρ_ij implied by the dephasing operators.
    pub fn dephasing_rate(&self, i: usize, j: usize) -> f64 {
        self.dephasing.iter().map(|op| 0.5 * (op[i] - op[j]).powi(2)).sum()
    }

    pub(crate) fn max_frequency(&self) -> f64 {
        self.drive.max_frequency()
    }

    /// Writes ρ̇ into `out`; `h` is scratch of the same size.
    pub(crate) fn rhs_into(&self, t: f64, rho: &[Complex64], out: &mut [Complex64], h: &mut [Complex64]) {
        let n = self.drive.dim;
        self.drive.fill(t, h);
        for i in 0..n {
            for j in 0..n {
                let mut comm = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    comm += h[i * n + k] * rho[k * n + j] - rho[i * n + k] * h[k * n + j];
                }
                // −i·comm
                out[i * n + j] = Complex64::new(comm.im, -comm.re) - rho[i * n + j] * self.damping[i * n + j];
            }
        }
        for jump in &self.jumps {
            out[jump.to * n + jump.to] += rho[jump.from * n + jump.from] * jump.rate;
        }
    }

    /// Row-major vectorized generator: vec(ρ̇) = 𝓛(t)·vec(ρ), assembled from
    /// the explicit Lindblad operators.
    pub fn superoperator(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.drive.dim;
        let id = DMatrix::<Complex64>::identity(n, n);
        let h = self.drive.matrix(t);
        let i = Complex64::new(0.0, 1.0);
        // vec(AρB) = (A ⊗ Bᵀ) vec(ρ) for row-major vec
        let mut sup = (h.kronecker(&id) - id.kronecker(&h.transpose())) * (-i);
        let mut ops: Vec<DMatrix<Complex64>> = Vec::new();
        for j in &self.jumps {
            let mut l = DMatrix::zeros(n, n);
            l[(j.to, j.from)] = Complex64::new(j.rate.sqrt(), 0.0);
            ops.push(l);
        }
        for diag in &self.dephasing {
            let v = nalgebra::DVector::from_iterator(n, diag.iter().map(|&x| Complex64::new(x, 0.0)));
            ops.push(DMatrix::from_diagonal(&v));
        }
        let half = Complex64::new(0.5, 0.0);
        for l in &ops {
            let ldl = l.adjoint() * l;
            sup += l.kronecker(&l.map(|z| z.conj()));
            sup -= ldl.kronecker(&id) * half;
            sup -= id.kronecker(&ldl.transpose()) * half;
        }
        sup
    }
}

/// ρ̇ at time `t`.
pub fn lindblad_rhs(t: f64, rho: &DensityMatrix, cfg: &DriveConfig) -> Result<DensityMatrix> {
    let n = cfg.dim();
    if rho.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho.dim(),
        });
    }
    let l = Liouvillian::new(cfg);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    let mut h = out.clone();
    l.rhs_into(t, rho.as_slice(), &mut out, &mut h);
    DensityMatrix::from_vec(n, out)
}
