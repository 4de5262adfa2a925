use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major complex n×n density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// Pure state |k⟩⟨k|.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data[k * dim + k] = Complex64::new(1.0, 0.0);
        DensityMatrix { dim, data }
    }

    /// |ψ⟩⟨ψ| for a normalized amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Self {
        let dim = amplitudes.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in amplitudes {
            for b in amplitudes {
                data.push(a * b.conj());
            }
        }
        DensityMatrix { dim, data }
    }

    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(DensityMatrix { dim, data })
    }

    pub fn from_matrix(m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let dim = m.nrows();
        let data = (0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect();
        Ok(DensityMatrix { dim, data })
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn population(&self, k: usize) -> f64 {
        self.data[k * self.dim + k].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim).map(|k| self.population(k)).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.data[k * self.dim + k]).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// max |ρ_ij − conj(ρ_ji)|
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn symmetrize(&mut self) {
        hermitian_part(self.dim, &mut self.data);
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mut m = self.to_matrix();
        let n = self.dim;
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
            m[(i, i)].im = 0.0;
        }
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn hermitian_part(n: usize, data: &mut [Complex64]) {
    for i in 0..n {
        data[i * n + i].im = 0.0;
        for j in 0..i {
            let avg = 0.5 * (data[i * n + j] + data[j * n + i].conj());
            data[i * n + j] = avg;
            data[j * n + i] = avg.conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_state_properties() {
        let s = 0.5f64.sqrt();
        let rho = DensityMatrix::pure(&[Complex64::new(s, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, 0.0)]);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-15);
        assert!(rho.hermiticity_error() < 1e-16);
        assert!(rho.min_eigenvalue().abs() < 1e-14);
        assert!((rho.get(0, 1) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn symmetrize_repairs_skew() {
        let mut rho = DensityMatrix::basis(3, 0);
        rho.as_mut_slice()[1] = Complex64::new(0.1, 0.2);
        assert!(rho.hermiticity_error() > 0.1);
        rho.symmetrize();
        assert!(rho.hermiticity_error() < 1e-16);
        let back = DensityMatrix::from_matrix(&rho.to_matrix()).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn size_checked() {
        assert!(DensityMatrix::from_vec(3, vec![Complex64::new(0.0, 0.0); 8]).is_err());
    }
}
