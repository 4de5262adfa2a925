//! Reference propagator: the vectorized generator frozen at each step's
//! midpoint and exponentiated exactly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{DensityMatrix, DriveConfig, Liouvillian, Trajectory};
use crate::error::{Error, Result};
use crate::model::Level;

pub fn evolve_expm_oracle(cfg: &DriveConfig, window: (f64, f64), dt: f64) -> Result<Trajectory> {
    cfg.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be finite and > 0"));
    }
    let (t0, t1) = window;
    if !(t0 < t1) {
        return Err(Error::invalid("window", "requires t0 < t1"));
    }
    let generator = Liouvillian::new(cfg);
    let n = generator.dim();
    let one = cfg.scheme.index(Level::One).expect("|1⟩ present");
    let initial = DensityMatrix::basis(n, one);
    let steps = ((t1 - t0) / dt).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;

    let mut traj = Trajectory::new(cfg.scheme.levels().to_vec(), &initial, t0, false);
    let mut v = DVector::from_row_slice(initial.as_slice());
    // With both fields off the generator is time independent; reuse it.
    let mut field_free: Option<DMatrix<Complex64>> = None;
    for k in 0..steps {
        let mid = t0 + (k as f64 + 0.5) * h;
        let (p, s) = cfg.pair.rabi_at(mid);
        let propagator = if p == 0.0 && s == 0.0 {
            field_free.get_or_insert_with(|| (generator.superoperator(mid) * Complex64::new(h, 0.0)).exp())
        } else {
            &(generator.superoperator(mid) * Complex64::new(h, 0.0)).exp()
        };
        v = propagator * v;
        let t = if k + 1 == steps { t1 } else { t0 + (k + 1) as f64 * h };
        traj.push_state(t, v.as_slice());
    }
    traj.set_final(DensityMatrix::from_vec(n, v.as_slice().to_vec())?);
    Ok(traj)
}
