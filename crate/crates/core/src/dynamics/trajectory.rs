use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use super::density::hermitian_part;
use super::integrator::{Dopri5, OdeSystem, Step, StepCap};
use super::{DensityMatrix, DriveConfig, EvolveOptions, Liouvillian};
use crate::error::{Error, Result};
use crate::model::Level;

/// Drive is treated as present where an envelope exceeds this fraction of its peak.
const DRIVE_THRESHOLD: f64 = 1e-9;
/// Steps per period of the fastest oscillation inside the drive window.
const STEPS_PER_PERIOD: f64 = 20.0;

/// Worst invariant violations seen at accepted steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantReport {
    pub max_trace_error: f64,
    /// Largest |ρ − ρ†| entry before each re-symmetrization.
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl Default for InvariantReport {
    fn default() -> Self {
        InvariantReport {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

/// Sampled populations and |1⟩–|3⟩ coherence with optional dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    levels: Vec<Level>,
    one: usize,
    three: usize,
    times: Vec<f64>,
    /// Per sample: populations then Re ρ13, Im ρ13.
    observables: Vec<f64>,
    /// Per step i (between samples i and i+1): 5 coefficient blocks.
    dense: Option<Vec<f64>>,
    final_state: DensityMatrix,
    pub invariants: Option<InvariantReport>,
}

impl Trajectory {
    pub(crate) fn new(levels: Vec<Level>, initial: &DensityMatrix, t0: f64, dense: bool) -> Self {
        let one = levels.iter().position(|&l| l == Level::One).expect("|1⟩ present");
        let three = levels.iter().position(|&l| l == Level::Three).expect("|3⟩ present");
        let mut traj = Trajectory {
            levels,
            one,
            three,
            times: Vec::new(),
            observables: Vec::new(),
            dense: dense.then(Vec::new),
            final_state: initial.clone(),
            invariants: None,
        };
        traj.push_state(t0, initial.as_slice());
        traj
    }

    fn width(&self) -> usize {
        self.levels.len() + 2
    }

    pub(crate) fn push_state(&mut self, t: f64, rho: &[Complex64]) {
        let n = self.levels.len();
        self.times.push(t);
        for k in 0..n {
            self.observables.push(rho[k * n + k].re);
        }
        let c = rho[self.one * n + self.three];
        self.observables.push(c.re);
        self.observables.push(c.im);
    }

    fn push_step(&mut self, step: &Step<'_>) {
        let n = self.levels.len();
        let (one, three) = (self.one, self.three);
        if let Some(dense) = self.dense.as_mut() {
            for block in step.cont.iter() {
                for k in 0..n {
                    dense.push(block[k * n + k].re);
                }
                let c = block[one * n + three];
                dense.push(c.re);
                dense.push(c.im);
            }
        }
        self.push_state(step.t_new, step.y);
    }

    pub(crate) fn set_final(&mut self, rho: DensityMatrix) {
        self.final_state = rho;
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn window(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn populations(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.observables[i * w..i * w + self.levels.len()]
    }

    pub fn rho13(&self, i: usize) -> Complex64 {
        let w = self.width();
        let base = i * w + self.levels.len();
        Complex64::new(self.observables[base], self.observables[base + 1])
    }

    pub fn final_state(&self) -> &DensityMatrix {
        &self.final_state
    }

    pub fn level_index(&self, level: Level) -> Option<usize> {
        self.levels.iter().position(|&l| l == level)
    }

    /// Populations then (Re ρ13, Im ρ13) at any time inside the window:
    /// dense output when retained, linear interpolation otherwise.
    pub fn observables_at(&self, t: f64) -> Result<Vec<f64>> {
        let (start, end) = self.window();
        if !(t >= start && t <= end) {
            return Err(Error::OutsideWindow { t, start, end });
        }
        let w = self.width();
        let i = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return Ok(self.observables[i * w..(i + 1) * w].to_vec()),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let theta = (t - t0) / (t1 - t0);
        match &self.dense {
            Some(dense) => {
                let weights = Step::weights(theta);
                let base = i * 5 * w;
                Ok((0..w)
                    .map(|k| (0..5).map(|j| weights[j] * dense[base + j * w + k]).sum())
                    .collect())
            }
            None => Ok((0..w)
                .map(|k| {
                    let a = self.observables[i * w + k];
                    let b = self.observables[(i + 1) * w + k];
                    a + theta * (b - a)
                })
                .collect()),
        }
    }

    pub fn populations_at(&self, t: f64) -> Result<Vec<f64>> {
        let mut obs = self.observables_at(t)?;
        obs.truncate(self.levels.len());
        Ok(obs)
    }

    /// CSV with columns t, P1, P2, P3[, P4][, Pm], |rho13|.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let names: Vec<&str> = self
            .levels
            .iter()
            .map(|l| match l {
                Level::One => "P1",
                Level::Two => "P2",
                Level::Three => "P3",
                Level::Four => "P4",
                Level::Meta => "Pm",
            })
            .collect();
        writeln!(out, "t,{},|rho13|", names.join(","))?;
        for i in 0..self.len() {
            write!(out, "{}", self.times[i])?;
            for p in self.populations(i) {
                write!(out, ",{p}")?;
            }
            writeln!(out, ",{}", self.rho13(i).norm())?;
        }
        Ok(())
    }
}

struct LindbladSystem<'a> {
    generator: &'a Liouvillian,
    scratch: Vec<Complex64>,
    track: bool,
    max_hermiticity: f64,
}

impl OdeSystem for LindbladSystem<'_> {
    fn dim(&self) -> usize {
        self.scratch.len()
    }

    fn rhs(&mut self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        self.generator.rhs_into(t, y, dy, &mut self.scratch);
    }

    fn project(&mut self, y: &mut [Complex64]) {
        let n = self.generator.dim();
        if self.track {
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in i..n {
                    worst = worst.max((y[i * n + j] - y[j * n + i].conj()).norm());
                }
            }
            self.max_hermiticity = self.max_hermiticity.max(worst);
        }
        hermitian_part(n, y);
    }
}

/// Adaptive Dormand–Prince propagation of ρ from |1⟩⟨1| at `window.0`.
pub fn evolve(cfg: &DriveConfig, window: (f64, f64), options: &EvolveOptions) -> Result<Trajectory> {
    let one = cfg.scheme.index(Level::One).expect("|1⟩ present");
    evolve_from(cfg, window, &DensityMatrix::basis(cfg.dim(), one), options)
}

/// As [`evolve`], starting from an arbitrary state.
pub fn evolve_from(
    cfg: &DriveConfig,
    window: (f64, f64),
    initial: &DensityMatrix,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    cfg.validate()?;
    options.validate()?;
    let (t0, t1) = window;
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(Error::invalid("window", "requires finite t0 < t1"));
    }
    let generator = Liouvillian::new(cfg);
    let n = generator.dim();
    if initial.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: initial.dim(),
        });
    }

    let f_max = generator.max_frequency();
    let cap = if cfg.pair.peak_rabi_strong > 0.0 {
        let (start, end) = cfg.pair.window_above(DRIVE_THRESHOLD);
        let auto = (f_max > 0.0).then(|| 1.0 / (STEPS_PER_PERIOD * f_max));
        options
            .max_step
            .or(auto)
            .map(|max_step| StepCap { start, end, max_step })
    } else {
        None
    };

    let mut traj = Trajectory::new(cfg.scheme.levels().to_vec(), initial, t0, options.dense);
    let mut system = LindbladSystem {
        generator: &generator,
        scratch: vec![Complex64::new(0.0, 0.0); n * n],
        track: options.track_invariants,
        max_hermiticity: 0.0,
    };
    let mut report = InvariantReport::default();
    let track = options.track_invariants;
    let mut y = initial.as_slice().to_vec();
    Dopri5::new(options.rtol, options.atol)
        .with_cap(cap)
        .integrate(&mut system, t0, t1, &mut y, |step| {
            traj.push_step(step);
            if track {
                let rho = DensityMatrix::from_vec(n, step.y.to_vec()).expect("square state");
                report.max_trace_error = report.max_trace_error.max((rho.trace() - 1.0).norm());
                report.min_eigenvalue = report.min_eigenvalue.min(rho.min_eigenvalue());
            }
        })?;
    if track {
        report.max_hermiticity_error = system.max_hermiticity;
        traj.invariants = Some(report);
    }
    traj.set_final(DensityMatrix::from_vec(n, y)?);
    Ok(traj)
}
