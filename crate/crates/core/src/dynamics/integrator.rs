//! Dormand–Prince 5(4) with Hairer's continuous extension, over complex
//! state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};

// Butcher tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// error estimate: 5th minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 50_000_000;

/// Right-hand side of y' = f(t, y).
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&mut self, t: f64, y: &[Complex64], dy: &mut [Complex64]);
    /// Applied to every accepted state, e.g. to restore a symmetry.
    fn project(&mut self, _y: &mut [Complex64]) {}
}

/// Upper bound on the step inside [start, end).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCap {
    pub start: f64,
    pub end: f64,
    pub max_step: f64,
}

/// One accepted step with its continuous extension.
pub struct Step<'a> {
    pub t_old: f64,
    pub t_new: f64,
    pub y: &'a [Complex64],
    /// Five coefficient vectors, see [`Step::interpolate_with`].
    pub cont: &'a [Vec<Complex64>; 5],
}

impl Step<'_> {
    /// Dense-output weights for θ ∈ [0, 1] along the step.
    pub fn weights(theta: f64) -> [f64; 5] {
        let t1 = 1.0 - theta;
        [1.0, theta, theta * t1, theta * t1 * theta, theta * t1 * theta * t1]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub cap: Option<StepCap>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Dopri5 { rtol, atol, cap: None }
    }

    pub fn with_cap(mut self, cap: Option<StepCap>) -> Self {
        self.cap = cap;
        self
    }

    fn limit(&self, t: f64, h: f64) -> f64 {
        match self.cap {
            Some(cap) if t < cap.start => {
                let gap = cap.start - t;
                if gap < h && gap > 1e-12 * t.abs().max(1.0) {
                    gap
                } else if gap < h {
                    h.min(cap.max_step)
                } else {
                    h
                }
            }
            Some(cap) if t < cap.end => h.min(cap.max_step),
            _ => h,
        }
    }

    fn error_norm(&self, y0: &[Complex64], y1: &[Complex64], err: &[Complex64]) -> f64 {
        let sum: f64 = y0
            .iter()
            .zip(y1)
            .zip(err)
            .map(|((a, b), e)| {
                let sk = self.atol + self.rtol * a.norm().max(b.norm());
                (e.norm() / sk).powi(2)
            })
            .sum();
        (sum / y0.len() as f64).sqrt()
    }

    /// Integrates from `t0` to `t1` in place, calling `observe` after every
    /// accepted step.
    pub fn integrate<S, F>(
        &self,
        sys: &mut S,
        t0: f64,
        t1: f64,
        y: &mut Vec<Complex64>,
        mut observe: F,
    ) -> Result<Stats>
    where
        S: OdeSystem,
        F: FnMut(&Step<'_>),
    {
        let n = sys.dim();
        let zero = Complex64::new(0.0, 0.0);
        let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| vec![zero; n]);
        let mut cont: [Vec<Complex64>; 5] = std::array::from_fn(|_| vec![zero; n]);
        let mut stage = vec![zero; n];
        let mut y_new = vec![zero; n];
        let mut err = vec![zero; n];
        let mut stats = Stats::default();

        let span = t1 - t0;
        let mut t = t0;
        sys.rhs(t, y, &mut k[0]);
        stats.evaluations += 1;

        // initial step from the scale of y and y'
        let scale = |v: &[Complex64], y: &[Complex64]| {
            let s: f64 = v
                .iter()
                .zip(y)
                .map(|(a, b)| (a.norm() / (self.atol + self.rtol * b.norm())).powi(2))
                .sum();
            (s / n as f64).sqrt()
        };
        let d0 = scale(y, y);
        let d1 = scale(&k[0], y);
        let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h = h.min(span);

        let mut rejected_last = false;
        while t < t1 {
            if stats.accepted + stats.rejected > MAX_STEPS {
                return Err(Error::StepUnderflow { t });
            }
            h = self.limit(t, h);
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t });
            }

            macro_rules! combine {
                ($dst:expr, $($c:expr => $ki:expr),+) => {
                    for i in 0..n {
                        $dst[i] = y[i] + h * (Complex64::new(0.0, 0.0) $(+ k[$ki][i] * $c)+);
                    }
                };
            }
            combine!(stage, A21 => 0);
            sys.rhs(t + C2 * h, &stage, &mut k[1]);
            combine!(stage, A31 => 0, A32 => 1);
            sys.rhs(t + C3 * h, &stage, &mut k[2]);
            combine!(stage, A41 => 0, A42 => 1, A43 => 2);
            sys.rhs(t + C4 * h, &stage, &mut k[3]);
            combine!(stage, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
            sys.rhs(t + C5 * h, &stage, &mut k[4]);
            combine!(stage, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
            sys.rhs(t + h, &stage, &mut k[5]);
            combine!(y_new, A71 => 0, A73 => 2, A74 => 3, A75 => 4, A76 => 5);
            sys.rhs(t + h, &y_new, &mut k[6]);
            stats.evaluations += 6;

            for i in 0..n {
                err[i] = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            }
            let e = self.error_norm(y, &y_new, &err);
            if !e.is_finite() {
                return Err(Error::StepUnderflow { t });
            }
            if e <= 1.0 {
                stats.accepted += 1;
                for i in 0..n {
                    let diff = y_new[i] - y[i];
                    let bspl = k[0][i] * h - diff;
                    cont[0][i] = y[i];
                    cont[1][i] = diff;
                    cont[2][i] = bspl;
                    cont[3][i] = diff - k[6][i] * h - bspl;
                    cont[4][i] =
                        (k[0][i] * D1 + k[2][i] * D3 + k[3][i] * D4 + k[4][i] * D5 + k[5][i] * D6 + k[6][i] * D7) * h;
                }
                let t_new = if last { t1 } else { t + h };
                sys.project(&mut y_new);
                std::mem::swap(y, &mut y_new);
                observe(&Step {
                    t_old: t,
                    t_new,
                    y,
                    cont: &cont,
                });
                t = t_new;
                k.swap(0, 6);
                let mut fac = SAFETY * e.max(1e-10).powf(-0.2);
                fac = fac.clamp(FAC_MIN, if rejected_last { 1.0 } else { FAC_MAX });
                h *= fac;
                rejected_last = false;
            } else {
                stats.rejected += 1;
                rejected_last = true;
                h *= (SAFETY * e.powf(-0.2)).max(FAC_MIN);
            }
        }
        Ok(stats)
    }
}
