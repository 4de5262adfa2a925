use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use super::{fwhm_points, ScanResult};
use crate::error::{Error, Result};

const FOUR_LN2: f64 = 4.0 * std::f64::consts::LN_2;
const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-10;

/// amplitude·exp(−4 ln2 (x − center)² / fwhm²) + offset
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    pub amplitude: f64,
    pub center: f64,
    pub fwhm: f64,
    pub offset: f64,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl GaussianFit {
    pub fn eval(&self, x: f64) -> f64 {
        model(&Vector4::new(self.amplitude, self.center, self.fwhm, self.offset), x)
    }
}

fn model(p: &Vector4<f64>, x: f64) -> f64 {
    let u = (x - p[1]) / p[2];
    p[0] * (-FOUR_LN2 * u * u).exp() + p[3]
}

fn residuals(p: &Vector4<f64>, xs: &[f64], ys: &[f64]) -> (Vec<f64>, f64) {
    let r: Vec<f64> = xs.iter().zip(ys).map(|(&x, &y)| y - model(p, x)).collect();
    let cost = r.iter().map(|v| v * v).sum();
    (r, cost)
}

/// Normal equations JᵀJ and Jᵀr with the analytic Jacobian of the model.
fn normal_equations(p: &Vector4<f64>, xs: &[f64], r: &[f64]) -> (Matrix4<f64>, Vector4<f64>) {
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    for (&x, &ri) in xs.iter().zip(r) {
        let d = x - p[1];
        let e = (-FOUR_LN2 * d * d / (p[2] * p[2])).exp();
        let g = 2.0 * FOUR_LN2 * p[0] * e * d / (p[2] * p[2]);
        let row = Vector4::new(e, g, g * d / p[2], 1.0);
        jtj += row * row.transpose();
        jtr += row * ri;
    }
    (jtj, jtr)
}

pub fn fit_gaussian(scan: &ScanResult) -> Result<GaussianFit> {
    fit_gaussian_points(&scan.xs(), &scan.efficiencies())
}

/// Levenberg–Marquardt least squares, started from the peak sample, the
/// interpolated width and the lower edge value.
pub fn fit_gaussian_points(xs: &[f64], ys: &[f64]) -> Result<GaussianFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 5 {
        return Err(Error::invalid("scan", "Gaussian fit needs >= 5 points"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("scan", "non-finite sample"));
    }
    let n = xs.len();
    let (ipk, &peak) = ys.iter().enumerate().fold(
        (0, &f64::NEG_INFINITY),
        |best, cur| if cur.1 > best.1 { cur } else { best },
    );
    let offset = ys[0].min(ys[n - 1]);
    let span = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);

    let scale = ys.iter().map(|y| y.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if peak - ys.iter().cloned().fold(f64::INFINITY, f64::min) <= 1e-12 * scale {
        // flat data: no peak, no width
        let mean = ys.iter().sum::<f64>() / n as f64;
        let residual_norm = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>().sqrt();
        return Ok(GaussianFit {
            amplitude: 0.0,
            center: xs[ipk],
            fwhm: 0.0,
            offset: mean,
            residual_norm,
            converged: false,
            iterations: 0,
        });
    }
    let width = fwhm_points(xs, ys).unwrap_or(span / 4.0).max(span * 1e-6);
    let mut p = Vector4::new(peak - offset, xs[ipk], width, offset);
    let (mut r, mut cost) = residuals(&p, xs, ys);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(&p, xs, &r);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let (tr, tcost) = residuals(&trial, xs, ys);
            if tcost.is_finite() && tcost <= cost {
                let rel = step.norm() / (p.norm() + f64::MIN_POSITIVE);
                p = trial;
                r = tr;
                cost = tcost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                converged = rel < STEP_TOLERANCE;
                break;
            }
            lambda *= 10.0;
        }
        if converged || !accepted {
            // no downhill step left: the current point is the minimum to precision
            converged = converged || cost <= 1e-28 * scale * scale * n as f64;
            break;
        }
    }
    Ok(GaussianFit {
        amplitude: p[0],
        center: p[1],
        fwhm: p[2].abs(),
        offset: p[3],
        residual_norm: cost.sqrt(),
        converged,
        iterations,
    })
}
