//! Gaussian inhomogeneous distribution of two-photon detunings and the
//! quadrature that averages δ-dependent observables over it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// FWHM / σ for a Gaussian.
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// ⟨δ⟩, MHz.
    pub delta_mean: f64,
    /// Γ, inhomogeneous FWHM, MHz.
    pub gamma_fwhm: f64,
    pub n_nodes: usize,
    /// Half-width of the integration range in units of σ.
    pub span: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            delta_mean: 0.0,
            gamma_fwhm: 0.0,
            n_nodes: 41,
            span: 3.0,
        }
    }
}

impl EnsembleSpec {
    pub fn new(delta_mean: f64, gamma_fwhm: f64) -> Self {
        EnsembleSpec {
            delta_mean,
            gamma_fwhm,
            ..Default::default()
        }
    }

    pub fn with_nodes(mut self, n_nodes: usize) -> Self {
        self.n_nodes = n_nodes;
        self
    }

    pub fn centered_at(mut self, delta_mean: f64) -> Self {
        self.delta_mean = delta_mean;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta_mean.is_finite() {
            return Err(Error::invalid("delta_mean", "must be finite"));
        }
        if !(self.gamma_fwhm >= 0.0 && self.gamma_fwhm.is_finite()) {
            return Err(Error::invalid("gamma_fwhm", "must be finite and >= 0"));
        }
        if self.n_nodes < 5 || self.n_nodes.is_multiple_of(2) {
            return Err(Error::invalid("n_nodes", "must be odd and >= 5"));
        }
        if !(self.span >= 2.0 && self.span.is_finite()) {
            return Err(Error::invalid("span", "must be finite and >= 2"));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.gamma_fwhm / FWHM_PER_SIGMA
    }

    /// Spacing of the quadrature grid, MHz (zero for Γ = 0).
    pub fn node_spacing(&self) -> f64 {
        2.0 * self.span * self.sigma() / (self.n_nodes - 1) as f64
    }

    /// Offsets from ⟨δ⟩ and normalized weights. Γ = 0 collapses to one node.
    pub fn offsets(&self) -> Vec<(f64, f64)> {
        if self.gamma_fwhm == 0.0 {
            return vec![(0.0, 1.0)];
        }
        let sigma = self.sigma();
        let h = self.node_spacing();
        let n = self.n_nodes;
        let half = (n / 2) as f64;
        let raw: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let x = (k as f64 - half) * h;
                let trapezoid = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                (x, trapezoid * (-0.5 * (x / sigma).powi(2)).exp())
            })
            .collect();
        let total: f64 = raw.iter().map(|&(_, w)| w).sum();
        raw.into_iter().map(|(x, w)| (x, w / total)).collect()
    }

    /// Absolute node positions δ and weights.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        self.offsets()
            .into_iter()
            .map(|(x, w)| (self.delta_mean + x, w))
            .collect()
    }
}

/// Weighted quadrature of `profile` over the distribution.
pub fn average<F: FnMut(f64) -> f64>(mut profile: F, spec: &EnsembleSpec) -> Result<f64> {
    spec.validate()?;
    let nodes = spec.nodes();
    let values: Vec<f64> = nodes.iter().map(|&(d, _)| profile(d)).collect();
    weighted_sum(&nodes, &values)
}

/// Reduces precomputed node values, in node order.
pub fn weighted_sum(nodes: &[(f64, f64)], values: &[f64]) -> Result<f64> {
    if nodes.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    let mut acc = 0.0;
    for (node, (&(delta, w), &v)) in nodes.iter().zip(values).enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteProfile { node, delta });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Natural cubic spline through samples of a δ profile.
#[derive(Debug, Clone)]
pub struct SampledProfile {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl SampledProfile {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        if xs.len() < 2 || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("profile grid", "needs >= 2 strictly increasing points"));
        }
        if let Some(node) = ys.iter().position(|y| !y.is_finite()) {
            return Err(Error::NonFiniteProfile { node, delta: xs[node] });
        }
        let n = xs.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // tridiagonal solve for interior second derivatives
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
                let rhs = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0) - h0 * d[i - 1];
                c[i] = h1 / diag;
                d[i] = rhs / diag;
            }
            for i in (1..n - 1).rev() {
                second[i] = d[i] - c[i] * second[i + 1];
            }
        }
        Ok(SampledProfile { xs, ys, second })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Spline value; outside the grid the end values are held.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = 1.0 - a;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }
}

/// Uniform δ grid, spacing at most `max_step`, covering every node needed to
/// average at each of `means`. Nodes between grid points are interpolated.
pub fn profile_grid(means: &[f64], spec: &EnsembleSpec, max_step: f64) -> Vec<f64> {
    let reach = spec.span * spec.sigma();
    let lo = means.iter().cloned().fold(f64::INFINITY, f64::min) - reach;
    let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + reach;
    if !(hi > lo) {
        return vec![lo];
    }
    let n = ((hi - lo) / max_step).ceil() as usize;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// Averages a sampled profile over the distribution centered at `spec.delta_mean`.
pub fn convolve(profile: &SampledProfile, spec: &EnsembleSpec) -> Result<f64> {
    average(|d| profile.eval(d), spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian(fwhm: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| (-4.0 * 2f64.ln() * x * x / (fwhm * fwhm)).exp()
    }

    #[test]
    fn zero_width_is_a_point_evaluation() {
        let spec = EnsembleSpec::new(0.123, 0.0);
        let v = average(|d| d.sin() + 3.0, &spec).unwrap();
        assert_eq!(v, 0.123f64.sin() + 3.0);
    }

    #[test]
    fn weights_are_normalized() {
        for n in [5, 41, 81, 201] {
            let spec = EnsembleSpec::new(0.0, 0.21).with_nodes(n);
            let total: f64 = spec.offsets().iter().map(|&(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!((average(|_| 0.37, &spec).unwrap() - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn center_node_sits_on_the_mean() {
        let spec = EnsembleSpec::new(0.4, 0.08);
        let nodes = spec.nodes();
        assert_eq!(nodes[20].0, 0.4);
        assert!((nodes[0].0 - (0.4 - 3.0 * spec.sigma())).abs() < 1e-15);
    }

    #[test]
    fn gaussian_convolution_identity() {
        let w = 0.3;
        let spec = EnsembleSpec::new(0.0, w);
        let got = average(gaussian(w), &spec).unwrap();
        // dense midpoint quadrature of the same truncated average
        let sigma = spec.sigma();
        let (mut num, mut den) = (0.0, 0.0);
        let m = 200_000;
        for k in 0..m {
            let x = -3.0 * sigma + 6.0 * sigma * (k as f64 + 0.5) / m as f64;
            let g = (-0.5 * (x / sigma).powi(2)).exp();
            num += g * gaussian(w)(x);
            den += g;
        }
        let dense = num / den;
        assert!((got - dense).abs() < 1e-4, "{got} vs {dense}");
        let fine = average(gaussian(w), &spec.with_nodes(401)).unwrap();
        assert!((fine - dense).abs() < 1e-6, "{fine} vs {dense}");
        // untruncated identity is peak/√2; ±3σ truncation moves it by ~2e-3
        assert!((got - 0.5f64.sqrt()).abs() < 3e-3);
    }

    #[test]
    fn doubling_nodes_changes_little() {
        let profile = |d: f64| 0.9 * gaussian(0.32)(d - 0.02) + 0.05 * (d * 20.0).cos() * gaussian(1.0)(d);
        for gamma in [0.05, 0.08, 0.21] {
            let spec = EnsembleSpec::new(0.01, gamma);
            let a = average(profile, &spec).unwrap();
            let b = average(profile, &spec.with_nodes(81)).unwrap();
            assert!((a - b).abs() < 1e-3, "{gamma}: {a} {b}");
        }
    }

    #[test]
    fn rejects_bad_specs_and_values() {
        assert!(EnsembleSpec::new(0.0, -1.0).validate().is_err());
        assert!(EnsembleSpec::new(0.0, 0.1).with_nodes(40).validate().is_err());
        assert!(EnsembleSpec::new(0.0, 0.1).with_nodes(3).validate().is_err());
        let spec = EnsembleSpec {
            span: 1.5,
            ..EnsembleSpec::new(0.0, 0.1)
        };
        assert!(spec.validate().is_err());
        let spec = EnsembleSpec::new(0.0, 0.1);
        match average(|d| if d > 0.05 { f64::NAN } else { 1.0 }, &spec) {
            Err(Error::NonFiniteProfile { node, delta }) => {
                assert!(delta > 0.05);
                assert_eq!(spec.nodes()[node].0, delta);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spline_reproduces_lines_and_holds_ends() {
        let xs: Vec<f64> = (0..30).map(|k| -1.0 + k as f64 * 0.07).collect();
        let f = |x: f64| 0.3 * x - 0.2;
        let s = SampledProfile::new(xs.clone(), xs.iter().map(|&x| f(x)).collect()).unwrap();
        for k in 0..100 {
            let x = -1.0 + 2.0 * k as f64 / 99.0;
            let x = x.min(s.range().1);
            assert!((s.eval(x) - f(x)).abs() < 1e-12);
        }
        assert_eq!(s.eval(-5.0), f(-1.0));
        let g = gaussian(0.32);
        let xs: Vec<f64> = (0..=200).map(|k| -1.0 + k as f64 * 0.01).collect();
        let s = SampledProfile::new(xs.clone(), xs.iter().map(|&x| g(x)).collect()).unwrap();
        assert!((s.eval(0.123_4) - g(0.123_4)).abs() < 1e-6);
    }

    #[test]
    fn grid_covers_all_nodes() {
        let spec = EnsembleSpec::new(0.0, 0.08);
        let means = [-1.0, 0.0, 1.0];
        let grid = profile_grid(&means, &spec, 0.01);
        let reach = 3.0 * spec.sigma();
        assert!((grid[0] - (-1.0 - reach)).abs() < 1e-12);
        assert!((grid[grid.len() - 1] - (1.0 + reach)).abs() < 1e-12);
        assert!(grid.windows(2).all(|w| w[1] - w[0] <= 0.01 + 1e-15));
    }

    proptest! {
        #[test]
        fn average_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, gamma in 0.0f64..0.5, mean in -1.0f64..1.0) {
            let spec = EnsembleSpec::new(mean, gamma);
            let f = |d: f64| (3.0 * d).sin();
            let g = |d: f64| d * d - 0.1;
            let lhs = average(|d| a * f(d) + b * g(d), &spec).unwrap();
            let rhs = a * average(f, &spec).unwrap() + b * average(g, &spec).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn average_is_monotone(shift in 0.0f64..0.5, gamma in 0.0f64..0.5, mean in -1.0f64..1.0) {
            let spec = EnsembleSpec::new(mean, gamma);
            let f = |d: f64| gaussian(0.3)(d);
            let lo = average(f, &spec).unwrap();
            let hi = average(|d| f(d) + shift * (d * 7.0).cos().abs(), &spec).unwrap();
            prop_assert!(hi >= lo);
        }

        #[test]
        fn averaged_gaussian_is_broader(gamma in 0.02f64..0.4) {
            // FWHM of the averaged curve never falls below the bare one
            let w = 0.32;
            let bare = gaussian(w);
            let peak = average(&bare, &EnsembleSpec::new(0.0, gamma)).unwrap();
            let at_half = average(&bare, &EnsembleSpec::new(w / 2.0, gamma)).unwrap();
            prop_assert!(at_half / peak >= 0.5 - 1e-12);
        }
    }
}
