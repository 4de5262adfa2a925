//! Observables built on the dynamics: transfer efficiency, the four scan
//! types, linewidths, Beer's-law readout and probe-spectrum features.

mod fit;
mod spectrum;

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{evolve, DriveConfig, EnsembleRole, EvolveOptions, Trajectory};
use crate::ensemble::{self, EnsembleSpec, SampledProfile};
use crate::error::{Error, Result};
use crate::exec::{self, Workers};
use crate::model::Level;

pub use fit::{fit_gaussian, fit_gaussian_points, GaussianFit};
pub use spectrum::{predict_spectrum_features, FeatureKind, SpectrumFeature};

/// Reported efficiencies are clamped to this range.
pub const EFFICIENCY_RANGE: (f64, f64) = (-0.05, 1.05);

/// η = P3 − P_exc at `t_probe`, clamped to [`EFFICIENCY_RANGE`].
pub fn transfer_efficiency(traj: &Trajectory, t_probe: f64, probed: Level) -> Result<f64> {
    let three = traj.level_index(Level::Three).expect("|3⟩ present");
    let exc = traj
        .level_index(probed)
        .ok_or_else(|| Error::invalid("probed level", format!("{probed:?} not in this scheme")))?;
    let p = traj.populations_at(t_probe)?;
    Ok(clamp(p[three] - p[exc]))
}

fn clamp(eta: f64) -> f64 {
    eta.clamp(EFFICIENCY_RANGE.0, EFFICIENCY_RANGE.1)
}

fn raw_efficiency(cfg: &DriveConfig, options: &EvolveOptions) -> Result<f64> {
    let opts = EvolveOptions {
        dense: false,
        ..*options
    };
    let traj = evolve(cfg, cfg.default_window(), &opts)?;
    let rho = traj.final_state();
    let three = cfg.scheme.index(Level::Three).expect("|3⟩ present");
    let exc = cfg.scheme.index(cfg.probed_excited()).expect("probed level present");
    Ok(rho.population(three) - rho.population(exc))
}

/// Single evolution over the default window, read out at the probe time.
pub fn efficiency(cfg: &DriveConfig, options: &EvolveOptions) -> Result<f64> {
    raw_efficiency(cfg, options).map(clamp)
}

/// Which prepared ion classes contribute to the probe signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensembles {
    /// Only the class named by `DriveConfig::ensemble_role`.
    #[default]
    Single,
    /// Both classes with equal weight.
    Both,
}

impl Ensembles {
    fn roles(self, cfg: &DriveConfig) -> Vec<EnsembleRole> {
        match self {
            Ensembles::Single => vec![cfg.ensemble_role],
            Ensembles::Both => vec![EnsembleRole::StokesOnStrong, EnsembleRole::StokesOnWeak],
        }
    }
}

/// The swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanKind {
    Delay,
    Optical,
    TwoPhoton,
    Rabi,
}

impl ScanKind {
    pub fn parameter(self) -> &'static str {
        match self {
            ScanKind::Delay => "delay",
            ScanKind::Optical => "delta_opt",
            ScanKind::TwoPhoton => "delta_two",
            ScanKind::Rabi => "peak_rabi_strong",
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            ScanKind::Delay => "us",
            _ => "MHz",
        }
    }

    pub fn apply(self, cfg: &mut DriveConfig, x: f64) {
        match self {
            ScanKind::Delay => cfg.pair.delay = x,
            ScanKind::Optical => cfg.delta_opt = x,
            ScanKind::TwoPhoton => cfg.delta_two = x,
            ScanKind::Rabi => cfg.pair.peak_rabi_strong = x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub evolve: EvolveOptions,
    pub workers: Workers,
    pub ensembles: Ensembles,
    /// Grid spacing for the sampled δ profile of averaged two-photon scans, MHz.
    pub profile_step: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            evolve: EvolveOptions {
                dense: false,
                ..Default::default()
            },
            workers: Workers::default(),
            ensembles: Ensembles::Single,
            profile_step: 0.01,
        }
    }
}

/// Efficiency seen by the probe, averaged over the selected ion classes.
pub fn probe_efficiency(cfg: &DriveConfig, options: &ScanOptions) -> Result<f64> {
    let roles = options.ensembles.roles(cfg);
    let mut acc = 0.0;
    for &role in &roles {
        let mut c = *cfg;
        c.ensemble_role = role;
        acc += raw_efficiency(&c, &options.evolve)?;
    }
    Ok(clamp(acc / roles.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub x: f64,
    pub efficiency: f64,
    /// Averaged over the inhomogeneous δ distribution.
    pub averaged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub parameter: String,
    pub units: String,
    pub points: Vec<ScanPoint>,
    /// Extra `key: value` header lines, e.g. the ensemble quadrature.
    pub metadata: Vec<(String, String)>,
    /// Resolved configuration text the scan was produced from.
    pub config: Option<String>,
}

impl ScanResult {
    pub fn from_points(kind: ScanKind, xs: &[f64], ys: &[f64], averaged: bool) -> Self {
        ScanResult {
            parameter: kind.parameter().to_string(),
            units: kind.units().to_string(),
            points: xs
                .iter()
                .zip(ys)
                .map(|(&x, &efficiency)| ScanPoint {
                    x,
                    efficiency,
                    averaged,
                })
                .collect(),
            metadata: Vec::new(),
            config: None,
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn efficiencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.efficiency).collect()
    }

    /// Index and point of the largest efficiency (first on ties).
    pub fn peak(&self) -> Option<(usize, ScanPoint)> {
        let mut best: Option<(usize, ScanPoint)> = None;
        for (i, p) in self.points.iter().enumerate() {
            if best.is_none_or(|(_, b)| p.efficiency > b.efficiency) {
                best = Some((i, *p));
            }
        }
        best
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.push((key.into(), value.into()));
        self
    }

    pub fn with_config(mut self, text: impl Into<String>) -> Self {
        self.config = Some(text.into());
        self
    }

    /// Commented header (parameter, units, metadata, config hash and the config)
    /// followed by `x,efficiency,averaged` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# parameter: {} ({})", self.parameter, self.units)?;
        for (key, value) in &self.metadata {
            writeln!(out, "# {key}: {value}")?;
        }
        match &self.config {
            Some(text) => {
                writeln!(out, "# config_sha256: {}", config_hash(text))?;
                writeln!(out, "# config:")?;
                for line in text.lines() {
                    writeln!(out, "{}", format!("#   {line}").trim_end())?;
                }
            }
            None => writeln!(out, "# config_sha256: none")?,
        }
        writeln!(out, "{}_{},efficiency,averaged", self.parameter, self.units)?;
        for p in &self.points {
            writeln!(out, "{},{},{}", p.x, p.efficiency, p.averaged)?;
        }
        Ok(())
    }
}

/// Hex SHA-256 of a configuration text.
pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn check_grid(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::invalid("grid", "needs at least one point"));
    }
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid("grid", format!("non-finite value {x}")));
    }
    let up = xs.windows(2).all(|w| w[1] > w[0]);
    let down = xs.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::invalid("grid", "values must be strictly monotone"));
    }
    Ok(())
}

fn annotate(kind: ScanKind, x: f64) -> impl FnOnce(Error) -> Error {
    move |e| Error::ScanPoint {
        parameter: kind.parameter().to_string(),
        x,
        source: Box::new(e),
    }
}

/// One full evolution (per ion class) for every grid value.
pub fn scan(cfg: &DriveConfig, kind: ScanKind, xs: &[f64], options: &ScanOptions) -> Result<ScanResult> {
    cfg.validate()?;
    check_grid(xs)?;
    let ys = exec::try_map(xs, options.workers, |&x| {
        let mut c = *cfg;
        kind.apply(&mut c, x);
        probe_efficiency(&c, options).map_err(annotate(kind, x))
    })?;
    Ok(ScanResult::from_points(kind, xs, &ys, false))
}

pub fn scan_delay(cfg: &DriveConfig, delays: &[f64], options: &ScanOptions) -> Result<ScanResult> {
    scan(cfg, ScanKind::Delay, delays, options)
}

pub fn scan_optical(cfg: &DriveConfig, deltas: &[f64], options: &ScanOptions) -> Result<ScanResult> {
    scan(cfg, ScanKind::Optical, deltas, options)
}

pub fn scan_two_photon(cfg: &DriveConfig, deltas_two: &[f64], options: &ScanOptions) -> Result<ScanResult> {
    scan(cfg, ScanKind::TwoPhoton, deltas_two, options)
}

pub fn scan_rabi(cfg: &DriveConfig, peaks: &[f64], options: &ScanOptions) -> Result<ScanResult> {
    scan(cfg, ScanKind::Rabi, peaks, options)
}

/// Scan averaged over the inhomogeneous δ distribution. Two-photon scans
/// sweep ⟨δ⟩: the δ profile is computed once on a grid and convolved per
/// point. Other scans average full dynamics over the δ nodes at each point,
/// centered on `spec.delta_mean`. Γ = 0 reduces exactly to [`scan`].
pub fn averaged_scan(
    cfg: &DriveConfig,
    kind: ScanKind,
    xs: &[f64],
    spec: &EnsembleSpec,
    options: &ScanOptions,
) -> Result<ScanResult> {
    cfg.validate()?;
    spec.validate()?;
    check_grid(xs)?;
    if spec.gamma_fwhm == 0.0 {
        let mut c = *cfg;
        if kind != ScanKind::TwoPhoton {
            c.delta_two = spec.delta_mean;
        }
        let mut bare = scan(&c, kind, xs, options)?;
        bare.points.iter_mut().for_each(|p| p.averaged = true);
        return Ok(bare);
    }
    if !(options.profile_step > 0.0 && options.profile_step.is_finite()) {
        return Err(Error::invalid("profile_step", "must be finite and > 0"));
    }

    let ys = if kind == ScanKind::TwoPhoton {
        let grid = ensemble::profile_grid(xs, spec, options.profile_step);
        let values = exec::try_map(&grid, options.workers, |&d| {
            let mut c = *cfg;
            c.delta_two = d;
            probe_efficiency(&c, options).map_err(annotate(kind, d))
        })?;
        let profile = SampledProfile::new(grid, values)?;
        xs.iter()
            .map(|&x| ensemble::convolve(&profile, &spec.centered_at(x)).map(clamp))
            .collect::<Result<Vec<f64>>>()?
    } else {
        let nodes = spec.nodes();
        let tasks: Vec<(usize, f64)> = (0..xs.len())
            .flat_map(|i| nodes.iter().map(move |&(d, _)| (i, d)))
            .collect();
        let values = exec::try_map(&tasks, options.workers, |&(i, d)| {
            let mut c = *cfg;
            kind.apply(&mut c, xs[i]);
            c.delta_two = d;
            probe_efficiency(&c, options).map_err(annotate(kind, xs[i]))
        })?;
        values
            .chunks(nodes.len())
            .map(|v| ensemble::weighted_sum(&nodes, v).map(clamp))
            .collect::<Result<Vec<f64>>>()?
    };
    Ok(ScanResult::from_points(kind, xs, &ys, true))
}

/// Full width at half maximum between linear-interpolated crossings, with
/// the baseline at the lower of the two edge values.
pub fn fwhm(scan: &ScanResult) -> Result<f64> {
    let xs = scan.xs();
    let ys = scan.efficiencies();
    fwhm_points(&xs, &ys)
}

pub fn fwhm_points(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::invalid("scan", "needs >= 3 points with matching x and y"));
    }
    let n = ys.len();
    let (ipk, &peak) = ys.iter().enumerate().fold(
        (0, &f64::NEG_INFINITY),
        |best, cur| if cur.1 > best.1 { cur } else { best },
    );
    let base = ys[0].min(ys[n - 1]);
    if !(peak > base) {
        return Err(Error::NotResolvable { side: "both" });
    }
    let half = base + 0.5 * (peak - base);
    let cross = |i: usize, j: usize| xs[i] + (half - ys[i]) * (xs[j] - xs[i]) / (ys[j] - ys[i]);

    let left = (0..ipk)
        .rev()
        .find(|&i| ys[i] <= half)
        .map(|i| cross(i, i + 1))
        .ok_or(Error::NotResolvable { side: "left" })?;
    let right = (ipk + 1..n)
        .find(|&i| ys[i] <= half)
        .map(|i| cross(i - 1, i))
        .ok_or(Error::NotResolvable { side: "right" })?;
    Ok((right - left).abs())
}

/// η from probe transmissions: i1 with equal ground populations, i2 after
/// transfer, i3 with |3⟩ empty. Absorbance scales with P3 and is referenced
/// to P3 = ½.
pub fn beer_efficiency(i1: f64, i2: f64, i3: f64) -> Result<f64> {
    for (name, v) in [("i1", i1), ("i2", i2), ("i3", i3)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(name, "intensity must be finite and > 0"));
        }
    }
    if !(i3 > i1) {
        return Err(Error::invalid("i1", "must be below the empty-level transmission i3"));
    }
    if i2 > i3 {
        return Err(Error::invalid("i2", "must not exceed the empty-level transmission i3"));
    }
    Ok((i3 / i2).ln() / (2.0 * (i3 / i1).ln()))
}
