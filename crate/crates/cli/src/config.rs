//! Run configuration: `[section]` headers, `key = value` lines, `#` comments.
//! The text is parsed as TOML; every section rejects unknown keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stirap_core::analysis::{Ensembles, ScanKind, ScanOptions};
use stirap_core::dynamics::{DriveConfig, EnsembleRole, EvolveOptions, Frame};
use stirap_core::ensemble::EnsembleSpec;
use stirap_core::exec::Workers;
use stirap_core::model::{DecayParams, LevelScheme, Variant, DIPOLE_WEAK_RATIO, TM_YAG};
use stirap_core::pulses::PulsePair;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub variant: Variant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_g: Option<f64>,
    /// Defaults to delta_g / 2.5.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_e: Option<f64>,
    /// Derives delta_g, delta_e (and Γ when unset) from the Tm:YAG Zeeman rates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_tesla: Option<f64>,
    pub dipole_weak_ratio: f64,
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            variant: Variant::FourLevelMeta,
            delta_g: None,
            delta_e: None,
            field_tesla: None,
            dipole_weak_ratio: DIPOLE_WEAK_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulsesSection {
    pub peak_rabi_strong: f64,
    pub fwhm_intensity: f64,
    pub delay: f64,
    pub pump_center: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stokes_saturation: Option<f64>,
}

impl Default for PulsesSection {
    fn default() -> Self {
        let pair = PulsePair::default();
        PulsesSection {
            peak_rabi_strong: pair.peak_rabi_strong,
            fwhm_intensity: pair.fwhm_intensity,
            delay: pair.delay,
            pump_center: pair.pump_center,
            stokes_saturation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameName {
    #[default]
    Laser,
    Interaction,
    Shifted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveSection {
    pub delta_opt: f64,
    pub delta_two: f64,
    pub ensemble_role: EnsembleRole,
    pub frame: FrameName,
    /// Common level shift for `frame = "shifted"`, MHz.
    pub frame_shift: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection {
            delta_opt: 0.0,
            delta_two: 0.0,
            ensemble_role: EnsembleRole::StokesOnStrong,
            frame: FrameName::Laser,
            frame_shift: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecaySection {
    pub t1_excited: f64,
    pub t1_meta: f64,
    pub branch_meta: f64,
    pub gamma_opt: f64,
    pub gamma_spin: f64,
    pub meta_to_one: f64,
}

impl Default for DecaySection {
    fn default() -> Self {
        let d = DecayParams::default();
        DecaySection {
            t1_excited: d.t1_excited,
            t1_meta: d.t1_meta,
            branch_meta: d.branch_meta,
            gamma_opt: d.gamma_opt,
            gamma_spin: d.gamma_spin,
            meta_to_one: d.meta_to_one,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rtol: f64,
    pub atol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    pub track_invariants: bool,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let o = EvolveOptions::default();
        IntegratorSection {
            rtol: o.rtol,
            atol: o.atol,
            max_step: None,
            track_invariants: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    /// Raman inhomogeneous FWHM Γ, MHz.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_fwhm: Option<f64>,
    pub delta_mean: f64,
    pub n_nodes: usize,
    pub span: f64,
    pub profile_step: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        let s = EnsembleSpec::default();
        EnsembleSection {
            gamma_fwhm: None,
            delta_mean: s.delta_mean,
            n_nodes: s.n_nodes,
            span: s.span,
            profile_step: ScanOptions::default().profile_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ScanKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Explicit grid; excludes start/stop/points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    pub ensembles: Ensembles,
    pub fit: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeaturesSection {
    pub nu_s: f64,
    /// Defaults to nu_s + delta_g (two-photon resonance).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_p: Option<f64>,
}

/// Execution settings; they do not change results and are not embedded in outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            workers: 0,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scheme: SchemeSection,
    pub pulses: PulsesSection,
    pub drive: DriveSection,
    pub decay: DecaySection,
    pub integrator: IntegratorSection,
    pub ensemble: EnsembleSection,
    pub scan: ScanSection,
    pub features: FeaturesSection,
    #[serde(skip_serializing)]
    pub run: RunSection,
}

/// Split `section.key=value`; the value is read as a TOML value, or as a
/// bare string when it does not parse as one.
fn parse_override(text: &str) -> Result<(String, String, toml::Value), CliError> {
    let (path, raw) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{text}`: expected section.key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| CliError::Config(format!("override `{text}`: key must be section.key")))?;
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((section.to_string(), key.to_string(), value))
}

impl RunConfig {
    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            let (section, key, value) = parse_override(o)?;
            let entry = table
                .entry(section.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let toml::Value::Table(sec) = entry else {
                return Err(CliError::Config(format!("`{section}` is not a section")));
            };
            sec.insert(key, value);
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text, overrides)
    }

    /// Fill derived defaults, then validate every section. The result
    /// serializes to a config that reproduces the run on its own.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let s = &mut self.scheme;
        if let Some(b) = s.field_tesla {
            if s.delta_g.is_some() || s.delta_e.is_some() {
                return Err(CliError::Config(
                    "scheme.field_tesla: give either field_tesla or delta_g/delta_e, not both".into(),
                ));
            }
            let (scheme, gamma) = TM_YAG.scheme_at(b).map_err(qualify)?;
            s.delta_g = Some(scheme.delta_g);
            s.delta_e = Some(scheme.delta_e);
            self.ensemble.gamma_fwhm.get_or_insert(gamma);
            s.field_tesla = None;
        }
        let dg = *s.delta_g.get_or_insert(7.1);
        s.delta_e.get_or_insert(dg / 2.5);
        self.ensemble.gamma_fwhm.get_or_insert(0.0);
        if self.features.nu_p.is_none() {
            self.features.nu_p = Some(self.features.nu_s + dg);
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.drive_config().validate().map_err(qualify)?;
        self.evolve_options(false).validate().map_err(qualify)?;
        self.ensemble_spec().validate().map_err(qualify)?;
        let step = self.ensemble.profile_step;
        if !(step.is_finite() && step > 0.0) {
            return Err(CliError::Config("ensemble.profile_step: must be finite and > 0".into()));
        }
        if self.drive.frame != FrameName::Shifted && self.drive.frame_shift != 0.0 {
            return Err(CliError::Config(
                "drive.frame_shift: only meaningful with frame = \"shifted\"".into(),
            ));
        }
        if !(self.features.nu_s.is_finite() && self.features.nu_p.is_none_or(f64::is_finite)) {
            return Err(CliError::Config("features: frequencies must be finite".into()));
        }
        Ok(())
    }

    /// Text embedded in every output: the resolved config without `[run]`.
    pub fn resolved_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn scheme(&self) -> LevelScheme {
        let s = &self.scheme;
        let dg = s.delta_g.unwrap_or(7.1);
        let base = match s.variant {
            Variant::ThreeLevel => LevelScheme::three_level(dg),
            Variant::FourLevelMeta => LevelScheme::four_level(dg, s.delta_e.unwrap_or(dg / 2.5)),
        };
        base.with_weak_ratio(s.dipole_weak_ratio)
    }

    pub fn drive_config(&self) -> DriveConfig {
        let p = &self.pulses;
        let mut pair = PulsePair::new(p.peak_rabi_strong, p.fwhm_intensity, p.delay);
        pair.pump_center = p.pump_center;
        pair.stokes_saturation = p.stokes_saturation;
        let mut cfg = DriveConfig::new(self.scheme(), pair);
        let d = &self.decay;
        cfg.decay = DecayParams {
            t1_excited: d.t1_excited,
            t1_meta: d.t1_meta,
            branch_meta: d.branch_meta,
            gamma_opt: d.gamma_opt,
            gamma_spin: d.gamma_spin,
            meta_to_one: d.meta_to_one,
        };
        cfg.delta_opt = self.drive.delta_opt;
        cfg.delta_two = self.drive.delta_two;
        cfg.ensemble_role = self.drive.ensemble_role;
        cfg.frame = match self.drive.frame {
            FrameName::Laser => Frame::Laser,
            FrameName::Interaction => Frame::Interaction,
            FrameName::Shifted => Frame::Shifted(self.drive.frame_shift),
        };
        cfg
    }

    pub fn evolve_options(&self, dense: bool) -> EvolveOptions {
        EvolveOptions {
            rtol: self.integrator.rtol,
            atol: self.integrator.atol,
            dense,
            track_invariants: self.integrator.track_invariants,
            max_step: self.integrator.max_step,
        }
    }

    pub fn ensemble_spec(&self) -> EnsembleSpec {
        let e = &self.ensemble;
        EnsembleSpec {
            delta_mean: e.delta_mean,
            gamma_fwhm: e.gamma_fwhm.unwrap_or(0.0),
            n_nodes: e.n_nodes,
            span: e.span,
        }
    }

    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            evolve: self.evolve_options(false),
            workers: Workers(self.run.workers),
            ensembles: self.scan.ensembles,
            profile_step: self.ensemble.profile_step,
        }
    }

    pub fn scan_kind(&self) -> Result<ScanKind, CliError> {
        self.scan
            .kind
            .ok_or_else(|| CliError::Config("scan.kind: required for scans".into()))
    }

    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let s = &self.scan;
        match (&s.values, s.start, s.stop, s.points) {
            (Some(v), None, None, None) => Ok(v.clone()),
            (Some(_), ..) => Err(CliError::Config("scan.values: excludes scan.start/stop/points".into())),
            (None, Some(a), Some(b), Some(n)) => match n {
                0 => Err(CliError::Config("scan.points: must be >= 1".into())),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
            },
            _ => Err(CliError::Config(
                "scan: give either values or all of start, stop, points".into(),
            )),
        }
    }
}

/// Map a core validation error onto the `section.key` it came from.
fn qualify(err: stirap_core::Error) -> CliError {
    use stirap_core::Error;
    match err {
        Error::InvalidParameter { name, reason } => {
            let section = match name.as_str() {
                "delta_g" | "delta_e" | "field_tesla" | "dipole_weak_ratio" => "scheme",
                "peak_rabi_strong" | "fwhm_intensity" | "delay" | "pump_center" | "stokes_saturation" => "pulses",
                "delta_opt" | "delta_two" => "drive",
                "t1_excited" | "t1_meta" | "branch_meta" | "gamma_opt" | "gamma_spin" | "meta_to_one" => "decay",
                "rtol" | "atol" | "max_step" => "integrator",
                "delta_mean" | "gamma_fwhm" | "n_nodes" | "span" | "profile_step" => "ensemble",
                _ => "",
            };
            let key = if section.is_empty() {
                name
            } else {
                format!("{section}.{name}")
            };
            CliError::Config(format!("{key}: {reason}"))
        }
        other => CliError::from(other),
    }
}
