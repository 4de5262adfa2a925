use serde::Serialize;

use crate::dynamics::EnsembleRole;
use crate::model::LevelScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    StirapAbsorption,
    StirapTransmission,
    PrepTransmission,
    PrepAbsorption,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::StirapAbsorption => "stirap-absorption",
            FeatureKind::StirapTransmission => "stirap-transmission",
            FeatureKind::PrepTransmission => "prep-transmission",
            FeatureKind::PrepAbsorption => "prep-absorption",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumFeature {
    /// Probe frequency, MHz, same reference as the laser frequencies.
    pub frequency: f64,
    pub kind: FeatureKind,
    pub ensembles: Vec<EnsembleRole>,
    /// Carried only by a weak-transition excitation; expected faint.
    pub small: bool,
}

/// Probe-spectrum features after hole-burning preparation and STIRAP, with
/// the ion classes contributing to each. Features at the same frequency and
/// kind are merged. Sorted by frequency, then kind.
pub fn predict_spectrum_features(nu_s: f64, nu_p: f64, scheme: &LevelScheme) -> Vec<SpectrumFeature> {
    use EnsembleRole::{StokesOnStrong as Strong, StokesOnWeak as Weak};
    use FeatureKind::*;

    let (dg, de) = (scheme.delta_g, scheme.delta_e);
    let both = || vec![Strong, Weak];
    let raw = [
        (nu_s, StirapAbsorption, both(), false),
        // |3⟩–|2⟩ lies Δe above a Stokes tuned to |3⟩–|4⟩
        (nu_s + de, StirapAbsorption, vec![Strong], false),
        (nu_s - de, StirapAbsorption, vec![Weak], true),
        (nu_p, StirapTransmission, both(), false),
        // |1⟩–|4⟩ lies Δe below a pump tuned to |1⟩–|2⟩
        (nu_p - de, StirapTransmission, vec![Weak], false),
        (nu_p + de, StirapTransmission, vec![Strong], true),
        (nu_s, PrepTransmission, both(), false),
        (nu_p, PrepAbsorption, both(), false),
        (nu_s - dg, PrepAbsorption, both(), false),
    ];

    let mut out: Vec<SpectrumFeature> = Vec::new();
    for (frequency, kind, ensembles, small) in raw {
        match out.iter_mut().find(|f| f.frequency == frequency && f.kind == kind) {
            Some(f) => {
                for e in ensembles {
                    if !f.ensembles.contains(&e) {
                        f.ensembles.push(e);
                    }
                }
                f.small = f.small && small;
            }
            None => out.push(SpectrumFeature {
                frequency,
                kind,
                ensembles,
                small,
            }),
        }
    }
    for f in &mut out {
        f.ensembles.sort_by_key(|e| *e != Strong);
    }
    out.sort_by(|a, b| {
        a.frequency
            .total_cmp(&b.frequency)
            .then((a.kind as u8).cmp(&(b.kind as u8)))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(features: &[SpectrumFeature], kind: FeatureKind) -> Vec<f64> {
        features
            .iter()
            .filter(|f| f.kind == kind)
            .map(|f| f.frequency)
            .collect()
    }

    #[test]
    fn tm_yag_feature_positions() {
        let scheme = LevelScheme::four_level(4.55, 1.82);
        let f = predict_spectrum_features(0.0, 4.55, &scheme);
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(&at(&f, FeatureKind::StirapAbsorption), &[-1.82, 0.0, 1.82]));
        assert!(close(&at(&f, FeatureKind::StirapTransmission), &[2.73, 4.55, 6.37]));
        assert!(close(&at(&f, FeatureKind::PrepAbsorption), &[-4.55, 4.55]));
        assert!(close(&at(&f, FeatureKind::PrepTransmission), &[0.0]));
        let contributors: Vec<(f64, usize)> = f.iter().map(|g| (g.frequency, g.ensembles.len())).collect();
        let expected = [
            (-4.55, 2),
            (-1.82, 1),
            (0.0, 2),
            (0.0, 2),
            (1.82, 1),
            (2.73, 1),
            (4.55, 2),
            (4.55, 2),
            (6.37, 1),
        ];
        assert_eq!(contributors.len(), expected.len());
        for ((x, n), (ex, en)) in contributors.iter().zip(expected) {
            assert!((x - ex).abs() < 1e-12 && *n == en, "{contributors:?}");
        }
    }

    #[test]
    fn satellite_attribution() {
        let scheme = LevelScheme::four_level(4.55, 1.82);
        let f = predict_spectrum_features(0.0, 4.55, &scheme);
        let find = |x: f64, k: FeatureKind| {
            f.iter()
                .find(|g| (g.frequency - x).abs() < 1e-9 && g.kind == k)
                .unwrap()
        };
        let plus = find(1.82, FeatureKind::StirapAbsorption);
        assert_eq!(plus.ensembles, vec![EnsembleRole::StokesOnStrong]);
        assert!(!plus.small);
        let minus = find(-1.82, FeatureKind::StirapAbsorption);
        assert_eq!(minus.ensembles, vec![EnsembleRole::StokesOnWeak]);
        assert!(minus.small);
        let p_plus = find(6.37, FeatureKind::StirapTransmission);
        assert_eq!(p_plus.ensembles, vec![EnsembleRole::StokesOnStrong]);
        assert!(p_plus.small);
    }

    #[test]
    fn degenerate_excited_splitting_merges_satellites() {
        let scheme = LevelScheme::four_level(4.55, 0.0);
        let f = predict_spectrum_features(0.0, 4.55, &scheme);
        let mut stirap: Vec<f64> = f
            .iter()
            .filter(|g| matches!(g.kind, FeatureKind::StirapAbsorption | FeatureKind::StirapTransmission))
            .map(|g| g.frequency)
            .collect();
        stirap.dedup();
        assert_eq!(stirap, vec![0.0, 4.55]);
        assert!(f.iter().all(|g| !g.small));
    }
}
