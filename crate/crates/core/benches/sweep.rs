//! Sequential vs pool-parallel optical scan. Build with
//! `--no-default-features` to bench the fallback path under both labels.

use criterion::{criterion_group, criterion_main, Criterion};
use stirap_core::analysis::{scan, ScanKind, ScanOptions};
use stirap_core::dynamics::{DriveConfig, EnsembleRole};
use stirap_core::exec::Workers;
use stirap_core::model::LevelScheme;
use stirap_core::pulses::PulsePair;

fn sweep(c: &mut Criterion) {
    let mut drive = DriveConfig::new(
        LevelScheme::three_level(7.1),
        PulsePair::new(0.51, 30.0 / 2f64.sqrt(), -17.0),
    );
    drive.ensemble_role = EnsembleRole::StokesOnWeak;
    let xs: Vec<f64> = (0..16).map(|i| -3.0 + 0.4 * i as f64).collect();

    let mut group = c.benchmark_group("optical_scan_16");
    group.sample_size(10);
    for (label, workers) in [("sequential", Workers::SEQUENTIAL), ("parallel", Workers(0))] {
        let options = ScanOptions {
            workers,
            ..Default::default()
        };
        group.bench_function(label, |b| {
            b.iter(|| scan(&drive, ScanKind::Optical, &xs, &options).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
