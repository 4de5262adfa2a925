use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use stirap_core::analysis::{
    averaged_scan, config_hash, fit_gaussian, fwhm, predict_spectrum_features, scan, transfer_efficiency, ScanResult,
};
use stirap_core::dressed::adiabaticity_report;
use stirap_core::dynamics::evolve;

use crate::{CliError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Scan,
    EnsembleScan,
    Features,
}

const REPORT_SAMPLES: usize = 2001;

/// Run one subcommand with a resolved config; returns the files written.
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out)?;
    match command {
        Command::Simulate => simulate(cfg, out),
        Command::Scan => run_scan(cfg, out, false),
        Command::EnsembleScan => run_scan(cfg, out, true),
        Command::Features => features(cfg, out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn config_header(w: &mut impl Write, text: &str) -> std::io::Result<()> {
    writeln!(w, "# config_sha256: {}", config_hash(text))?;
    writeln!(w, "# config:")?;
    for line in text.lines() {
        writeln!(w, "{}", format!("#   {line}").trim_end())?;
    }
    Ok(())
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let text = cfg.resolved_text();
    let drive = cfg.drive_config();
    let window = drive.default_window();
    let traj = evolve(&drive, window, &cfg.evolve_options(true))?;
    let t_probe = drive.probe_time();
    let probed = drive.probed_excited();
    let eta = transfer_efficiency(&traj, t_probe, probed)?;
    let report = adiabaticity_report(&drive.pair, drive.delta_opt, drive.pair.support(), REPORT_SAMPLES);

    let csv_path = out.join("trajectory.csv");
    let mut w = create(&csv_path)?;
    config_header(&mut w, &text)?;
    traj.write_csv(&mut w)?;
    w.flush()?;

    let levels: Vec<String> = traj.levels().iter().map(|l| format!("{l:?}")).collect();
    let summary = json!({
        "config": text,
        "config_sha256": config_hash(&text),
        "levels": levels,
        "final_populations": traj.final_state().populations(),
        "t_probe_us": t_probe,
        "probed_level": format!("{probed:?}"),
        "efficiency": eta,
        "adiabaticity": {
            "global": report.global,
            "max_local_ratio": report.max_ratio,
            "t_max_local_ratio_us": report.t_max_ratio,
        },
        "invariants": traj.invariants,
        "samples": traj.len(),
    });
    let json_path = out.join("summary.json");
    write_json(&json_path, &summary)?;
    Ok(vec![csv_path, json_path])
}

fn run_scan(cfg: &RunConfig, out: &Path, averaged: bool) -> Result<Vec<PathBuf>, CliError> {
    let text = cfg.resolved_text();
    let kind = cfg.scan_kind()?;
    let xs = cfg.grid()?;
    let drive = cfg.drive_config();
    let options = cfg.scan_options();
    let (result, stem) = if averaged {
        let spec = cfg.ensemble_spec();
        let r = averaged_scan(&drive, kind, &xs, &spec, &options)?
            .with_metadata("gamma_fwhm", format!("{} MHz", spec.gamma_fwhm))
            .with_metadata("delta_mean", format!("{} MHz", spec.delta_mean))
            .with_metadata("n_nodes", spec.n_nodes.to_string())
            .with_metadata("span", format!("{} sigma", spec.span));
        (r, "ensemble_scan")
    } else {
        (scan(&drive, kind, &xs, &options)?, "scan")
    };
    let result: ScanResult = result.with_config(text.clone());

    let csv_path = out.join(format!("{stem}.csv"));
    let mut w = create(&csv_path)?;
    result.write_csv(&mut w)?;
    w.flush()?;
    let mut written = vec![csv_path];

    if cfg.scan.fit {
        let fit = fit_gaussian(&result)?;
        let doc = json!({
            "config": text,
            "config_sha256": config_hash(&text),
            "parameter": result.parameter,
            "units": result.units,
            "fit": fit,
            "fwhm_interpolated": fwhm(&result).ok(),
        });
        let path = out.join(format!("{stem}_fit.json"));
        write_json(&path, &doc)?;
        written.push(path);
    }
    Ok(written)
}

fn features(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let text = cfg.resolved_text();
    let nu_s = cfg.features.nu_s;
    let nu_p = cfg.features.nu_p.expect("resolved");
    let list = predict_spectrum_features(nu_s, nu_p, &cfg.scheme());
    let doc = json!({
        "config": text,
        "config_sha256": config_hash(&text),
        "nu_s_mhz": nu_s,
        "nu_p_mhz": nu_p,
        "features": list,
    });
    let path = out.join("features.json");
    write_json(&path, &doc)?;
    Ok(vec![path])
}
