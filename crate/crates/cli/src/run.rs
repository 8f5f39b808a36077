//! Scenario runs: synthesize, image, score and write artifacts.
//!
//! For every direction set `<label>` (`n4`, `angles`, …) and selected map
//! `<map>` the output directory receives `<label>_<map>.csv`,
//! `<label>_<map>.pgm` and a sidecar `<label>_<map>.json`. The coefficients
//! behind the maps go to `<label>_sf_measurements.csv` and
//! `<label>_band_measurements.csv`. `config.cfg` holds the resolved
//! configuration and `report.json` the run summary. Nothing time-dependent
//! is written, so reruns are byte-identical.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use thinscope::imaging::{channel_map, MapMeta};
use thinscope::io::{write_map_csv, write_map_pgm, write_measurements_csv, GrayScaling};
use thinscope::{add_noise, concentration_metric, e_mf, e_sf, synthesize, Channel, CurveQuadrature, ImageMap, MeasurementSet};

use crate::config::{ExperimentConfig, MapSelection};
use crate::CliError;

pub const CONFIG_FILE: &str = "config.cfg";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Serialize)]
pub struct MapSummary {
    pub label: String,
    pub map: &'static str,
    pub n_directions: usize,
    pub concentration: f64,
    pub csv: String,
    pub pgm: String,
    pub sidecar: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub snr_db: Option<f64>,
    pub top_fraction: f64,
    pub dist_threshold: f64,
    pub maps: Vec<MapSummary>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    version: &'static str,
    scenario: &'a str,
    label: &'a str,
    map: &'static str,
    seed: u64,
    snr_db: Option<f64>,
    concentration: f64,
    top_fraction: f64,
    dist_threshold: f64,
    gray_scaling: GrayScaling,
    value_range: Option<(f64, f64)>,
    grid: serde_json::Value,
    meta: &'a MapMeta,
    measurements: &'a str,
    config: std::collections::BTreeMap<String, String>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> Result<(), CliError>) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    f(&mut out)?;
    out.flush().map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    write_file(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value).map_err(|e| io_err(path, e))?;
        out.write_all(b"\n").map_err(|e| io_err(path, e))
    })
}

/// Creates the output directory and proves it writable by writing the
/// resolved configuration; failures are configuration errors.
fn prepare_out_dir(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.out_dir.clone();
    let unwritable = |e: std::io::Error| CliError::Config(format!("output directory {} is not writable: {e}", dir.display()));
    fs::create_dir_all(&dir).map_err(unwritable)?;
    fs::write(dir.join(CONFIG_FILE), cfg.render()).map_err(unwritable)?;
    Ok(dir)
}

fn noised(meas: MeasurementSet<f64>, cfg: &ExperimentConfig) -> Result<MeasurementSet<f64>, CliError> {
    match cfg.snr_db {
        Some(snr) => Ok(add_noise(&meas, snr, cfg.seed)?),
        None => Ok(meas),
    }
}

/// Validates `cfg`, then computes and writes every map it selects.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let plan = cfg.build()?;
    let dir = prepare_out_dir(cfg)?;
    let mut maps = Vec::new();
    for (label, dirs) in &plan.direction_sets {
        let sf_meas = match &plan.sf_freqs {
            Some(f) => Some(noised(synthesize(&plan.scene, dirs, f)?, cfg)?),
            None => None,
        };
        let band_meas = match &plan.band {
            Some(f) => Some(noised(synthesize(&plan.scene, dirs, f)?, cfg)?),
            None => None,
        };
        for (meas, tag) in [(&sf_meas, "sf"), (&band_meas, "band")] {
            if let Some(meas) = meas {
                let path = dir.join(format!("{label}_{tag}_measurements.csv"));
                write_file(&path, |out| Ok(write_measurements_csv(meas, out)?))?;
            }
        }
        for &sel in &cfg.maps {
            let (map, meas_tag) = match sel {
                MapSelection::Mf => (e_mf(band_meas.as_ref().expect("band planned"), &plan.grid)?, "band"),
                other => {
                    let meas = sf_meas.as_ref().expect("single frequency planned");
                    let map = match other {
                        MapSelection::Sf => e_sf(meas, 0, &plan.grid)?,
                        MapSelection::Eps => channel_map(meas, Channel::Permittivity, 0, &plan.grid)?,
                        _ => channel_map(meas, Channel::Permeability, 0, &plan.grid)?,
                    };
                    (map, "sf")
                }
            };
            maps.push(emit_map(cfg, &dir, &plan.target, label, sel, &map, meas_tag)?);
        }
    }
    let report = RunReport {
        version: thinscope::VERSION,
        scenario: cfg.scenario.clone(),
        seed: cfg.seed,
        snr_db: cfg.snr_db,
        top_fraction: cfg.top_fraction,
        dist_threshold: cfg.dist_threshold,
        maps,
    };
    write_json(&dir.join(REPORT_FILE), &report)?;
    Ok(report)
}

fn emit_map(
    cfg: &ExperimentConfig,
    dir: &Path,
    target: &CurveQuadrature<f64>,
    label: &str,
    sel: MapSelection,
    map: &ImageMap<f64>,
    meas_tag: &str,
) -> Result<MapSummary, CliError> {
    let concentration = concentration_metric(map, target, cfg.top_fraction, cfg.dist_threshold)?;
    let stem = format!("{label}_{}", sel.key());
    let (csv, pgm, sidecar) = (format!("{stem}.csv"), format!("{stem}.pgm"), format!("{stem}.json"));
    write_file(&dir.join(&csv), |out| Ok(write_map_csv(map, out)?))?;
    let mut gray = None;
    write_file(&dir.join(&pgm), |out| {
        gray = Some(write_map_pgm(map, out)?);
        Ok(())
    })?;
    let g = &map.grid;
    let measurements = format!("{label}_{meas_tag}_measurements.csv");
    let side = Sidecar {
        version: thinscope::VERSION,
        scenario: &cfg.scenario,
        label,
        map: sel.key(),
        seed: cfg.seed,
        snr_db: cfg.snr_db,
        concentration,
        top_fraction: cfg.top_fraction,
        dist_threshold: cfg.dist_threshold,
        gray_scaling: gray.expect("pgm written"),
        value_range: map.range(),
        grid: json!({
            "nx": g.nx,
            "ny": g.ny,
            "x_range": [g.x_range.0, g.x_range.1],
            "y_range": [g.y_range.0, g.y_range.1],
            "disk_center": [g.disk_center.x, g.disk_center.y],
            "disk_radius": g.disk_radius,
        }),
        meta: &map.meta,
        measurements: &measurements,
        config: cfg.to_key_values(),
    };
    write_json(&dir.join(&sidecar), &side)?;
    Ok(MapSummary { label: label.to_string(), map: sel.key(), n_directions: map.meta.n_directions, concentration, csv, pgm, sidecar })
}
