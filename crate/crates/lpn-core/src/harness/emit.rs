//! Deterministic file emission.
//!
//! All writers avoid timestamps, absolute paths and map iteration order, so
//! a rerun with the same config and seed is byte-identical. Floats print in
//! shortest round-trip form.

use crate::harness::campaign::{CalibrationRecord, PointCurve, SweepRow};
use crate::harness::config::ExperimentConfig;
use crate::harness::HarnessError;
use crate::oracle::{Key, OracleMode};
use crate::readout::ReadoutParams;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const RECORDS_FILE: &str = "records.ndjson";
pub const CURVES_FILE: &str = "curves.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const CALIBRATIONS_FILE: &str = "calibrations.json";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn ndjson_writer(dir: &Path) -> Result<BufWriter<File>, HarnessError> {
    Ok(BufWriter::new(File::create(dir.join(RECORDS_FILE))?))
}

#[derive(Serialize)]
struct RecordRow<'a> {
    key: String,
    mode: OracleMode,
    point: usize,
    record: usize,
    v_a: f64,
    v_d: &'a [f64],
    seed_path: [u64; 4],
}

#[allow(clippy::too_many_arguments)]
pub fn write_record(
    out: &mut BufWriter<File>,
    key: &Key,
    mode: OracleMode,
    point: usize,
    record: usize,
    v_a: f64,
    v_d: &[f64],
    seed_path: [u64; 4],
) -> Result<(), HarnessError> {
    let row = RecordRow {
        key: key.to_string(),
        mode,
        point,
        record,
        v_a,
        v_d,
        seed_path,
    };
    serde_json::to_writer(&mut *out, &row)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_curves(dir: &Path, curves: &[PointCurve]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(dir.join(CURVES_FILE))?;
    w.write_record(["solver", "key", "N", "p_hat", "lo", "hi", "lo_mono", "hi_mono"])?;
    for pc in curves {
        for p in &pc.curve.points {
            w.write_record([
                pc.curve.solver.as_str().to_string(),
                pc.curve.key.to_string(),
                p.n_queries.to_string(),
                p.p_hat.to_string(),
                p.lo.to_string(),
                p.hi.to_string(),
                p.lo_mono.to_string(),
                p.hi_mono.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(dir.join(SWEEP_FILE))?;
    w.write_record([
        "sweep_param",
        "value",
        "solver",
        "key",
        "N1pct_lo",
        "N1pct_hi",
        "censored",
    ])?;
    for row in rows {
        w.write_record([
            row.param.as_str().to_string(),
            row.value.to_string(),
            row.solver.as_str().to_string(),
            row.key.as_ref().map_or("avg".to_string(), |k| k.to_string()),
            row.interval.lo.to_string(),
            row.interval.hi.to_string(),
            row.interval.censored.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CalibrationRow<'a> {
    point: usize,
    key: String,
    mode: OracleMode,
    shots_per_point: usize,
    qubits: &'a [ReadoutParams],
}

pub fn write_calibrations(dir: &Path, cals: &[CalibrationRecord]) -> Result<(), HarnessError> {
    let rows: Vec<CalibrationRow> = cals
        .iter()
        .map(|c| CalibrationRow {
            point: c.point,
            key: c.key.to_string(),
            mode: c.mode,
            shots_per_point: c.calibration.shots_per_point,
            qubits: &c.calibration.qubits,
        })
        .collect();
    let mut f = BufWriter::new(File::create(dir.join(CALIBRATIONS_FILE))?);
    serde_json::to_writer_pretty(&mut f, &rows)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    master_seed: u64,
    config_sha256: String,
    config: &'a ExperimentConfig,
}

/// Manifest with the full config and its hash; rerunning the tool on the
/// embedded config reproduces every output byte for byte.
pub fn write_manifest(dir: &Path, config: &ExperimentConfig) -> Result<(), HarnessError> {
    let canonical = serde_json::to_vec(config)?;
    let digest = Sha256::digest(&canonical);
    let manifest = Manifest {
        tool: "lpn",
        version: env!("CARGO_PKG_VERSION"),
        master_seed: config.master_seed,
        config_sha256: format!("{digest:x}"),
        config,
    };
    let mut f = BufWriter::new(File::create(dir.join(MANIFEST_FILE))?);
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
