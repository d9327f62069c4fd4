//! The campaign runner.
//!
//! A campaign walks every (noise point, key, mode) unit: it generates a
//! calibration and a fixed pool of query records, then resamples each
//! applicable solver over the subset-size grid into an error curve. Sweep
//! campaigns additionally reduce each curve to its query-count intercept
//! and average the intercepts over keys.
//!
//! Seed discipline: every unit derives its streams from the master seed by
//! purpose (pool, calibration, solving) and position (point, key, mode,
//! then record / solver / grid index / trial), so outputs are byte-stable
//! across runs and thread counts, and changing one part of a config does
//! not shift the randomness of unrelated parts.

use crate::harness::config::{resolve, ExperimentConfig, ResolvedConfig, SweepParam};
use crate::harness::{emit, HarnessError};
use crate::oracle::{build_circuit, sample_shot, Key, OracleMode};
use crate::readout::{
    generate_calibration_seeded, sample_voltage, true_params, CalibrationSet, QueryRecord,
};
use crate::rng::SeedStream;
use crate::solvers::{PreparedPool, QueryBatch, SolverId};
use crate::stats::{average_over_keys, build_curve, estimate_error, n_at_target, ErrorCurve, NInterval};
use std::path::Path;

const PURPOSE_POOL: u64 = 1;
const PURPOSE_CAL: u64 = 2;
const PURPOSE_SOLVE: u64 = 3;

#[derive(Clone, Debug)]
pub struct CalibrationRecord {
    pub point: usize,
    pub key: Key,
    pub mode: OracleMode,
    pub calibration: CalibrationSet,
}

/// An error curve tagged with the noise point it was measured at.
#[derive(Clone, Debug)]
pub struct PointCurve {
    pub point: usize,
    pub sweep_value: Option<f64>,
    pub curve: ErrorCurve,
}

/// One sweep-summary row; `key = None` is the average over keys.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub solver: SolverId,
    pub key: Option<Key>,
    pub interval: NInterval,
}

#[derive(Debug)]
pub struct CampaignOutput {
    pub resolved: ResolvedConfig,
    pub curves: Vec<PointCurve>,
    pub sweep_rows: Vec<SweepRow>,
    pub calibrations: Vec<CalibrationRecord>,
}

/// Generate pools and calibrations only; records, calibrations and the
/// manifest are persisted, no solver runs.
pub fn run_simulate(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<CampaignOutput, HarnessError> {
    run(config, out_dir, false)
}

/// Full campaign: everything `run_simulate` does plus error curves for all
/// solvers and, for sweep configs, the intercept summary.
pub fn run_campaign(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<CampaignOutput, HarnessError> {
    run(config, out_dir, true)
}

fn run(config: &ExperimentConfig, out_dir: &Path, solve: bool) -> Result<CampaignOutput, HarnessError> {
    let resolved = resolve(config)?;
    std::fs::create_dir_all(out_dir)?;
    let n = config.n;
    let root = SeedStream::new(config.master_seed);

    let mut records_out = emit::ndjson_writer(out_dir)?;
    let mut curves: Vec<PointCurve> = Vec::new();
    let mut calibrations: Vec<CalibrationRecord> = Vec::new();

    for (pi, point) in resolved.points.iter().enumerate() {
        let truth = true_params(&point.model);
        for (ki, key) in resolved.keys.iter().enumerate() {
            for &mode in &resolved.modes {
                let pool_stream = root
                    .child(PURPOSE_POOL)
                    .child(pi as u64)
                    .child(ki as u64)
                    .child(mode.id());
                let cal_stream = root
                    .child(PURPOSE_CAL)
                    .child(pi as u64)
                    .child(ki as u64)
                    .child(mode.id());
                let calibration = generate_calibration_seeded(
                    &point.model,
                    config.calibration_shots,
                    cal_stream,
                )?;
                let circuit = build_circuit(key, mode);

                let mut records = Vec::with_capacity(config.pool_size);
                for ri in 0..config.pool_size {
                    let mut rng = pool_stream.child(ri as u64).rng();
                    let shot = sample_shot(&circuit, &point.model, &mut rng);
                    let v_d: Vec<f64> = (0..n)
                        .map(|i| sample_voltage(shot.d[i], &truth[i], &mut rng))
                        .collect();
                    let v_a = sample_voltage(shot.a, &truth[n], &mut rng);
                    emit::write_record(
                        &mut records_out,
                        key,
                        mode,
                        pi,
                        ri,
                        v_a,
                        &v_d,
                        [pi as u64, ki as u64, mode.id(), ri as u64],
                    )?;
                    records.push(QueryRecord { v_a, v_d });
                }
                calibrations.push(CalibrationRecord {
                    point: pi,
                    key: key.clone(),
                    mode,
                    calibration: calibration.clone(),
                });

                if !solve {
                    continue;
                }
                let batch = QueryBatch {
                    n,
                    records,
                    calibration,
                };
                for &solver in &config.solvers {
                    if solver.mode() != mode {
                        continue;
                    }
                    let prepared = PreparedPool::build(solver, &batch, point.model.eta_a)?;
                    let key_mask = key.mask();
                    let mut raw = Vec::with_capacity(resolved.n_grid.len());
                    for (ni, &nq) in resolved.n_grid.iter().enumerate() {
                        let solve_stream = root
                            .child(PURPOSE_SOLVE)
                            .child(pi as u64)
                            .child(ki as u64)
                            .child(mode.id())
                            .child(solver.id())
                            .child(ni as u64);
                        let outcome = estimate_error(
                            |subset, rng| prepared.solve(subset, rng).0 == key_mask,
                            config.pool_size,
                            nq,
                            config.resample_trials,
                            solve_stream,
                        )?;
                        raw.push((nq, outcome));
                    }
                    let curve = build_curve(solver, key.clone(), &raw, resolved.credible_level)?;
                    curves.push(PointCurve {
                        point: pi,
                        sweep_value: point.sweep_value,
                        curve,
                    });
                }
            }
        }
    }
    records_out.into_inner().map_err(|e| e.into_error())?.sync_all().ok();

    let mut sweep_rows: Vec<SweepRow> = Vec::new();
    if let (true, Some(sweep)) = (solve, &config.sweep) {
        for (pi, point) in resolved.points.iter().enumerate() {
            let value = point.sweep_value.unwrap_or(f64::NAN);
            for &solver in &config.solvers {
                let mut intervals = Vec::with_capacity(resolved.keys.len());
                for key in &resolved.keys {
                    let pc = curves
                        .iter()
                        .find(|c| c.point == pi && c.curve.solver == solver && &c.curve.key == key)
                        .expect("curve exists for every (point, solver, key)");
                    let interval = n_at_target(&pc.curve, config.p_target)?;
                    sweep_rows.push(SweepRow {
                        param: sweep.param,
                        value,
                        solver,
                        key: Some(key.clone()),
                        interval,
                    });
                    intervals.push(interval);
                }
                sweep_rows.push(SweepRow {
                    param: sweep.param,
                    value,
                    solver,
                    key: None,
                    interval: average_over_keys(&intervals)?,
                });
            }
        }
    }

    emit::write_calibrations(out_dir, &calibrations)?;
    if solve {
        if config.sweep.is_some() {
            emit::write_sweep(out_dir, &sweep_rows)?;
        } else {
            emit::write_curves(out_dir, &curves)?;
        }
    }
    emit::write_manifest(out_dir, config)?;

    Ok(CampaignOutput {
        resolved,
        curves,
        sweep_rows,
        calibrations,
    })
}
