//! Sweeps and single runs: optimize per receiver, then evaluate by Monte Carlo.

use std::time::Instant;

use mauplink::{
    ergodic_sum_rates, fpa_positions, multi_start, AntennaPositions, MmseSampleSet, Objective,
    OptimizationTrace, RandomStream, ReceiverKind, SurrogateObjective, SystemConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::spec::{ExperimentSpec, Layout, SweepKind};

/// Stream id of the evaluation draws. Every sweep point and layout is scored
/// on the same channel draws.
pub const EVAL_STREAM: u64 = 0;

/// Stream holding the SAA sample set for sweep point `point`.
pub fn saa_stream_id(point: usize) -> u64 {
    1 + 2 * point as u64
}

/// Stream the random multi-start layouts for sweep point `point` are drawn from.
pub fn start_stream_id(point: usize) -> u64 {
    2 + 2 * point as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub layout: Layout,
    pub receiver: ReceiverKind,
    pub n_antennas: usize,
    pub span: f64,
    pub positions: Vec<f64>,
    /// Surrogate objective of `receiver` at `positions`.
    pub surrogate_value: f64,
    pub ergodic_mean: f64,
    pub ergodic_stderr: f64,
    /// PGA iterations of the winning start; zero for fixed layouts.
    pub iterations: usize,
    /// Seconds spent producing the row. Not part of the CSV.
    pub wall_time: f64,
    /// Evaluation seed.
    pub seed: u64,
}

/// A single MA optimization kept alongside its row.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub row: ResultRow,
    pub trace: Option<OptimizationTrace>,
}

/// Builds the optimization target for `receiver`.
pub fn surrogate_for(
    receiver: ReceiverKind,
    config: &SystemConfig,
    saa_samples: usize,
    saa_stream: RandomStream,
) -> Result<SurrogateObjective> {
    Ok(match receiver {
        ReceiverKind::Zf => SurrogateObjective::Zf {
            config: config.clone(),
        },
        ReceiverKind::Mmse => SurrogateObjective::MmseSaa {
            config: config.clone(),
            samples: MmseSampleSet::draw(
                saa_stream,
                saa_samples,
                config.n_antennas,
                config.n_users,
            )?,
        },
        ReceiverKind::MmseSic => SurrogateObjective::SicBound {
            config: config.clone(),
        },
    })
}

fn eval_stream(spec: &ExperimentSpec) -> RandomStream {
    RandomStream::new(spec.eval_seed, EVAL_STREAM)
}

/// All rows for one `(N, L)` point, ordered by layout then receiver.
fn run_point(spec: &ExperimentSpec, point: usize, n: usize, span: f64) -> Result<Vec<SingleRun>> {
    let config = spec.config_at(n, span)?;
    let mut out = Vec::new();
    for &layout in &spec.layouts {
        match layout {
            Layout::Ma => {
                for &receiver in &spec.receivers {
                    out.push(run_ma(spec, &config, point, receiver)?);
                }
            }
            Layout::Fpa => {
                let x = fpa_positions(&config)?;
                out.extend(
                    evaluate_fixed(spec, &config, point, &x, Layout::Fpa)?
                        .into_iter()
                        .map(|row| SingleRun { row, trace: None }),
                );
            }
            Layout::Given => {
                return Err(CliError::Config(
                    "layout \"given\" is only used by eval".into(),
                ))
            }
        }
    }
    Ok(out)
}

fn run_ma(
    spec: &ExperimentSpec,
    config: &SystemConfig,
    point: usize,
    receiver: ReceiverKind,
) -> Result<SingleRun> {
    let started = Instant::now();
    let objective = surrogate_for(
        receiver,
        config,
        spec.saa_samples,
        RandomStream::new(spec.opt_seed, saa_stream_id(point)),
    )?;
    let trace = multi_start(
        &objective,
        config,
        &spec.pga_options(),
        spec.n_starts,
        &RandomStream::new(spec.opt_seed, start_stream_id(point)),
    )?;
    let best = trace.last();
    let est = ergodic_sum_rates(
        &best.positions,
        config,
        &[receiver],
        spec.eval_samples,
        &eval_stream(spec),
    )?[0];
    let row = ResultRow {
        layout: Layout::Ma,
        receiver,
        n_antennas: config.n_antennas,
        span: config.span,
        positions: best.positions.as_slice().to_vec(),
        surrogate_value: best.value,
        ergodic_mean: est.mean,
        ergodic_stderr: est.std_error,
        iterations: trace.iterations,
        wall_time: started.elapsed().as_secs_f64(),
        seed: spec.eval_seed,
    };
    Ok(SingleRun {
        row,
        trace: Some(trace),
    })
}

/// Scores a fixed layout for every selected receiver on one set of draws.
fn evaluate_fixed(
    spec: &ExperimentSpec,
    config: &SystemConfig,
    point: usize,
    positions: &AntennaPositions,
    layout: Layout,
) -> Result<Vec<ResultRow>> {
    let started = Instant::now();
    let estimates = ergodic_sum_rates(
        positions,
        config,
        &spec.receivers,
        spec.eval_samples,
        &eval_stream(spec),
    )?;
    let mut rows = Vec::with_capacity(estimates.len());
    for est in estimates {
        let surrogate = surrogate_for(
            est.receiver,
            config,
            spec.saa_samples,
            RandomStream::new(spec.opt_seed, saa_stream_id(point)),
        )?;
        rows.push(ResultRow {
            layout,
            receiver: est.receiver,
            n_antennas: config.n_antennas,
            span: config.span,
            positions: positions.as_slice().to_vec(),
            surrogate_value: surrogate_value_or_nan(&surrogate, positions)?,
            ergodic_mean: est.mean,
            ergodic_stderr: est.std_error,
            iterations: 0,
            wall_time: 0.0,
            seed: spec.eval_seed,
        });
    }
    let share = started.elapsed().as_secs_f64() / rows.len().max(1) as f64;
    for row in &mut rows {
        row.wall_time = share;
    }
    Ok(rows)
}

/// The ZF surrogate is undefined for `N <= M`; such rows carry NaN instead of
/// failing the whole evaluation.
fn surrogate_value_or_nan(objective: &SurrogateObjective, x: &AntennaPositions) -> Result<f64> {
    match objective.value(x) {
        Ok(v) => Ok(v),
        Err(mauplink::Error::Dimension(_)) => Ok(f64::NAN),
        Err(e) => Err(e.into()),
    }
}

/// Runs every point of the experiment's sweep; rows come back in grid order
/// regardless of which point finishes first.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let points = spec.sweep_points()?;
    let per_point = points
        .par_iter()
        .enumerate()
        .map(|(p, &(n, l))| run_point(spec, p, n, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_point.into_iter().flatten().map(|run| run.row).collect())
}

/// Span sweep at fixed `N`.
pub fn run_sweep_span(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    require_kind(spec, SweepKind::Span)?;
    run_sweep(spec)
}

/// Antenna-count sweep at fixed `L`.
pub fn run_sweep_antennas(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    require_kind(spec, SweepKind::Antennas)?;
    run_sweep(spec)
}

/// One optimization per selected receiver at the base `(N, L)`, with traces.
pub fn run_single(spec: &ExperimentSpec) -> Result<Vec<SingleRun>> {
    require_kind(spec, SweepKind::None)?;
    spec.validate()?;
    run_point(spec, 0, spec.n_antennas, spec.span)
}

/// Monte Carlo scores of `spec.positions` (or the FPA when none are given).
pub fn run_eval(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    require_kind(spec, SweepKind::None)?;
    spec.validate()?;
    let config = spec.system_config()?;
    match &spec.positions {
        Some(coords) => {
            if coords.len() != config.n_antennas {
                return Err(CliError::Config(format!(
                    "{} positions given for n_antennas = {}",
                    coords.len(),
                    config.n_antennas
                )));
            }
            let x = AntennaPositions::new(coords.clone(), &config.constraints())?;
            evaluate_fixed(spec, &config, 0, &x, Layout::Given)
        }
        None => {
            let x = fpa_positions(&config)?;
            evaluate_fixed(spec, &config, 0, &x, Layout::Fpa)
        }
    }
}

fn require_kind(spec: &ExperimentSpec, kind: SweepKind) -> Result<()> {
    if spec.sweep_kind == kind {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "expected sweep_kind {kind:?}, found {:?}",
            spec.sweep_kind
        )))
    }
}
