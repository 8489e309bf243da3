//! Projected gradient ascent over antenna positions.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{AntennaPositions, Constraints, RandomStream, SystemConfig};
use crate::objectives::Objective;
use crate::{Error, Result};

/// Step-size and stopping controls for [`pga_optimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgaOptions {
    /// Step tried first at every iteration, wavelengths per unit gradient.
    pub initial_step: f64,
    /// Backtracking factor in (0, 1).
    pub shrink: f64,
    pub min_step: f64,
    pub max_iterations: usize,
    /// Stop once an accepted step improves the objective by less than this.
    pub value_tolerance: f64,
}

impl Default for PgaOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            shrink: 0.5,
            min_step: 1e-8,
            max_iterations: 1000,
            value_tolerance: 1e-5,
        }
    }
}

impl PgaOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_step > 0.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.min_step > 0.0
            && self.min_step < self.initial_step
            && self.max_iterations >= 1
            && self.value_tolerance > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid PGA options {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    ValueTolerance,
    MaxIterations,
    StepFloor,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ValueTolerance => "value-tolerance",
            Self::MaxIterations => "max-iterations",
            Self::StepFloor => "step-floor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub positions: AntennaPositions,
    pub value: f64,
    /// Step that produced this iterate; zero for the start.
    pub step: f64,
}

/// History of one PGA run. Entry 0 is the start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub iterates: Vec<TraceEntry>,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Gradient iterations performed, including a final one that found no ascent step.
    pub iterations: usize,
}

impl OptimizationTrace {
    pub fn last(&self) -> &TraceEntry {
        self.iterates.last().expect("trace always holds the start")
    }

    pub fn final_value(&self) -> f64 {
        self.last().value
    }

    pub fn initial_value(&self) -> f64 {
        self.iterates[0].value
    }

    pub fn is_monotone(&self) -> bool {
        self.iterates.windows(2).all(|w| w[1].value >= w[0].value)
    }
}

/// Nearest-distance projection onto the spacing/span constraints.
///
/// Coordinates are clamped in order: `x_1` into `[0, L - (N-1) d]`, then each
/// `x_k` into `[x_{k-1} + d, L - (N-k) d]`.
pub fn project(raw: &[f64], constraints: &Constraints) -> Result<AntennaPositions> {
    let n = raw.len();
    constraints.check(n)?;
    let d = constraints.min_spacing;
    let span = constraints.span;
    let mut out = Vec::with_capacity(n);
    for (k, &v) in raw.iter().enumerate() {
        let cap = span - (n - 1 - k) as f64 * d;
        let x = match out.last() {
            None => cap.min(v).max(0.0),
            Some(&prev) => f64::max(prev + d, cap.min(v)),
        };
        out.push(x);
    }
    Ok(AntennaPositions::from_unchecked(out))
}

/// Projected gradient ascent with a backtracking step.
///
/// Each iteration tries `project(x + δ ∇f(x))` starting from `initial_step`
/// and halving (by `shrink`) until the objective strictly increases or the
/// step drops below `min_step`.
pub fn pga_optimize<O: Objective + ?Sized>(
    objective: &O,
    start: &AntennaPositions,
    constraints: &Constraints,
    options: &PgaOptions,
) -> Result<OptimizationTrace> {
    options.validate()?;
    constraints.check(start.len())?;
    if !start.is_feasible(constraints) {
        return Err(Error::InvalidConfig(format!(
            "start {:?} is not feasible",
            start.as_slice()
        )));
    }

    let mut x = start.clone();
    let mut value = objective.value(&x)?;
    let mut iterates = vec![TraceEntry {
        positions: x.clone(),
        value,
        step: 0.0,
    }];

    let mut iterations = 0;
    let stop_reason = loop {
        if iterations == options.max_iterations {
            break StopReason::MaxIterations;
        }
        iterations += 1;
        let grad = objective.gradient(&x)?;

        let mut step = options.initial_step;
        let accepted = loop {
            let raw: Vec<f64> = x
                .as_slice()
                .iter()
                .zip(&grad)
                .map(|(xi, gi)| xi + step * gi)
                .collect();
            let candidate = project(&raw, constraints)?;
            let cand_value = objective.value(&candidate)?;
            if cand_value > value {
                break Some((candidate, cand_value));
            }
            step *= options.shrink;
            if step < options.min_step {
                break None;
            }
        };

        let Some((candidate, cand_value)) = accepted else {
            break StopReason::StepFloor;
        };
        let gain = cand_value - value;
        x = candidate;
        value = cand_value;
        iterates.push(TraceEntry {
            positions: x.clone(),
            value,
            step,
        });
        if gain < options.value_tolerance {
            break StopReason::ValueTolerance;
        }
    };

    Ok(OptimizationTrace {
        iterates,
        converged: stop_reason != StopReason::MaxIterations,
        stop_reason,
        iterations,
    })
}

/// Runs PGA from the uniform minimum-spacing layout plus `n_starts - 1` random
/// feasible starts and keeps the run with the highest final objective.
pub fn multi_start<O: Objective + ?Sized>(
    objective: &O,
    config: &SystemConfig,
    options: &PgaOptions,
    n_starts: usize,
    stream: &RandomStream,
) -> Result<OptimizationTrace> {
    if n_starts == 0 {
        return Err(Error::InvalidConfig("n_starts must be at least 1".into()));
    }
    let constraints = config.constraints();
    let n = config.n_antennas;
    let mut starts = vec![AntennaPositions::uniform(n, config.min_spacing)];
    let mut rng = stream.rng();
    for _ in 1..n_starts {
        let mut raw: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0.0..=config.span))
            .collect();
        raw.sort_by(f64::total_cmp);
        starts.push(project(&raw, &constraints)?);
    }

    let traces = starts
        .par_iter()
        .map(|s| pga_optimize(objective, s, &constraints, options))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, t) in traces.iter().enumerate().skip(1) {
        if t.final_value() > traces[best].final_value() {
            best = i;
        }
    }
    Ok(traces.into_iter().nth(best).expect("at least one start"))
}
