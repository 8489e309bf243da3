//! Experiment configuration file.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use mauplink::model::{db_to_linear, DEFAULT_ANGLES};
use mauplink::{Constraints, PgaOptions, ReceiverKind, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Span,
    Antennas,
    #[default]
    None,
}

/// Antenna arrangement a result row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Positions optimized for the row's receiver.
    Ma,
    /// Half-wavelength uniform array.
    Fpa,
    /// Positions supplied by the user.
    Given,
}

impl Layout {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ma => "ma",
            Self::Fpa => "fpa",
            Self::Given => "given",
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Layout {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ma" => Ok(Self::Ma),
            "fpa" => Ok(Self::Fpa),
            other => Err(CliError::Config(format!("unknown layout {other:?}"))),
        }
    }
}

/// Everything needed to replay an experiment.
///
/// Every key is optional in the file; missing keys take the values of the
/// five-user evaluation scenario. Per-user lists must all have the length of
/// `angles`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub n_antennas: usize,
    pub span: f64,
    pub min_spacing: f64,
    pub wavelength: f64,
    /// Per-user transmit SNR in dB.
    pub power_db: Vec<f64>,
    pub rician_k: Vec<f64>,
    pub path_loss: Vec<f64>,
    /// Per-user angles of arrival in radians.
    pub angles: Vec<f64>,
    pub sweep_kind: SweepKind,
    pub sweep_values: Vec<f64>,
    pub receivers: Vec<ReceiverKind>,
    pub layouts: Vec<Layout>,
    pub eval_seed: u64,
    pub opt_seed: u64,
    pub saa_samples: usize,
    pub eval_samples: usize,
    pub initial_step: f64,
    pub shrink: f64,
    pub min_step: f64,
    pub max_iterations: usize,
    pub value_tolerance: f64,
    pub n_starts: usize,
    pub grad_check_trials: usize,
    /// Positions evaluated by the `eval` command.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<f64>>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let m = DEFAULT_ANGLES.len();
        let pga = PgaOptions::default();
        Self {
            n_antennas: 10,
            span: 6.0,
            min_spacing: 0.5,
            wavelength: 1.0,
            power_db: vec![15.0; m],
            rician_k: vec![10.0; m],
            path_loss: vec![1.0; m],
            angles: DEFAULT_ANGLES.to_vec(),
            sweep_kind: SweepKind::None,
            sweep_values: Vec::new(),
            receivers: ReceiverKind::ALL.to_vec(),
            layouts: vec![Layout::Ma, Layout::Fpa],
            eval_seed: 1,
            opt_seed: 2,
            saa_samples: 100,
            eval_samples: 10_000,
            initial_step: pga.initial_step,
            shrink: pga.shrink,
            min_step: pga.min_step,
            max_iterations: pga.max_iterations,
            value_tolerance: pga.value_tolerance,
            n_starts: 4,
            grad_check_trials: 20,
            positions: None,
        }
    }
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Default grid for each sweep kind: `L = 5.0, 5.5, ..., 9.0` for span
    /// sweeps and `N = 6, ..., 13` for antenna sweeps.
    pub fn default_sweep_values(kind: SweepKind) -> Vec<f64> {
        match kind {
            SweepKind::Span => (0..=8).map(|i| 5.0 + 0.5 * i as f64).collect(),
            SweepKind::Antennas => (6..=13).map(f64::from).collect(),
            SweepKind::None => Vec::new(),
        }
    }

    /// Switches to `kind`, filling in the default grid if no values are set.
    pub fn with_sweep(mut self, kind: SweepKind) -> Result<Self> {
        if self.sweep_kind != SweepKind::None && self.sweep_kind != kind {
            return Err(CliError::Config(format!(
                "config declares sweep_kind {:?} but {:?} was requested",
                self.sweep_kind, kind
            )));
        }
        if kind == SweepKind::None && !self.sweep_values.is_empty() {
            return Err(CliError::Config(
                "sweep_values given for a single-point run".into(),
            ));
        }
        self.sweep_kind = kind;
        if self.sweep_values.is_empty() {
            self.sweep_values = Self::default_sweep_values(kind);
        }
        Ok(self)
    }

    pub fn pga_options(&self) -> PgaOptions {
        PgaOptions {
            initial_step: self.initial_step,
            shrink: self.shrink,
            min_step: self.min_step,
            max_iterations: self.max_iterations,
            value_tolerance: self.value_tolerance,
        }
    }

    /// Scenario at the base `(N, L)` with powers converted to linear scale.
    /// Geometry is not checked here; see [`ExperimentSpec::sweep_points`].
    pub fn system_config(&self) -> Result<SystemConfig> {
        self.config_at(self.n_antennas, self.span)
    }

    pub fn config_at(&self, n_antennas: usize, span: f64) -> Result<SystemConfig> {
        let m = self.angles.len();
        for (name, len) in [
            ("power_db", self.power_db.len()),
            ("rician_k", self.rician_k.len()),
            ("path_loss", self.path_loss.len()),
        ] {
            if len != m {
                return Err(CliError::Config(format!(
                    "{name} has {len} entries but angles has {m}"
                )));
            }
        }
        if self.power_db.iter().any(|p| !p.is_finite()) {
            return Err(CliError::Config("power_db entries must be finite".into()));
        }
        Ok(SystemConfig {
            n_antennas,
            n_users: m,
            span,
            min_spacing: self.min_spacing,
            wavelength: self.wavelength,
            power_ratio: self.power_db.iter().map(|&p| db_to_linear(p)).collect(),
            rician_k: self.rician_k.clone(),
            path_loss: self.path_loss.clone(),
            angle: self.angles.clone(),
        })
    }

    /// The `(N, L)` pairs visited, in output order.
    pub fn sweep_points(&self) -> Result<Vec<(usize, f64)>> {
        match self.sweep_kind {
            SweepKind::None => Ok(vec![(self.n_antennas, self.span)]),
            SweepKind::Span => Ok(self
                .sweep_values
                .iter()
                .map(|&l| (self.n_antennas, l))
                .collect()),
            SweepKind::Antennas => self
                .sweep_values
                .iter()
                .map(|&v| {
                    if v.fract() != 0.0 || v < 1.0 {
                        Err(CliError::Config(format!(
                            "antenna count {v} is not a positive integer"
                        )))
                    } else {
                        Ok((v as usize, self.span))
                    }
                })
                .collect(),
        }
    }

    /// Checks the experiment settings and every sweep point, failing with
    /// [`mauplink::Error::InfeasibleGeometry`] if some `L < (N-1) d_min`.
    pub fn validate(&self) -> Result<()> {
        if self.sweep_kind != SweepKind::None && self.sweep_values.is_empty() {
            return Err(CliError::Config(
                "sweep_values must be non-empty for a sweep".into(),
            ));
        }
        if self.receivers.is_empty() {
            return Err(CliError::Config("no receivers selected".into()));
        }
        if self.layouts.is_empty() {
            return Err(CliError::Config("no layouts selected".into()));
        }
        if self.layouts.contains(&Layout::Given) {
            return Err(CliError::Config(
                "layout \"given\" is set through positions, not layouts".into(),
            ));
        }
        if self.saa_samples == 0 || self.eval_samples == 0 {
            return Err(CliError::Config(
                "saa_samples and eval_samples must be positive".into(),
            ));
        }
        if self.n_starts == 0 {
            return Err(CliError::Config("n_starts must be at least 1".into()));
        }
        self.pga_options().validate()?;
        for (n, l) in self.sweep_points()? {
            let cfg = self.config_at(n, l)?;
            Constraints {
                span: l,
                min_spacing: self.min_spacing,
            }
            .check(n)?;
            cfg.validate()?;
        }
        Ok(())
    }
}
