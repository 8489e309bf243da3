//! CSV tables and the JSON metadata sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mauplink::{OptimizationTrace, GENERATOR_NAME};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::experiment::{ResultRow, EVAL_STREAM};
use crate::spec::ExperimentSpec;

pub const CSV_HEADER: &str = "layout,receiver,n_antennas,span,ergodic_mean,ergodic_stderr,surrogate_value,iterations,positions,seed";

/// `x` rounded to 12 significant digits in plain decimal notation.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.11}", x);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{:.*}", decimals, x)
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let positions: Vec<String> = r.positions.iter().map(|&x| format_sig12(x)).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.layout,
            r.receiver,
            r.n_antennas,
            r.span,
            r.ergodic_mean,
            r.ergodic_stderr,
            r.surrogate_value,
            r.iterations,
            positions.join(";"),
            r.seed
        )
        .expect("writing to a String");
    }
    out
}

pub fn trace_to_csv(trace: &OptimizationTrace) -> String {
    let mut out = String::from("iteration,value,step,positions\n");
    for (i, e) in trace.iterates.iter().enumerate() {
        let positions: Vec<String> = e
            .positions
            .as_slice()
            .iter()
            .map(|&x| format_sig12(x))
            .collect();
        writeln!(out, "{},{},{},{}", i, e.value, e.step, positions.join(";"))
            .expect("writing to a String");
    }
    out
}

#[derive(Debug, Serialize)]
pub struct StreamLayout {
    pub eval_seed: u64,
    pub eval_stream: u64,
    pub opt_seed: u64,
    /// Per sweep point `p`: SAA samples on stream `1 + 2p`, random starts on `2 + 2p`.
    pub opt_streams: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub generator: &'static str,
    pub streams: StreamLayout,
    pub spec: &'a ExperimentSpec,
    pub row_wall_times: Vec<f64>,
    pub total_wall_time: f64,
}

impl<'a> Metadata<'a> {
    pub fn new(
        command: &'a str,
        spec: &'a ExperimentSpec,
        rows: &[ResultRow],
        total_wall_time: f64,
    ) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            generator: GENERATOR_NAME,
            streams: StreamLayout {
                eval_seed: spec.eval_seed,
                eval_stream: EVAL_STREAM,
                opt_seed: spec.opt_seed,
                opt_streams: "saa = 1 + 2p, starts = 2 + 2p",
            },
            spec,
            row_wall_times: rows.iter().map(|r| r.wall_time).collect(),
            total_wall_time,
        }
    }
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(CliError::io(&path))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: dir.join(name),
        source,
    })?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// Writes `<stem>.csv` and `<stem>.meta.json` into `dir`.
pub fn write_results(
    dir: &Path,
    stem: &str,
    spec: &ExperimentSpec,
    rows: &[ResultRow],
    total_wall_time: f64,
) -> Result<(PathBuf, PathBuf)> {
    let csv = write_text(dir, &format!("{stem}.csv"), &rows_to_csv(rows))?;
    let meta = write_json(
        dir,
        &format!("{stem}.meta.json"),
        &Metadata::new(stem, spec, rows, total_wall_time),
    )?;
    Ok((csv, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Layout;
    use mauplink::ReceiverKind;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig12(0.0), "0.00000000000");
        assert_eq!(format_sig12(0.5), "0.500000000000");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(4.5), "4.50000000000");
        assert_eq!(format_sig12(12.25), "12.2500000000");
        assert_eq!(format_sig12(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(format_sig12(123456789012345.0), "123456789012345");
    }

    #[test]
    fn csv_layout() {
        let row = ResultRow {
            layout: Layout::Fpa,
            receiver: ReceiverKind::MmseSic,
            n_antennas: 2,
            span: 1.5,
            positions: vec![0.0, 0.5],
            surrogate_value: 3.25,
            ergodic_mean: 3.0,
            ergodic_stderr: 0.125,
            iterations: 0,
            wall_time: 9.0,
            seed: 7,
        };
        let csv = rows_to_csv(&[row]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(
            lines[1],
            "fpa,mmse-sic,2,1.5,3,0.125,3.25,0,0.00000000000;0.500000000000,7"
        );
    }
}
