use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mauplink::ReceiverKind;
use mauplink_cli::output::{trace_to_csv, write_json, write_results, write_text};
use mauplink_cli::{
    run_eval, run_grad_check, run_single, run_sweep_antennas, run_sweep_span, ExperimentSpec,
    Layout, Result, ResultRow, SweepKind,
};

#[derive(Parser)]
#[command(
    name = "mauplink",
    version,
    about = "Movable-antenna uplink position design experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize positions for each receiver at one (N, L) and evaluate them.
    Optimize(Common),
    /// Sweep the span L at fixed N.
    SweepSpan(Common),
    /// Sweep the antenna count N at fixed L.
    SweepAntennas(Common),
    /// Compare analytic surrogate gradients with finite differences.
    GradCheck(Common),
    /// Monte Carlo sum rates at fixed positions (the FPA if none are given).
    Eval {
        #[command(flatten)]
        common: Common,
        /// Comma-separated antenna coordinates in wavelengths.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        positions: Option<Vec<f64>>,
    },
    /// Print the default configuration as JSON.
    DefaultConfig,
}

#[derive(Args)]
struct Common {
    /// JSON experiment file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for CSV and metadata files.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Overrides both the evaluation and the optimization seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of zf, mmse, mmse-sic.
    #[arg(long, value_delimiter = ',')]
    receivers: Option<Vec<ReceiverKind>>,
    /// Comma-separated subset of ma, fpa.
    #[arg(long, value_delimiter = ',')]
    layouts: Option<Vec<Layout>>,
}

impl Common {
    fn load(&self, kind: SweepKind) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::load(path)?,
            None => ExperimentSpec::default(),
        };
        if let Some(seed) = self.seed {
            spec.eval_seed = seed;
            spec.opt_seed = seed;
        }
        if let Some(r) = &self.receivers {
            spec.receivers = r.clone();
        }
        if let Some(l) = &self.layouts {
            spec.layouts = l.clone();
        }
        let spec = spec.with_sweep(kind)?;
        spec.validate()?;
        Ok(spec)
    }
}

fn print_rows(rows: &[ResultRow]) {
    println!(
        "{:<6} {:<9} {:>3} {:>6} {:>10} {:>8} {:>10} {:>5}",
        "layout", "receiver", "N", "L", "mean", "stderr", "surrogate", "iter"
    );
    for r in rows {
        println!(
            "{:<6} {:<9} {:>3} {:>6.2} {:>10.4} {:>8.4} {:>10.4} {:>5}",
            r.layout.as_str(),
            r.receiver.as_str(),
            r.n_antennas,
            r.span,
            r.ergodic_mean,
            r.ergodic_stderr,
            r.surrogate_value,
            r.iterations
        );
    }
}

fn sweep(common: &Common, kind: SweepKind, stem: &str) -> Result<()> {
    let spec = common.load(kind)?;
    let started = Instant::now();
    let rows = match kind {
        SweepKind::Span => run_sweep_span(&spec)?,
        _ => run_sweep_antennas(&spec)?,
    };
    let (csv, _) = write_results(
        &common.out,
        stem,
        &spec,
        &rows,
        started.elapsed().as_secs_f64(),
    )?;
    print_rows(&rows);
    println!("wrote {}", csv.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize(common) => {
            let spec = common.load(SweepKind::None)?;
            let started = Instant::now();
            let runs = run_single(&spec)?;
            let rows: Vec<ResultRow> = runs.iter().map(|r| r.row.clone()).collect();
            for run in &runs {
                if let Some(trace) = &run.trace {
                    write_text(
                        &common.out,
                        &format!("trace_{}.csv", run.row.receiver),
                        &trace_to_csv(trace),
                    )?;
                }
            }
            let (csv, _) = write_results(
                &common.out,
                "optimize",
                &spec,
                &rows,
                started.elapsed().as_secs_f64(),
            )?;
            print_rows(&rows);
            println!("wrote {}", csv.display());
        }
        Command::SweepSpan(common) => sweep(&common, SweepKind::Span, "sweep_span")?,
        Command::SweepAntennas(common) => sweep(&common, SweepKind::Antennas, "sweep_antennas")?,
        Command::GradCheck(common) => {
            let spec = common.load(SweepKind::None)?;
            let report = run_grad_check(&spec)?;
            for c in &report.checks {
                println!(
                    "{:<10} {:>3} trials  max relative error {:.3e}",
                    c.objective, c.trials, c.max_relative_error
                );
            }
            if let Some(g) = report.zf_single_user_grad_max {
                println!("zf-approx with one user: max |gradient| {g:.3e}");
            }
            let path = write_json(&common.out, "grad_check.json", &report)?;
            println!("wrote {}", path.display());
            report.into_result()?;
        }
        Command::Eval { common, positions } => {
            let mut spec = common.load(SweepKind::None)?;
            if let Some(p) = positions {
                spec.n_antennas = p.len();
                spec.positions = Some(p);
            }
            let started = Instant::now();
            let rows = run_eval(&spec)?;
            let (csv, _) = write_results(
                &common.out,
                "eval",
                &spec,
                &rows,
                started.elapsed().as_secs_f64(),
            )?;
            print_rows(&rows);
            println!("wrote {}", csv.display());
        }
        Command::DefaultConfig => println!("{}", ExperimentSpec::default().emit()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
