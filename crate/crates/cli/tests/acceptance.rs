//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process fails if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mauplink::model::sample_nlos_with;
use mauplink::{
    ergodic_sum_rate, fpa_positions, los_matrix, mmse_receiver, project, sic_bound_objective,
    sic_receiver, sic_sum_rate, zf_receiver, zf_surrogate, AntennaPositions, ChannelRealization,
    Constraints, RandomStream, ReceiverKind, SystemConfig,
};
use mauplink_cli::output::rows_to_csv;
use mauplink_cli::{
    run_grad_check, run_sweep_antennas, run_sweep_span, ExperimentSpec, Layout, ResultRow,
    SweepKind,
};
use rand::seq::SliceRandom;
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn random_feasible<R: Rng>(rng: &mut R, config: &SystemConfig) -> AntennaPositions {
    let mut raw: Vec<f64> = (0..config.n_antennas)
        .map(|_| rng.random_range(0.0..config.span))
        .collect();
    raw.sort_by(f64::total_cmp);
    project(&raw, &config.constraints()).unwrap()
}

fn uniform_vec<R: Rng>(rng: &mut R, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..hi)).collect()
}

fn random_channel<R: Rng>(
    rng: &mut R,
    x: &AntennaPositions,
    config: &SystemConfig,
) -> ChannelRealization {
    let los = los_matrix(x, config).unwrap();
    let nlos = sample_nlos_with(rng, config.n_antennas, config.n_users);
    ChannelRealization::from_parts(los, nlos, config).unwrap()
}

fn scenario_config(n: usize, span: f64) -> SystemConfig {
    ExperimentSpec::default().config_at(n, span).unwrap()
}

fn find(
    rows: &[ResultRow],
    layout: Layout,
    receiver: ReceiverKind,
    n: usize,
    span: f64,
) -> &ResultRow {
    rows.iter()
        .find(|r| {
            r.layout == layout && r.receiver == receiver && r.n_antennas == n && r.span == span
        })
        .unwrap_or_else(|| panic!("missing row {layout} {receiver} N={n} L={span}"))
}

fn combined(rows: &[&ResultRow]) -> f64 {
    rows.iter()
        .map(|r| r.ergodic_stderr.powi(2))
        .sum::<f64>()
        .sqrt()
}

fn gradients() -> Outcome {
    let spec = ExperimentSpec::default();
    let report = run_grad_check(&spec).unwrap();
    let parts: Vec<String> = report
        .checks
        .iter()
        .map(|c| format!("{} {:.2e}", c.objective, c.max_relative_error))
        .collect();
    let ok = report.checks.len() == 3
        && report
            .checks
            .iter()
            .all(|c| c.trials == 20 && c.max_relative_error < 1e-5);
    outcome(ok, parts.join(", "))
}

fn sic_identity() -> Outcome {
    let mut rng = RandomStream::new(11, 0).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=12usize);
        let m = rng.random_range(1..=6usize);
        let span = (n - 1) as f64 * 0.5 + rng.random_range(0.0..4.0);
        let power = uniform_vec(&mut rng, m, 0.1, 100.0);
        let k = uniform_vec(&mut rng, m, 0.1, 20.0);
        let beta = uniform_vec(&mut rng, m, 0.2, 2.0);
        let angles = uniform_vec(&mut rng, m, -1.5, 1.5);
        let config = SystemConfig::new(n, span, 0.5, 1.0, power, k, beta, angles).unwrap();
        let x = random_feasible(&mut rng, &config);
        let channel = random_channel(&mut rng, &x, &config);
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng);
        let per_user_sum = sic_receiver(&channel, &config, &order)
            .unwrap()
            .1
            .sum_rate();
        let joint = sic_sum_rate(&channel, &config).unwrap();
        worst = worst.max((per_user_sum - joint).abs() / joint.abs().max(1e-300));
    }
    outcome(
        worst < 1e-8,
        format!("100 channels, worst relative error {worst:.2e}"),
    )
}

fn receiver_ordering() -> Outcome {
    let config = scenario_config(10, 8.0);
    let mut rng = RandomStream::new(12, 0).rng();
    let mut violations = 0;
    let mut worst_slack = f64::INFINITY;
    for _ in 0..1000 {
        let x = random_feasible(&mut rng, &config);
        let channel = random_channel(&mut rng, &x, &config);
        let zf = zf_receiver(&channel, &config).unwrap().1.sum_rate();
        let mmse = mmse_receiver(&channel, &config).unwrap().1.sum_rate();
        let sic = sic_sum_rate(&channel, &config).unwrap();
        let slack = (mmse - zf).min(sic - mmse);
        worst_slack = worst_slack.min(slack);
        if slack < -1e-8 {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("1000 instances, {violations} violations, smallest margin {worst_slack:.2e}"),
    )
}

fn zf_tightness() -> Outcome {
    let config = scenario_config(10, 8.0);
    let x = fpa_positions(&config).unwrap();
    let approx = zf_surrogate(&x, &config).unwrap();
    let mc = ergodic_sum_rate(
        &x,
        &config,
        ReceiverKind::Zf,
        10_000,
        &RandomStream::new(13, 0),
    )
    .unwrap();
    let rel = (approx - mc.mean).abs() / mc.mean;
    outcome(
        rel < 0.10,
        format!(
            "surrogate {approx:.4}, Monte Carlo {:.4} +- {:.4}, relative gap {:.2}%",
            mc.mean,
            mc.std_error,
            100.0 * rel
        ),
    )
}

fn jensen_dominance() -> Outcome {
    let config = scenario_config(10, 8.0);
    let mut rng = RandomStream::new(14, 0).rng();
    let mut worst_margin = f64::INFINITY;
    for t in 0..10 {
        let x = random_feasible(&mut rng, &config);
        let bound = sic_bound_objective(&x, &config).unwrap();
        let mc = ergodic_sum_rate(
            &x,
            &config,
            ReceiverKind::MmseSic,
            10_000,
            &RandomStream::new(14, 1 + t),
        )
        .unwrap();
        worst_margin = worst_margin.min(bound - (mc.mean - 3.0 * mc.std_error));
    }
    outcome(
        worst_margin >= 0.0,
        format!("10 layouts, smallest bound minus (mean - 3 se) = {worst_margin:.4}"),
    )
}

fn span_gap(rows: &[ResultRow]) -> Outcome {
    let ma = find(rows, Layout::Ma, ReceiverKind::Zf, 10, 8.0);
    let fpa = find(rows, Layout::Fpa, ReceiverKind::Zf, 10, 8.0);
    let gap = ma.ergodic_mean - fpa.ergodic_mean;
    outcome(
        gap >= 2.5,
        format!(
            "L = 8: MA+ZF {:.4}, FPA+ZF {:.4}, gap {gap:.3} bits/s/Hz",
            ma.ergodic_mean, fpa.ergodic_mean
        ),
    )
}

fn span_plateau(rows: &[ResultRow]) -> Outcome {
    let at = |l| find(rows, Layout::Ma, ReceiverKind::Zf, 10, l);
    let (r5, r6, r8, r9) = (at(5.0), at(6.0), at(8.0), at(9.0));
    let rise = r9.ergodic_mean - r5.ergodic_mean;
    let rise_ok = rise > 2.0 * combined(&[r5, r9]);
    let early = r6.ergodic_mean - r5.ergodic_mean;
    let late = r9.ergodic_mean - r8.ergodic_mean;
    let slowdown_ok = early - late > 2.0 * combined(&[r5, r6, r8, r9]);
    outcome(
        rise_ok && slowdown_ok,
        format!("L 5 -> 9: {rise:+.3}; increments 5 -> 6: {early:+.3}, 8 -> 9: {late:+.3}"),
    )
}

fn antenna_trends(rows: &[ResultRow]) -> Outcome {
    let grid: Vec<usize> = (6..=13).collect();
    let mut failures = Vec::new();
    let mut smallest_step = f64::INFINITY;
    for layout in [Layout::Ma, Layout::Fpa] {
        for receiver in ReceiverKind::ALL {
            for w in grid.windows(2) {
                let a = find(rows, layout, receiver, w[0], 6.0);
                let b = find(rows, layout, receiver, w[1], 6.0);
                let step = b.ergodic_mean - a.ergodic_mean;
                smallest_step = smallest_step.min(step);
                if step <= 2.0 * combined(&[a, b]) {
                    failures.push(format!(
                        "{layout}+{receiver} N {} -> {}: {step:+.4}",
                        w[0], w[1]
                    ));
                }
            }
        }
    }
    let mut gaps = Vec::new();
    for receiver in ReceiverKind::ALL {
        let ends: Vec<(&ResultRow, &ResultRow)> = [6, 13]
            .iter()
            .map(|&n| {
                (
                    find(rows, Layout::Ma, receiver, n, 6.0),
                    find(rows, Layout::Fpa, receiver, n, 6.0),
                )
            })
            .collect();
        let gap = |(ma, fpa): (&ResultRow, &ResultRow)| ma.ergodic_mean - fpa.ergodic_mean;
        let (g6, g13) = (gap(ends[0]), gap(ends[1]));
        let se = combined(&[ends[0].0, ends[0].1, ends[1].0, ends[1].1]);
        if g6 - g13 <= 2.0 * se {
            failures.push(format!("{receiver} gap N=6 {g6:.3} vs N=13 {g13:.3}"));
        }
        gaps.push(format!("{receiver} {g6:.2} -> {g13:.2}"));
    }
    let detail = if failures.is_empty() {
        format!(
            "42 steps increase (smallest {smallest_step:+.3}); MA-FPA gap N=6 -> 13: {}",
            gaps.join(", ")
        )
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn projection_suite() -> Outcome {
    let c = |span, d| Constraints {
        span,
        min_spacing: d,
    };
    let close = |a: &[f64], b: &[f64]| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
    };
    let mut ok = close(
        project(&[0.3, 0.4], &c(2.0, 0.5)).unwrap().as_slice(),
        &[0.3, 0.8],
    ) && close(
        project(&[0.9, 0.9, 0.9], &c(1.0, 0.5)).unwrap().as_slice(),
        &[0.0, 0.5, 1.0],
    );
    let feasible = [0.0, 0.5, 1.7, 3.0];
    ok &= close(
        project(&feasible, &c(4.0, 0.5)).unwrap().as_slice(),
        &feasible,
    );

    let mut rng = RandomStream::new(15, 0).rng();
    let mut infeasible = 0;
    let mut not_idempotent = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=12usize);
        let d = rng.random_range(0.1..1.0);
        let span = (n - 1) as f64 * d + rng.random_range(0.0..5.0);
        let k = c(span, d);
        let raw: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-span..2.0 * span))
            .collect();
        let once = project(&raw, &k).unwrap();
        if !once.is_feasible(&k) {
            infeasible += 1;
        }
        let twice = project(once.as_slice(), &k).unwrap();
        if !close(once.as_slice(), twice.as_slice()) {
            not_idempotent += 1;
        }
    }
    ok &= infeasible == 0 && not_idempotent == 0;
    outcome(
        ok,
        format!("hand examples and fixed point exact; 10^4 random vectors: {infeasible} infeasible, {not_idempotent} not idempotent"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        sweep_kind: SweepKind::Span,
        sweep_values: vec![5.0, 6.5],
        saa_samples: 20,
        eval_samples: 1000,
        n_starts: 2,
        ..ExperimentSpec::default()
    };
    let config = dir.path().join("short.json");
    std::fs::write(&config, spec.emit()).unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_mauplink"))
            .args(["sweep-span", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(out.join("sweep_span.csv")).unwrap()
    };
    let (a, b) = (run("first"), run("second"));
    let in_process = rows_to_csv(&run_sweep_span(&spec).unwrap()).into_bytes();
    outcome(
        a == b && a == in_process,
        format!(
            "two CLI runs and one in-process run, {} bytes, identical: {}",
            a.len(),
            a == b && a == in_process
        ),
    )
}

fn main() -> ExitCode {
    let mut all_passed = true;
    let mut report = |id: u32, name: &str, budget: Duration, f: &mut dyn FnMut() -> Outcome| {
        let started = Instant::now();
        let o = f();
        let elapsed = started.elapsed();
        let in_budget = elapsed <= budget;
        let passed = o.passed && in_budget;
        all_passed &= passed;
        println!(
            "{} [{id:>2}] {name}: {} ({:.1}s of {}s budget)",
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    };
    let minutes = |m: u64| Duration::from_secs(60 * m);

    report(
        1,
        "analytic gradients vs finite differences",
        minutes(1),
        &mut gradients,
    );
    report(
        2,
        "SIC per-user rates sum to the log-det rate",
        Duration::from_secs(10),
        &mut sic_identity,
    );
    report(
        3,
        "SIC >= MMSE >= ZF per realization",
        Duration::from_secs(10),
        &mut receiver_ordering,
    );
    report(
        4,
        "ZF surrogate within 10% of Monte Carlo",
        minutes(1),
        &mut zf_tightness,
    );
    report(
        5,
        "Jensen bound dominates the SIC rate",
        minutes(1),
        &mut jensen_dominance,
    );

    let started = Instant::now();
    let span_spec = ExperimentSpec::default()
        .with_sweep(SweepKind::Span)
        .unwrap();
    let span_rows = run_sweep_span(&span_spec).unwrap();
    let span_time = started.elapsed();
    report(
        6,
        "MA+ZF beats FPA+ZF by 2.5 bits/s/Hz at L = 8",
        minutes(10),
        &mut || {
            let mut o = span_gap(&span_rows);
            o.detail = format!("{} [span sweep {:.1}s]", o.detail, span_time.as_secs_f64());
            if span_time > minutes(10) {
                o.passed = false;
            }
            o
        },
    );
    report(7, "MA+ZF saturates in L", minutes(10), &mut || {
        span_plateau(&span_rows)
    });

    report(
        8,
        "all schemes improve with N, MA gain shrinks",
        minutes(15),
        &mut || {
            let spec = ExperimentSpec::default()
                .with_sweep(SweepKind::Antennas)
                .unwrap();
            antenna_trends(&run_sweep_antennas(&spec).unwrap())
        },
    );
    report(
        9,
        "projection unit suite",
        Duration::from_secs(10),
        &mut projection_suite,
    );
    report(
        10,
        "sweep CSV is byte-identical on re-run",
        minutes(2),
        &mut determinism,
    );

    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
