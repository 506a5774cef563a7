//! `gaussent`: verification suites, sweeps, probes and pre-processing
//! optimization for one-side Gaussian channels.
//!
//! Exit codes: 0 ok, 1 verification failure or runtime error, 2 usage,
//! 3 ratio-violation alarm from the probe, 4 degenerate channel or input.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaussent::fock::beamsplitter_channel_oracle;
use gaussent::suites::{filtered_state_oracle, parse_selector};
use gaussent::{
    apply_oneside_channel, beamsplitter_channel, det_a_closed_form, optimize_preprocessing,
    probe_channel, sweep_entanglement, tmss_state, Error, GeofOptions, Measure, MeasureSet,
    OneSideMap, SearchMode, SymplecticOp, UGrid, Verdict,
};
use serde::Serialize;

use config::{Flags, MeasureChoice, RunConfig};

#[derive(Parser)]
#[command(
    name = "gaussent",
    version,
    about = "Entanglement distribution through one-side Gaussian channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and print a residual table.
    Verify {
        /// `all` or a comma list of: eq10, eq11, theorem1, theorem2, fact1,
        /// lemma2, appendix, oracle.
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Output entanglement over a grid of pre-squeezings, as CSV.
    Sweep(Flags),
    /// Two-state probe of the channel with `V = S~(u2)`, as JSON.
    Probe(Flags),
    /// Best pre-squeezing on the grid for each input and measure, as JSON.
    Optimize(Flags),
    /// Compare the covariance formulas with the truncated Fock simulation.
    OracleCheck(Flags),
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Failed(String),
    Violation,
    Degenerate(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Failed(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Violation => 3,
            Failure::Degenerate(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateChannel(_) => Failure::Degenerate(e.to_string()),
            Error::Domain(_)
            | Error::InvalidInput(_)
            | Error::Unphysical(_)
            | Error::ModeIndex { .. }
            | Error::DimensionMismatch { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Failed(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { suite, flags } => with_config(flags, |c| verify(&suite, &c)),
        Command::Sweep(flags) => with_config(flags, |c| sweep(&c)),
        Command::Probe(flags) => with_config(flags, |c| probe(&c)),
        Command::Optimize(flags) => with_config(flags, |c| optimize(&c)),
        Command::OracleCheck(flags) => with_config(flags, |c| oracle_check(&c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Failed(m) if !m.is_empty() => eprintln!("error: {m}"),
                Failure::Degenerate(m) => eprintln!("degenerate input: {m}"),
                Failure::Violation => eprintln!("alarm: output ratio exceeds input ratio"),
                Failure::Failed(_) => {}
            }
            ExitCode::from(f.code())
        }
    }
}

fn with_config(flags: Flags, run: impl FnOnce(RunConfig) -> Outcome) -> Outcome {
    let config = RunConfig::resolve(flags).map_err(Failure::Usage)?;
    run(config)
}

fn emit(config: &RunConfig, text: &str) -> Outcome {
    match &config.out {
        Some(path) => fs::write(path, text).map_err(|e| {
            Failure::Failed(format!("cannot write {}: {e}", Path::new(path).display()))
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Failed(format!("cannot write to stdout: {e}"))),
    }
}

fn emit_json<T: Serialize>(config: &RunConfig, value: &T) -> Outcome {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::Failed(e.to_string()))?;
    text.push('\n');
    emit(config, &text)
}

fn geof_options(config: &RunConfig) -> GeofOptions<f64> {
    GeofOptions {
        seed: config.seed,
        ..GeofOptions::default()
    }
}

fn channel(config: &RunConfig) -> Result<OneSideMap<f64>, Failure> {
    Ok(OneSideMap::Gaussian(beamsplitter_channel(
        config.theta,
        config.u3,
        config.b3,
    )?))
}

fn grid(config: &RunConfig) -> Result<UGrid<f64>, Failure> {
    Ok(UGrid::new(config.u_min, config.u_max, config.u_step)?)
}

fn single_q_prime(config: &RunConfig) -> Result<f64, Failure> {
    match config.q_prime.as_slice() {
        [q] => Ok(*q),
        _ => Err(Failure::Usage(
            "this command takes a single --qprime".into(),
        )),
    }
}

fn sci(x: f64) -> String {
    format!("{x:.8e}")
}

fn verify(selector: &str, config: &RunConfig) -> Outcome {
    let suites = parse_selector(selector).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut text = String::new();
    let mut all_passed = true;
    for suite in suites {
        let _ = writeln!(text, "== {suite}");
        match suite.run(config.seed) {
            Ok(report) => {
                for c in &report.checks {
                    all_passed &= c.passed;
                    let _ = write!(
                        text,
                        "  {}  {:<64} {:>12.3e}  threshold {:.1e}",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.measured,
                        c.threshold
                    );
                    if !c.detail.is_empty() {
                        let _ = write!(text, "  {}", c.detail);
                    }
                    text.push('\n');
                }
            }
            Err(e) => {
                all_passed = false;
                let _ = writeln!(text, "  FAIL  suite aborted: {e}");
            }
        }
    }
    let _ = writeln!(
        text,
        "{}",
        if all_passed {
            "all checks passed"
        } else {
            "some checks failed"
        }
    );
    emit(config, &text)?;
    if all_passed {
        Ok(())
    } else {
        Err(Failure::Failed(String::new()))
    }
}

fn sweep(config: &RunConfig) -> Outcome {
    let map = channel(config)?;
    let measures = match config.measure {
        MeasureChoice::Logneg => MeasureSet {
            log_neg: true,
            geof: false,
        },
        MeasureChoice::Geof => MeasureSet {
            log_neg: false,
            geof: true,
        },
        MeasureChoice::Both => MeasureSet::BOTH,
    };
    let result = sweep_entanglement(
        &map,
        single_q_prime(config)?,
        &grid(config)?,
        measures,
        &geof_options(config),
    )?;

    let mut out = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::Failed(e.to_string());
    out.write_record(["u2", "log_neg", "geof"])
        .map_err(csv_err)?;
    let cell = |v: Option<f64>| v.map(sci).unwrap_or_default();
    for row in &result.rows {
        if let Some(msg) = &row.geof_error {
            eprintln!(
                "warning: geof did not converge at u2 = {}: {msg}",
                sci(row.u2)
            );
        }
        out.write_record([sci(row.u2), cell(row.log_neg), cell(row.geof)])
            .map_err(csv_err)?;
    }
    let mut text = String::from_utf8(
        out.into_inner()
            .map_err(|e| Failure::Failed(e.to_string()))?,
    )
    .expect("ascii output");
    let argmax = |requested: bool, u: Option<f64>| match (requested, u) {
        (false, _) => "not requested".to_string(),
        (true, Some(u)) => format!("u2 = {}", sci(u)),
        (true, None) => "no values".to_string(),
    };
    let _ = writeln!(
        text,
        "# argmax log_neg: {}; argmax geof: {}",
        argmax(measures.log_neg, result.argmax_log_neg),
        argmax(measures.geof, result.argmax_geof)
    );
    emit(config, &text)?;
    if measures.geof && result.rows.iter().all(|r| r.geof.is_none()) {
        return Err(Failure::Failed("geof failed on every grid point".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct ProbeOutput {
    config: RunConfig,
    u2: f64,
    #[serde(flatten)]
    report: gaussent::ProbeReport<f64>,
}

fn probe(config: &RunConfig) -> Outcome {
    if config.measure == MeasureChoice::Logneg {
        return Err(Failure::Usage(
            "the probe compares characteristic values; use --measure geof".into(),
        ));
    }
    let map = channel(config)?;
    let v = SymplecticOp::squeeze_u(config.u2)?;
    let report = probe_channel(
        &map,
        &v,
        config.q,
        config.qb,
        config.tol,
        Measure::Geof,
        &geof_options(config),
    )?;
    let verdict = report.verdict;
    emit_json(
        config,
        &ProbeOutput {
            config: config.clone(),
            u2: config.u2,
            report,
        },
    )?;
    if verdict == Verdict::Violation {
        return Err(Failure::Violation);
    }
    Ok(())
}

#[derive(Serialize)]
struct OptimizeOutput {
    config: RunConfig,
    optima: Vec<OptimumEntry>,
}

#[derive(Serialize)]
struct OptimumEntry {
    q_prime: f64,
    #[serde(flatten)]
    optimum: gaussent::Optimum<f64>,
}

fn optimize(config: &RunConfig) -> Outcome {
    let map = channel(config)?;
    let grid = grid(config)?;
    let opts = geof_options(config);
    let measures: &[Measure] = match config.measure {
        MeasureChoice::Logneg => &[Measure::LogNeg],
        MeasureChoice::Geof => &[Measure::Geof],
        MeasureChoice::Both => &[Measure::LogNeg, Measure::Geof],
    };
    let mut optima = Vec::new();
    for &q_prime in &config.q_prime {
        for &measure in measures {
            let optimum =
                optimize_preprocessing(&map, q_prime, SearchMode::UGrid(grid), measure, &opts)?;
            optima.push(OptimumEntry { q_prime, optimum });
        }
    }
    emit_json(
        config,
        &OptimizeOutput {
            config: config.clone(),
            optima,
        },
    )
}

/// Largest cutoff per mode for the three-mode channel simulation.
const THREE_MODE_CUTOFF: usize = 25;

fn oracle_check(config: &RunConfig) -> Outcome {
    let n = config.cutoff;
    let mut text = String::new();
    let mut passed = true;
    let mut worst: f64 = 0.0;
    let mut max_tail: f64 = 0.0;
    for q0 in [0.2, 0.4, 0.6] {
        for q1 in [0.2, 0.4, 0.6] {
            for r in [-0.5, -0.25, 0.0, 0.25, 0.5] {
                let (g, tail) = filtered_state_oracle(q0, r, q1, n)?;
                worst = worst.max((g.det_a() - det_a_closed_form(q0, q1, r)).abs());
                max_tail = max_tail.max(tail);
            }
        }
    }
    let ok = worst < 1e-6;
    passed &= ok;
    let _ = writeln!(
        text,
        "{}  det A of filtered squeezed states, N = {n}: max error {} (< 1e-6), largest squeezing tail {}",
        if ok { "PASS" } else { "FAIL" },
        sci(worst),
        sci(max_tail)
    );

    let n3 = n.min(THREE_MODE_CUTOFF);
    let q = single_q_prime(config)?;
    let closed = apply_oneside_channel(
        &tmss_state(q)?,
        &beamsplitter_channel(config.theta, config.u3, config.b3)?,
        1,
    )?;
    match beamsplitter_channel_oracle(q, config.theta, config.u3, config.b3, n3, 1e-12) {
        Ok(brute) => {
            let err = (brute.cov() - closed.cov()).amax();
            let ok = err < 1e-4;
            passed &= ok;
            let _ = writeln!(
                text,
                "{}  beamsplitter channel on q' = {q}, N = {n3} per mode: max covariance error {} (< 1e-4)",
                if ok { "PASS" } else { "FAIL" },
                sci(err)
            );
        }
        Err(e @ Error::Truncation { .. }) => {
            passed = false;
            let _ = writeln!(
                text,
                "FAIL  beamsplitter channel on q' = {q}, N = {n3} per mode: {e}; \
                 the three-mode simulation stops at N = {THREE_MODE_CUTOFF}, so use a milder ancilla (smaller |ln u3|, b3 closer to 1/2)"
            );
        }
        Err(e) => return Err(e.into()),
    }
    emit(config, &text)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Failed(String::new()))
    }
}
