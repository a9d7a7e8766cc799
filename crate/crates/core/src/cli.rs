//! The `ctxopt` command line: argument model, dispatch and report rendering.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{self, ComplexValue, ORTHOGONALITY_TOL};
use crate::context_verifier::{
    verify_relabel_equivalence, verify_shared_observable, ContextPair, LogicalPermutation,
    VerificationReport, DEFAULT_TOL,
};
use crate::contextuality_oracle::{
    inequality_report, state_independence_scan, DensityMatrix, InequalityReport, DEFAULT_SEED,
};
use crate::error::{Error, Result};
use crate::mode_calculus::max_norm;
use crate::observable_extraction::{
    detection_probability, extract_projector, LogicalMatrix, LogicalState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Simulate half-wave plate / beam splitter networks and check qutrit
/// contextuality claims. Plate angles in network files are in degrees.
#[derive(Debug, Clone, Parser)]
#[command(name = "ctxopt", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Report format. `csv` is available for `simulate` and `scan` (default
    /// for `scan`); everything else is JSON.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Detector projectors on logical modes 0, 1, 2 and click probabilities.
    Simulate {
        network: PathBuf,
        /// Logical state file `{"amplitudes": [a0, a1, a2]}`; defaults to the
        /// equal superposition.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Does a shared detector measure the same observable in two networks?
    VerifyContext {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        detector: String,
        /// Max-entry tolerance on the projector difference.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Does swapping two logical modes leave every detector's observable
    /// unchanged once the swap is undone?
    VerifyRelabel {
        network: PathBuf,
        /// Logical modes to exchange, as `i,j`.
        #[arg(long, default_value = "2,0", value_parser = parse_swap)]
        swap: (usize, usize),
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Exact noncontextual bound by enumeration, and the quantum value for
    /// the maximally mixed state.
    Bound {
        inequality: PathBuf,
        /// Orthogonality tolerance used to rebuild the compatibility graph.
        #[arg(long, default_value_t = ORTHOGONALITY_TOL)]
        tol: f64,
    },
    /// Quantum value over seeded random pure states (plus the maximally
    /// mixed state, last row).
    Scan {
        inequality: PathBuf,
        #[arg(long, default_value_t = 100)]
        states: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Orthogonality tolerance used to rebuild the compatibility graph.
        #[arg(long, default_value_t = ORTHOGONALITY_TOL)]
        tol: f64,
    },
}

fn parse_swap(s: &str) -> std::result::Result<(usize, usize), String> {
    let (i, j) = s.split_once(',').ok_or("expected i,j")?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((parse(i)?, parse(j)?))
}

/// Rendered report and whether every verification in it passed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: String,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
struct DetectorRow {
    name: String,
    output_mode: String,
    projector: Vec<Vec<ComplexValue>>,
    click_probability: f64,
    /// `<A> = 1 - 2 p` with click = -1.
    expectation: f64,
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    command: &'static str,
    logical_inputs: Vec<String>,
    state: Vec<ComplexValue>,
    detectors: Vec<DetectorRow>,
    /// `|sum_d P_d - I|_max` when the network has exactly three detectors.
    #[serde(skip_serializing_if = "Option::is_none")]
    completeness_deviation: Option<f64>,
}

#[derive(Debug, Serialize)]
struct BoundReport {
    command: &'static str,
    name: String,
    rays: usize,
    edges: Vec<[usize; 2]>,
    state: &'static str,
    #[serde(flatten)]
    report: InequalityReport,
}

#[derive(Debug, Serialize)]
struct ScanReport {
    command: &'static str,
    name: String,
    seed: u64,
    states: usize,
    min: f64,
    max: f64,
    spread: f64,
    values: Vec<f64>,
}

fn matrix_rows(m: &LogicalMatrix) -> Vec<Vec<ComplexValue>> {
    (0..3)
        .map(|i| (0..3).map(|j| ComplexValue::from(m[(i, j)])).collect())
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn json_only(format: Option<Format>, command: &str) -> Result<()> {
    match format {
        Some(Format::Csv) => Err(Error::Schema(format!("{command} only writes JSON reports"))),
        _ => Ok(()),
    }
}

fn verification(report: VerificationReport) -> RunOutcome {
    RunOutcome {
        passed: report.passed,
        report: to_json(&report),
    }
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let format = config.output.format;
    match &config.command {
        Command::Simulate { network, state } => {
            let net = config::parse_network_file(network)?;
            let psi = match state {
                Some(path) => config::parse_state_file(path)?,
                None => LogicalState::repeat(Complex64::new(1.0, 0.0)).unscale(3f64.sqrt()),
            };
            let mut rows = Vec::new();
            let mut total = LogicalMatrix::zeros();
            for (name, mode) in net.detectors() {
                let p = extract_projector(&net, name)?;
                total += p.matrix();
                let prob = detection_probability(&psi, &p)?;
                rows.push(DetectorRow {
                    name: name.clone(),
                    output_mode: mode.to_string(),
                    projector: matrix_rows(p.matrix()),
                    click_probability: prob,
                    expectation: 1.0 - 2.0 * prob,
                });
            }
            let completeness_deviation =
                (rows.len() == 3).then(|| max_norm(&(total - LogicalMatrix::identity())));
            let report = match format {
                Some(Format::Csv) => {
                    let mut s = String::from("detector,output_mode,click_probability\n");
                    for r in &rows {
                        writeln!(s, "{},{},{}", r.name, r.output_mode, r.click_probability)
                            .unwrap();
                    }
                    s
                }
                _ => to_json(&SimulateReport {
                    command: "simulate",
                    logical_inputs: net
                        .logical_inputs()
                        .iter()
                        .map(ToString::to_string)
                        .collect(),
                    state: psi.iter().map(|&z| z.into()).collect(),
                    detectors: rows,
                    completeness_deviation,
                }),
            };
            Ok(RunOutcome {
                report,
                passed: true,
            })
        }
        Command::VerifyContext {
            left,
            right,
            detector,
            tol,
        } => {
            json_only(format, "verify-context")?;
            let left = config::parse_network_file(left).map_err(|e| e.in_network("left"))?;
            let right = config::parse_network_file(right).map_err(|e| e.in_network("right"))?;
            let pair = ContextPair::new(left, right, detector.clone())?;
            Ok(verification(verify_shared_observable(&pair, *tol)?))
        }
        Command::VerifyRelabel { network, swap, tol } => {
            json_only(format, "verify-relabel")?;
            let net = config::parse_network_file(network)?;
            let perm = LogicalPermutation::swap(swap.0, swap.1)?;
            Ok(verification(verify_relabel_equivalence(&net, &perm, *tol)?))
        }
        Command::Bound { inequality, tol } => {
            json_only(format, "bound")?;
            let ineq = config::parse_inequality_file(inequality, *tol)?;
            let report =
                inequality_report(&ineq.expr, &ineq.rays, &DensityMatrix::maximally_mixed())?;
            Ok(RunOutcome {
                report: to_json(&BoundReport {
                    command: "bound",
                    name: ineq.name,
                    rays: ineq.rays.len(),
                    edges: ineq.graph.edges().iter().map(|&(i, j)| [i, j]).collect(),
                    state: "maximally_mixed",
                    report,
                }),
                passed: true,
            })
        }
        Command::Scan {
            inequality,
            states,
            seed,
            tol,
        } => {
            let ineq = config::parse_inequality_file(inequality, *tol)?;
            let scan = state_independence_scan(&ineq.expr, &ineq.rays, *states, *seed)?;
            let report = match format {
                Some(Format::Json) => to_json(&ScanReport {
                    command: "scan",
                    name: ineq.name,
                    seed: *seed,
                    states: *states,
                    min: scan.min,
                    max: scan.max,
                    spread: scan.spread,
                    values: scan.values,
                }),
                _ => {
                    let mut s = String::from("state_index,value\n");
                    for (i, v) in scan.values.iter().enumerate() {
                        writeln!(s, "{i},{v}").unwrap();
                    }
                    s
                }
            };
            Ok(RunOutcome {
                report,
                passed: true,
            })
        }
    }
}

/// Structured error document written to standard error.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({
        "error": {
            "kind": err.kind(),
            "message": err.to_string(),
        }
    })
    .to_string()
}
