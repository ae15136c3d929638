//! `frames`: certify frames, duals and their constructions for problems given
//! as JSON files. Reports go to stdout as JSON; diagnostics go to stderr.
//!
//! Exit codes: 0 when the certified property holds, 1 when it is certified
//! to fail, 2 for malformed input or usage errors.

mod commands;
mod error;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use cframe::{Side, Tolerances};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::commands::{Outcome, Weights};
use crate::error::{CliError, CliResult};
use crate::problem::Problem;

const BUILTIN_EXAMPLE: &str = include_str!("../examples/example25.json");

#[derive(Parser)]
#[command(name = "frames", version, about = "Continuous frames in finite-dimensional Hilbert C*-modules")]
struct Cli {
    /// Problem file. Defaults to the built-in worked example.
    #[arg(long, global = true)]
    file: Option<PathBuf>,

    /// Uniform numerical tolerance for every certificate.
    #[arg(long, global = true, env = "FRAMES_TOL", allow_negative_numbers = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FrameArg {
    #[arg(long)]
    frame: String,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    frame: String,
    #[arg(long)]
    dual: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Right,
    Left,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Right => Side::Right,
            SideArg::Left => Side::Left,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Optimal frame bounds and the frame verdict.
    Bounds(FrameArg),
    /// Check claimed lower and upper frame bounds.
    VerifyBounds {
        #[command(flatten)]
        frame: FrameArg,
        #[arg(long, allow_negative_numbers = true)]
        lower: f64,
        #[arg(long, allow_negative_numbers = true)]
        upper: f64,
    },
    /// Frame operator, its inverse and the canonical dual.
    CanonicalDual(FrameArg),
    /// Certify that two maps form a dual pair.
    DualCheck(PairArgs),
    /// Iterate the dual sequence from a known dual.
    DualSeq {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 1)]
        steps: u32,
        #[arg(long, value_enum, default_value = "right")]
        side: SideArg,
        /// Jump straight to the term after index I using the closed form.
        #[arg(long, conflicts_with = "steps")]
        closed: Option<u32>,
    },
    /// Split a dual into the canonical dual plus a null Bessel map.
    DualDecompose(PairArgs),
    /// Basis of polynomial null Bessel maps up to a degree.
    NullFamily {
        #[command(flatten)]
        frame: FrameArg,
        #[arg(long)]
        degree: usize,
    },
    /// Build the generating operator of a dual and check its relations.
    KOp {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Self-adjointness of the reproducing kernel of a pair.
    KernelSymmetry {
        #[command(flatten)]
        pair: PairArgs,
        /// Uniform grid size; defaults to the quadrature nodes.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Order comparison of a dual against the canonical dual.
    Minimality(PairArgs),
    /// Frame built from a dual pair under two operators.
    SumFrame {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        x1: String,
        #[arg(long)]
        x2: String,
    },
    /// Dual of a weighted combination of two duals.
    #[command(group(ArgGroup::new("weights").required(true).args(["x1", "alpha", "a1"])))]
    SumDual {
        #[command(flatten)]
        pair: PairArgs,
        /// The second dual.
        #[arg(long)]
        other: String,
        #[arg(long, requires = "x2")]
        x1: Option<String>,
        #[arg(long, requires = "x1")]
        x2: Option<String>,
        #[arg(long, requires = "beta")]
        alpha: Option<String>,
        #[arg(long, requires = "alpha")]
        beta: Option<String>,
        #[arg(long, requires = "a2")]
        a1: Option<String>,
        #[arg(long, requires = "a1")]
        a2: Option<String>,
    },
    /// Map scaled on the left by an algebra element.
    Scaled {
        #[command(flatten)]
        frame: FrameArg,
        #[arg(long)]
        element: String,
    },
    /// Riesz-type diagnostic of a frame.
    RieszDiagnostic(FrameArg),
    /// Recompute the built-in worked example and diff it against its displayed values.
    Example25,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Bounds(_) => "bounds",
            Self::VerifyBounds { .. } => "verify-bounds",
            Self::CanonicalDual(_) => "canonical-dual",
            Self::DualCheck(_) => "dual-check",
            Self::DualSeq { .. } => "dual-seq",
            Self::DualDecompose(_) => "dual-decompose",
            Self::NullFamily { .. } => "null-family",
            Self::KOp { .. } => "k-op",
            Self::KernelSymmetry { .. } => "kernel-symmetry",
            Self::Minimality(_) => "minimality",
            Self::SumFrame { .. } => "sum-frame",
            Self::SumDual { .. } => "sum-dual",
            Self::Scaled { .. } => "scaled",
            Self::RieszDiagnostic(_) => "riesz-diagnostic",
            Self::Example25 => "example25",
        }
    }
}

fn tolerances(tol: Option<f64>) -> CliResult<Tolerances> {
    match tol {
        None => Ok(Tolerances::default()),
        Some(t) if t.is_finite() && t > 0.0 => Ok(Tolerances::uniform(t)),
        Some(t) => Err(CliError::Usage(format!("tolerance must be positive and finite, got {t}"))),
    }
}

fn load(file: Option<&PathBuf>) -> CliResult<Problem> {
    match file {
        Some(path) => Problem::load(path),
        None => Problem::parse(BUILTIN_EXAMPLE, "<built-in example>", None),
    }
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    let tol = tolerances(cli.tol)?;
    if matches!(cli.command, Command::Example25) && cli.file.is_some() {
        return Err(CliError::Usage("example25 always runs on the built-in example".into()));
    }
    let p = load(cli.file.as_ref())?;
    let t = &tol;
    match &cli.command {
        Command::Bounds(a) => commands::bounds(&p, &a.frame, t),
        Command::VerifyBounds { frame, lower, upper } => {
            commands::verify_bounds(&p, &frame.frame, *lower, *upper, t)
        }
        Command::CanonicalDual(a) => commands::canonical(&p, &a.frame, t),
        Command::DualCheck(a) => commands::dual_check(&p, &a.frame, &a.dual, t),
        Command::DualSeq { pair, steps, side, closed } => {
            commands::dual_seq(&p, &pair.frame, &pair.dual, *steps, *closed, (*side).into(), t)
        }
        Command::DualDecompose(a) => commands::decompose(&p, &a.frame, &a.dual, t),
        Command::NullFamily { frame, degree } => commands::null_family(&p, &frame.frame, *degree, t),
        Command::KOp { pair, samples, seed } => {
            commands::k_op(&p, &pair.frame, &pair.dual, *samples, *seed, t)
        }
        Command::KernelSymmetry { pair, points } => {
            commands::kernel_symmetry(&p, &pair.frame, &pair.dual, *points, t)
        }
        Command::Minimality(a) => commands::minimality(&p, &a.frame, &a.dual, t),
        Command::SumFrame { pair, x1, x2 } => commands::sum_frame(&p, &pair.frame, &pair.dual, x1, x2, t),
        Command::SumDual { pair, other, x1, x2, alpha, beta, a1, a2 } => {
            let weights = match (x1, x2, alpha, beta, a1, a2) {
                (Some(x1), Some(x2), None, None, None, None) => Weights::Operators(x1, x2),
                (None, None, Some(a), Some(b), None, None) => Weights::Scalars(a, b),
                (None, None, None, None, Some(a1), Some(a2)) => Weights::Central(a1, a2),
                _ => {
                    return Err(CliError::Usage(
                        "give exactly one of --x1/--x2, --alpha/--beta or --a1/--a2".into(),
                    ))
                }
            };
            commands::sum_dual(&p, &pair.frame, &pair.dual, other, weights, t)
        }
        Command::Scaled { frame, element } => commands::scaled(&p, &frame.frame, element, t),
        Command::RieszDiagnostic(a) => commands::riesz(&p, &a.frame, t),
        Command::Example25 => commands::example25(&p, t),
    }
}

fn envelope(command: &str, status: &str, body: Value) -> Value {
    let mut out = json!({ "command": command, "status": status });
    if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
        o.extend(b);
    }
    out
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(&cli) {
        Ok(Outcome { pass, report }) => {
            print(&envelope(name, if pass { "pass" } else { "fail" }, report));
            ExitCode::from(if pass { 0 } else { 1 })
        }
        Err(e) if e.is_certified_failure() => {
            eprintln!("frames {name}: {e}");
            print(&envelope(
                name,
                "fail",
                json!({ "failure": { "kind": e.kind(), "message": e.to_string(), "residual": e.residual() } }),
            ));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("frames {name}: {} error: {e}", e.kind());
            ExitCode::from(2)
        }
    }
}
