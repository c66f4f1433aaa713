use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod files;
mod report;

use report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Distance monoids, their completions and the metric spaces over them.
#[derive(Debug, Parser)]
#[command(name = "distmon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Monoid definition file.
    #[arg(long, global = true, conflicts_with = "builtin")]
    monoid: Option<PathBuf>,

    /// Named monoid, e.g. R2, Q1, noQE.
    #[arg(long, global = true)]
    builtin: Option<String>,

    /// Space definition file; `amalgamate` takes two.
    #[arg(long, global = true)]
    space: Vec<PathBuf>,

    /// Number of points (grow) or largest base size (gen-axioms).
    #[arg(long, global = true)]
    size: Option<usize>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Largest base of an extension scheme.
    #[arg(long, global = true)]
    max_base: Option<usize>,

    /// Grid step 1/D for dense carriers.
    #[arg(long, global = true)]
    denominator: Option<u64>,

    /// Largest distance used on unbounded carriers.
    #[arg(long, global = true)]
    cap: Option<String>,

    /// grow: keep adding points until no obligation is pending, up to this many.
    #[arg(long, global = true)]
    close: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Axioms, associativity, sum-completeness and classification.
    CheckMonoid,
    /// Completed sum of two extended values.
    StarAdd { a: String, b: String },
    /// Generalized difference of two extended values.
    StarDiff { a: String, b: String },
    /// Whether three extended values form a triangle.
    Triangle { a: String, b: String, c: String },
    /// Four-values property: one quadruple `U1 U2 V1 V2 S`, or a search.
    FourValues { values: Vec<String> },
    /// Amalgam of two spaces over their shared points.
    Amalgamate,
    /// Metric inside intervals given as `VALUE:LO:HI` (the range is `(LO, HI]`).
    ApproxCheck { intervals: Vec<String> },
    /// Grows a finite piece of the generic space.
    Grow,
    /// Checks the canonical extension sentences on a space.
    CheckExtension,
    /// Decides quantifier elimination for the generic space.
    CheckQe,
    /// Metric-space axioms and extension sentences over the finite fragment.
    GenAxioms,
    /// Evaluates a sentence on a space.
    EvalFormula { formula: String },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = cli.format;
    match commands::run(&cli) {
        Ok(report) => {
            emit(&report, format);
            ExitCode::from(if report.holds { 0 } else { 1 })
        }
        Err(msg) => {
            match format {
                Format::Text => eprintln!("error: {msg}"),
                Format::Json => println!("{}", serde_json::json!({ "status": "error", "message": msg })),
            }
            ExitCode::from(2)
        }
    }
}

fn emit(report: &Report, format: Format) {
    match format {
        Format::Text => {
            for line in &report.lines {
                println!("{line}");
            }
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&report.to_json()).expect("report serializes")),
    }
}
