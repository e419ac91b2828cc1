//! Command-line front end: file formats, subcommands and deterministic reports.
//!
//! [`run`] parses arguments, executes one subcommand and writes a report. The
//! exit code is 0 for success, 2 for a flagged verdict (inconsistent,
//! infeasible, implausible), 1 for structural errors and 64 for usage errors.

pub mod commands;
pub mod files;
pub mod report;

use std::io::{Read, Write};

use beliefscape::Tolerances;
use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{Context, Stop};
use crate::files::Digests;
use crate::report::{Report, EXIT_OK, EXIT_STRUCTURAL, EXIT_USAGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Pretty,
}

#[derive(Debug, Parser)]
#[command(
    name = "beliefscape",
    version,
    about = "Identify information structures and priors from belief landscapes"
)]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_stochastic: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_entry: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_rank: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_match: f64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Seed for `selftest`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Skip plausibility checks on inputs.
    #[arg(long, global = true)]
    no_validate: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate (B, Q) from an environment file.
    Generate {
        environment: String,
        /// Also write the landscape: `.json` path, CSV directory, or `-` for standard output.
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Regress Q on B, recover the prior and check consistency.
    Identify {
        landscape: String,
        /// Regress only this signal's Q column.
        #[arg(long)]
        column: Option<String>,
    },
    /// Identify through the signal marginal (left eigenvector of Q).
    Sp { landscape: String },
    /// Ridge limit, null space and feasible structures when B has more states than signals.
    Ridge {
        landscape: String,
        #[arg(long)]
        lambda: Option<f64>,
        /// Regularizer matrix as JSON rows.
        #[arg(long)]
        reg: Option<String>,
    },
    /// Consistency verdict only.
    Check { landscape: String },
    /// Per-type priors that rationalize the landscape.
    Rationalize { landscape: String },
    /// Remove dependent states, identify, and embed back.
    Reduce { landscape: String },
    /// Detect a deterministic (partitional) structure.
    Partition { landscape: String },
    /// Infer the realized state from one signal's observed share.
    InferState {
        input: String,
        #[arg(long)]
        signal: String,
        #[arg(long)]
        share: f64,
    },
    /// Run fixture checks and seeded randomized round trips.
    Selftest {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::Identify { .. } => "identify",
            Command::Sp { .. } => "sp",
            Command::Ridge { .. } => "ridge",
            Command::Check { .. } => "check",
            Command::Rationalize { .. } => "rationalize",
            Command::Reduce { .. } => "reduce",
            Command::Partition { .. } => "partition",
            Command::InferState { .. } => "infer-state",
            Command::Selftest { .. } => "selftest",
        }
    }
}

/// Runs one invocation. `args` excludes the program name; `color` enables ANSI colour in pretty output.
pub fn run<I, S>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(std::iter::once("beliefscape".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{}", e.render());
                EXIT_OK
            };
            return code;
        }
    };
    let tol = Tolerances {
        stochastic: cli.tol_stochastic,
        entry: cli.tol_entry,
        rank: cli.tol_rank,
        matching: cli.tol_match,
    };
    if let Err(e) = tol.validate() {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_USAGE;
    }

    let mut ctx = Context {
        tol,
        validate: !cli.no_validate,
        stdin,
        digests: Digests::default(),
        warnings: Vec::new(),
    };
    let outcome = match &cli.command {
        Command::Generate { environment, output } => commands::generate(&mut ctx, environment, output.as_deref()),
        Command::Identify {
            landscape,
            column: Some(signal),
        } => commands::identify_column(&mut ctx, landscape, signal),
        Command::Identify {
            landscape,
            column: None,
        } => commands::identify_landscape(&mut ctx, landscape),
        Command::Sp { landscape } => commands::signal_priors(&mut ctx, landscape),
        Command::Ridge { landscape, lambda, reg } => commands::ridge(&mut ctx, landscape, *lambda, reg.as_deref()),
        Command::Check { landscape } => commands::check(&mut ctx, landscape),
        Command::Rationalize { landscape } => commands::rationalize(&mut ctx, landscape),
        Command::Reduce { landscape } => commands::reduce(&mut ctx, landscape),
        Command::Partition { landscape } => commands::partition(&mut ctx, landscape),
        Command::InferState { input, signal, share } => commands::infer(&mut ctx, input, signal, *share),
        Command::Selftest { trials } => commands::selftest(&mut ctx, cli.seed, *trials),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(Stop::Verdict(o)) => o,
        Err(Stop::Structural(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_STRUCTURAL;
        }
        Err(Stop::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };

    let code = outcome.verdict.exit_code();
    if let Some(text) = outcome.stdout {
        let _ = stdout.write_all(text.as_bytes());
        return code;
    }
    let report = Report {
        command: cli.command.name().to_string(),
        arguments: args,
        inputs: ctx.digests.0,
        tolerances: (&tol).into(),
        verdict: outcome.verdict.label.to_string(),
        exit_code: code,
        result: outcome.result,
        warnings: ctx.warnings,
    };
    let text = match cli.format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Pretty => report.to_pretty(color),
    };
    let _ = stdout.write_all(text.as_bytes());
    code
}
