//! `normspec` command-line front end.
//!
//! Exit status: 0 on success, 1 on semantic failures (resolution errors,
//! failed checks, underived trace targets), 2 on parse, IO and usage errors.

mod commands;
mod load;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use normspec::diag::Diagnostic;

#[derive(Debug, Parser)]
#[command(name = "normspec", about = "Executable behavior specifications for automated driving")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resolve and validate specs, then check every scenario.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Print derived assertions and applicable maneuvers per scenario.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Leave entity nodes out of graph output.
        #[arg(long)]
        no_entities: bool,
    },
    /// Print derivation trees and the knowledge sources behind a maneuver.
    /// The last argument is the maneuver id.
    Trace {
        #[arg(long, default_value_t = 1)]
        max_trees: usize,
        #[arg(long)]
        strict_traceability: bool,
        #[arg(long)]
        no_subclass_match: bool,
        /// Spec and scenario files, then the maneuver id.
        #[arg(required = true, num_args = 2.., value_name = "INPUT")]
        args: Vec<String>,
    },
    /// Write the graph, sequence or result-document artifact.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_entities: bool,
    },
    /// Print a file in canonical form.
    Fmt {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the version.
    Version,
}

#[derive(Debug, Args)]
struct Common {
    /// Report facts without knowledge sources as errors.
    #[arg(long)]
    strict_traceability: bool,
    /// Match class atoms by exact class only.
    #[arg(long)]
    no_subclass_match: bool,
    /// Specification (`.nspec`) and scenario (`.nscen`) files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Doc,
    Dot,
    Seq,
}

pub enum Failure {
    Usage(String),
    Parse(Vec<Diagnostic>),
    Semantic(Vec<Diagnostic>),
    Message(String),
    /// Output was produced but a check failed.
    Failed,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }
}

pub struct Options {
    pub strict: bool,
    pub subclass_matching: bool,
    pub no_entities: bool,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Check { common } => {
            commands::check(&common.files, &options(&common, false))
        }
        Command::Infer {
            common,
            format,
            out,
            no_entities,
        } => commands::infer(
            &common.files,
            &options(&common, no_entities),
            format,
            out.as_deref(),
        ),
        Command::Trace {
            max_trees,
            strict_traceability,
            no_subclass_match,
            mut args,
        } => {
            let maneuver = args.pop().expect("clap requires two arguments");
            let files: Vec<PathBuf> = args.into_iter().map(PathBuf::from).collect();
            let opts = Options {
                strict: strict_traceability,
                subclass_matching: !no_subclass_match,
                no_entities: false,
            };
            commands::trace(&files, &opts, &maneuver, max_trees)
        }
        Command::Export {
            common,
            format,
            out,
            no_entities,
        } => commands::export(
            &common.files,
            &options(&common, no_entities),
            format,
            out.as_deref(),
        ),
        Command::Fmt { file, out } => commands::fmt(&file, out.as_deref()),
        Command::Version => {
            println!("normspec {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn options(common: &Common, no_entities: bool) -> Options {
    Options {
        strict: common.strict_traceability,
        subclass_matching: !common.no_subclass_match,
        no_entities,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Parse(diags)) => {
            for d in diags {
                eprintln!("{d}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Semantic(diags)) => {
            for d in diags {
                eprintln!("{d}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Message(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Failed) => ExitCode::from(1),
    }
}
