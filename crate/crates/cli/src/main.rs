use std::io::{self, IsTerminal};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use platec::{color_enabled, corpus_check, default_corpus_dir, run, validate_file, CliConfig, StopAfter, EXIT_USAGE};
use platec_core::emit::Format;

/// Compile plate-notation Bayesian networks into entity-relationship models.
#[derive(Debug, Parser)]
#[command(name = "platec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Translate a model (`.bpn`, `.apm.json` or `.erm.json`) and write artifacts.
    Translate {
        input: PathBuf,
        /// Equivalence hints for duplicate relationships.
        #[arg(long)]
        hints: Option<PathBuf>,
        /// Last stage to run: apm, nested-erm, raw-erm or reduced.
        #[arg(long, default_value = "reduced")]
        stop_after: StopAfter,
        /// Comma-separated output formats: json, dot, mermaid, ddl.
        #[arg(long, value_delimiter = ',', default_value = "json")]
        emit: Vec<Format>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Merge every group of duplicate relationships without asking.
        #[arg(long)]
        assume_equivalent: bool,
        /// Fail on any reduction warning.
        #[arg(long)]
        strict: bool,
    },
    /// Parse and validate a model, printing diagnostics.
    Validate { input: PathBuf },
    /// Re-translate every corpus fixture and compare with the goldens.
    CorpusCheck {
        /// Corpus directory (default: crates/core/corpus).
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Rewrite the goldens instead of comparing.
        #[arg(long)]
        bless: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let color = color_enabled(io::stderr().is_terminal());
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let code = match cli.command {
        Command::Translate {
            input,
            hints,
            stop_after,
            emit,
            out_dir,
            assume_equivalent,
            strict,
        } => {
            let config = CliConfig {
                input,
                hints,
                stop_after,
                emit,
                out_dir,
                assume_equivalent,
                strict,
                color,
            };
            run(&config, &mut out, &mut err)
        }
        Command::Validate { input } => validate_file(&input, color, &mut out, &mut err),
        Command::CorpusCheck { corpus, bless } => {
            let dir = corpus.unwrap_or_else(default_corpus_dir);
            corpus_check(&dir, bless, &mut out, &mut err)
        }
    };
    ExitCode::from(code as u8)
}
