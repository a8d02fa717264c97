use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tme_core::metrics::{render_table, TableFormat};
use tme_core::session::{run_session, Mode, SessionScript};
use tme_core::tree::{render_outline, OutlineStyle, TaskTree};
use tme_core::Error;

const USAGE_ERROR: u8 = 1;
const INPUT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "tme", version, about = "Run and inspect task memory sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scripted session.
    Run {
        script: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        #[arg(long, default_value = "reference")]
        tokenizer: String,
        #[arg(long, default_value = "scripted")]
        client: String,
        /// Directory for transcripts, tree document and report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the per-round token comparison for a script.
    Compare {
        script: PathBuf,
        #[arg(long, default_value = "reference")]
        tokenizer: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Render a tree document as an indented outline.
    Tree {
        file: PathBuf,
        /// Use `|------` rails instead of box drawing.
        #[arg(long)]
        ascii: bool,
    },
    /// Re-emit a tree document in canonical form.
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Tet,
    Baseline,
    Both,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Tet => Mode::Tet,
            ModeArg::Baseline => Mode::Baseline,
            ModeArg::Both => Mode::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Json,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(USAGE_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Bad input files map to 2; unknown names and other argument problems to 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_) | Error::NotFound(_)) => USAGE_ERROR,
        _ => INPUT_ERROR,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(Error::from)
        .with_context(|| format!("reading {}", path.display()))
}

fn load_script(path: &Path) -> Result<SessionScript> {
    SessionScript::parse(&read(path)?).with_context(|| format!("in script {}", path.display()))
}

fn load_tree(path: &Path) -> Result<TaskTree> {
    TaskTree::from_json(&read(path)?).with_context(|| format!("in tree document {}", path.display()))
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run {
            script,
            mode,
            tokenizer,
            client,
            out,
        } => {
            let script = load_script(&script)?;
            let result = run_session(&script, mode.into(), &client, &tokenizer)?;
            match &result.report {
                Some(report) => print!("{}", render_table(report, TableFormat::Text)),
                None => {
                    for run in result.runs() {
                        for (i, tokens) in run.prompt_tokens.iter().enumerate() {
                            println!(
                                "round {} {}: prompt {} completion {}",
                                i + 1,
                                run.method,
                                tokens,
                                run.completion_tokens[i]
                            );
                        }
                    }
                }
            }
            if let Some(dir) = out {
                result
                    .write_to(&dir)
                    .with_context(|| format!("writing outputs to {}", dir.display()))?;
            }
        }
        Command::Compare {
            script,
            tokenizer,
            format,
        } => {
            let script = load_script(&script)?;
            let report = tme_core::metrics::compare_session(&script, &tokenizer)?;
            let format = match format {
                FormatArg::Text => TableFormat::Text,
                FormatArg::Csv => TableFormat::Csv,
            };
            print!("{}", render_table(&report, format));
        }
        Command::Tree { file, ascii } => {
            let style = if ascii { OutlineStyle::Ascii } else { OutlineStyle::Unicode };
            print!("{}", render_outline(&load_tree(&file)?, style));
        }
        Command::Export { file, format } => match format {
            ExportFormat::Json => print!("{}", load_tree(&file)?.to_json()),
        },
    }
    Ok(())
}
