use std::path::PathBuf;
use std::process::ExitCode;

use annotis::dataset::DatasetFormat;
use annotis::model::TaskKind;
use annotis_cli::report::{self, EvaluateArgs};
use annotis_cli::{execute, Mode, Overrides, EXIT_FATAL, EXIT_OK, EXIT_PARTIAL};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "annotis", version, about = "Annotate or generate training data with a text-completion model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (JSON). Relative paths inside resolve against its directory.
    config: PathBuf,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// pgda, pgdg, dadg or pgi; must suit the command.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Label the input items (prompt-guided annotation).
    Annotate(RunArgs),
    /// Generate labeled data from the model alone.
    Generate(RunArgs),
    /// Generate labeled data seeded from a knowledge-base dictionary.
    DictGenerate(RunArgs),
    /// Label test items directly and score them when gold labels are given.
    Infer(RunArgs),
    /// Train the proxy model and score it on a test file.
    Evaluate {
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        task: Option<TaskKind>,
        /// jsonl_classification, jsonl_relation, conll_bio or aste_indexed.
        #[arg(long, value_parser = parse_format)]
        format: Option<DatasetFormat>,
        /// Train on this run's data and store eval.json there.
        #[arg(long)]
        run_dir: Option<PathBuf>,
    },
    /// Print one comparison table over several run directories.
    Report {
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<DatasetFormat, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown format {s:?}"))
}

fn run(mode: Mode, a: RunArgs) -> anyhow::Result<u8> {
    let ov = Overrides { parallelism: a.parallelism, seed: a.seed, mode: a.mode, output_dir: a.output_dir };
    let out = execute(mode, &a.config, &ov)?;
    println!(
        "{}: {} emitted, {} dropped ({:.1}%)",
        out.run_dir.display(),
        out.emitted,
        out.dropped,
        out.drop_rate * 100.0
    );
    if out.partial {
        eprintln!("warning: drop rate above threshold");
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Annotate(a) => run(Mode::Pgda, a),
        Command::Generate(a) => run(Mode::Pgdg, a),
        Command::DictGenerate(a) => run(Mode::Dadg, a),
        Command::Infer(a) => run(Mode::Pgi, a),
        Command::Evaluate { test, train, task, format, run_dir } => {
            let r = report::evaluate(&EvaluateArgs { train, test, task, format, run_dir })?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(EXIT_OK)
        }
        Command::Report { run_dirs } => {
            print!("{}", report::report(&run_dirs)?);
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FATAL)
        }
    }
}
