use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use saa_cli::{apply_override, run, CliError, ExperimentConfig, ExperimentKind, Scale};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "saa", version, about = "Sample average approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its reports.
    Run {
        /// example1, example2, optimality5, lognormal61, dimension8, bounds3 or solve-once.
        kind: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// desk or paper.
        #[arg(long)]
        scale: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
        /// Dotted-path override, e.g. `problem.n=16`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

struct RunArgs {
    kind: Option<String>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    scale: Option<String>,
    threads: Option<usize>,
    overrides: Vec<String>,
}

fn resolve(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let mut doc = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => json!({}),
    };
    if !doc.is_object() {
        return Err(CliError::Config("config must be a JSON object".into()));
    }
    if let Some(kind) = &args.kind {
        ExperimentKind::parse(kind)?;
        doc["kind"] = Value::String(kind.clone());
    }
    if doc.get("kind").is_none() {
        return Err(CliError::Config("experiment kind missing: pass it or set `kind` in the config".into()));
    }
    if let Some(seed) = args.seed {
        doc["seed"] = json!(seed);
    }
    if let Some(scale) = &args.scale {
        Scale::parse(scale)?;
        doc["scale"] = json!(scale);
    }
    if let Some(out) = &args.out {
        doc["out_dir"] = json!(out);
    }
    for o in &args.overrides {
        apply_override(&mut doc, o)?;
    }
    let config = ExperimentConfig::from_value(doc)?.resolve()?;
    let out_dir = config.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    Ok((config, out_dir))
}

fn execute(args: RunArgs) -> Result<saa_cli::RunOutcome, CliError> {
    let (config, out_dir) = resolve(&args)?;
    match args.threads {
        Some(0) => Err(CliError::Config("--threads must be positive".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?
            .install(|| run(&config, &out_dir)),
        None => run(&config, &out_dir),
    }
}

fn main() -> ExitCode {
    let Command::Run {
        kind,
        config,
        out,
        seed,
        scale,
        threads,
        overrides,
    } = Cli::parse().command;
    let args = RunArgs {
        kind,
        config,
        out,
        seed,
        scale,
        threads,
        overrides,
    };
    match execute(args) {
        Ok(outcome) => {
            println!("{}", json!({ "status": "ok", "out_dir": outcome.out_dir, "files": outcome.files }));
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
