use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use evalq_cli::config::{ExperimentConfig, ExperimentKind};
use evalq_cli::{output, run, CliError};

#[derive(Parser)]
#[command(name = "evalq", version, about = "Run evaluation-query experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the CSV and JSON outputs.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    Variance(RunArgs),
    Levy(RunArgs),
    Learn(RunArgs),
    Bounds(RunArgs),
    BpProbe(RunArgs),
    Moments(RunArgs),
    /// Check a configuration without running it.
    Validate(RunArgs),
    /// Print the experiment catalog.
    List,
}

/// Prints a line, ignoring a closed stdout.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| {
                CliError::Validation(vec![evalq_cli::config::Diagnostic {
                    path: "<config>".into(),
                    message: e.to_string(),
                }])
            })?
        }
        None => ExperimentConfig::default(),
    };
    Ok(cfg.with_overrides(args.seed, args.out.clone()))
}

fn execute(kind: ExperimentKind, args: &RunArgs) -> Result<(), CliError> {
    let mut cfg = load(args)?;
    match cfg.experiment {
        Some(k) if k != kind => {
            return Err(CliError::Validation(vec![evalq_cli::config::Diagnostic {
                path: "experiment".into(),
                message: format!(
                    "config names {} but the subcommand is {}",
                    k.name(),
                    kind.name()
                ),
            }]))
        }
        _ => cfg.experiment = Some(kind),
    }
    let report = match args.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(|| run::run(&cfg))?,
        None => run::run(&cfg)?,
    };
    let dir = PathBuf::from(cfg.out.as_deref().unwrap_or("."));
    let (csv, json) = output::write_report(&report, &dir)?;
    say(&output::summary(&report));
    say(&format!("wrote {} and {}", csv.display(), json.display()));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (kind, args) = match cli.command {
        Command::List => {
            for k in ExperimentKind::ALL {
                say(&format!(
                    "{:<10} {}\n{:<10} parameters: {}",
                    k.name(),
                    k.summary(),
                    "",
                    k.parameters()
                ));
            }
            return Ok(());
        }
        Command::Validate(args) => {
            let d = load(&args)?.validate();
            if !d.is_empty() {
                return Err(CliError::Validation(d));
            }
            say("ok");
            return Ok(());
        }
        Command::Variance(a) => (ExperimentKind::Variance, a),
        Command::Levy(a) => (ExperimentKind::Levy, a),
        Command::Learn(a) => (ExperimentKind::Learn, a),
        Command::Bounds(a) => (ExperimentKind::Bounds, a),
        Command::BpProbe(a) => (ExperimentKind::BpProbe, a),
        Command::Moments(a) => (ExperimentKind::Moments, a),
    };
    execute(kind, &args)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
