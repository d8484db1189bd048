mod config;
mod describe;
mod experiments;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use config::ExperimentConfig;
use experiments::Status;

#[derive(Parser)]
#[command(
    name = "rwre",
    version,
    about = "Random walk in random environment experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory; overrides `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the config keys and checks of an experiment.
    Describe { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            threads,
        } => run(&config, out, threads),
        Command::Describe { name } => describe::describe(&name).map(|text| {
            print!("{text}");
            Status::Complete
        }),
    };
    match result {
        Ok(Status::Fail) => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(path: &Path, out: Option<PathBuf>, threads: Option<usize>) -> Result<Status> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).context("config is not UTF-8")?;
    let mut cfg =
        ExperimentConfig::parse(text).with_context(|| format!("in {}", path.display()))?;
    let config_seed = cfg.seed;
    let overridden = match std::env::var("RWRE_SEED") {
        Ok(v) => {
            cfg.seed = v
                .trim()
                .parse()
                .with_context(|| format!("RWRE_SEED `{v}` is not an unsigned integer"))?;
            true
        }
        Err(_) => false,
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("setting up the thread pool")?;
    }

    let dir = match (out, &cfg.output.dir) {
        (Some(dir), _) => dir,
        (None, Some(dir)) => path.parent().unwrap_or(Path::new(".")).join(dir),
        (None, None) => PathBuf::from("rwre-out").join(&cfg.experiment),
    };
    let outcome = experiments::run(&cfg)?;

    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, contents) in &outcome.files {
        std::fs::write(dir.join(name), contents).with_context(|| format!("writing {name}"))?;
    }
    let report = json!({
        "experiment": cfg.experiment,
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": hex::encode(Sha256::digest(&bytes)),
        "seed": cfg.seed,
        "config_seed": config_seed,
        "seed_from_env": overridden,
        "status": outcome.status.label(),
        "summary": outcome.summary,
        "files": outcome.files.iter().map(|(name, _)| name).collect::<Vec<_>>(),
        "config": cfg,
        "result": outcome.result,
    });
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )
    .context("writing report.json")?;
    println!(
        "{} {}: {} [{}]",
        cfg.experiment,
        outcome.status.label(),
        outcome.summary,
        dir.display()
    );
    Ok(outcome.status)
}
