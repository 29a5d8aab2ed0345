use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use voterlab::harness::{run_experiment, ExperimentKind, RawConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Figure1,
    Plateau,
    Longtime,
    Meeting,
    Chase,
    Predict,
    Consensus,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Figure1 => ExperimentKind::Figure1,
            Kind::Plateau => ExperimentKind::Plateau,
            Kind::Longtime => ExperimentKind::Longtime,
            Kind::Meeting => ExperimentKind::Meeting,
            Kind::Chase => ExperimentKind::Chase,
            Kind::Predict => ExperimentKind::Predict,
            Kind::Consensus => ExperimentKind::Consensus,
        }
    }
}

/// Voter-model experiments on random directed graphs.
///
/// Exit codes: 0 success, 2 configuration error, 3 runtime failure.
#[derive(Debug, Parser)]
#[command(name = "voterlab", version)]
struct Cli {
    /// Experiment to run.
    kind: Kind,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = ExperimentKind::from(cli.kind);
    let cfg = RawConfig::from_file(&cli.config).and_then(|mut raw| {
        for o in &cli.overrides {
            raw.set(o)?;
        }
        raw.resolve(kind)
    });
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("voterlab: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run_experiment(&cfg, &cli.out) {
        Ok(report) => {
            println!("{kind}: wrote {} files to {}", report.files.len(), cli.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("voterlab: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}
