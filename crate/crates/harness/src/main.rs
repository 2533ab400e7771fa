use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use csplab::{generate, run, ExperimentConfig, ExperimentKind, HarnessError};

#[derive(Parser)]
#[command(
    name = "csplab",
    version,
    about = "QAOA and greedy experiments on bounded-degree CSPs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one instance of the configured family as JSON.
    Gen(Common),
    /// Compare closed-form and state-vector expectations.
    Validate(Common),
    /// Resample 2XOR signs on a fixed graph.
    #[command(name = "ensemble-2xor")]
    Ensemble2xor(Common),
    /// Sweep the degree grid.
    ScanD(Common),
    /// Sweep the g grid.
    ScanG(Common),
    GreedyStudy(Common),
    VarianceStudy(Common),
    /// Sample QAOA on negated weighted-XOR energies.
    LambdaMin(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Also write rows as CSV.
    #[arg(long)]
    csv: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output = Some(out.clone());
        }
        if self.workers.is_some() {
            config.workers = self.workers;
        }
        config.csv |= self.csv;
        Ok(config)
    }
}

fn execute(cli: Cli) -> Result<bool, HarnessError> {
    let (kind, common) = match cli.command {
        Command::Gen(common) => {
            let config = common.load()?;
            let instance = generate(&config)?;
            match &config.output {
                Some(path) => instance.write_file(path)?,
                None => println!("{}", instance.to_json()?),
            }
            return Ok(true);
        }
        Command::Validate(c) => (ExperimentKind::Validate, c),
        Command::Ensemble2xor(c) => (ExperimentKind::Ensemble2xor, c),
        Command::ScanD(c) => (ExperimentKind::ScanD, c),
        Command::ScanG(c) => (ExperimentKind::ScanG, c),
        Command::GreedyStudy(c) => (ExperimentKind::GreedyStudy, c),
        Command::VarianceStudy(c) => (ExperimentKind::VarianceStudy, c),
        Command::LambdaMin(c) => (ExperimentKind::LambdaMin, c),
    };
    let config = common.load()?;
    if let Some(configured) = config.experiment.filter(|&k| k != kind) {
        eprintln!("note: config is marked {configured}, running {kind}");
    }
    let record = run(kind, &config)?;
    match &config.output {
        Some(path) => {
            for file in record.write(path, config.csv)? {
                eprintln!("wrote {}", file.display());
            }
        }
        None => println!("{}", record.summary_json()?),
    }
    for check in record.failed_checks() {
        eprintln!(
            "FAILED {}: value {} outside [{}, {}]",
            check.name,
            check.value,
            check.lower.map_or("-inf".into(), |v| v.to_string()),
            check.upper.map_or("inf".into(), |v| v.to_string())
        );
    }
    Ok(record.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
