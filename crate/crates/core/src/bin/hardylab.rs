use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hardylab::config::{parse_config, ExperimentConfig, Scenario};
use hardylab::runner::{operators_for, run, RunContext};

#[derive(Parser)]
#[command(
    name = "hardylab",
    version,
    about = "Fractional Hardy problems with singular nonlinearity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// `key = value` experiment file; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Seeds the randomized property sampling only.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    Constants(Common),
    HardyCheck(Common),
    Elliptic(Common),
    BlowupSweep(Common),
    BoundaryRate(Common),
    Parabolic(Common),
    Stabilize(Common),
    Contraction(Common),
    /// Write the interior stiffness, Hardy and mass matrices in coordinate form.
    ExportMatrices(Common),
}

/// `scenario = None` accepts a config written for any scenario.
fn load(scenario: Option<Scenario>, common: &Common) -> hardylab::Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| hardylab::Error::io(path, e))?;
            let c = parse_config(&text)?;
            if let Some(want) = scenario.filter(|w| *w != c.scenario) {
                return Err(hardylab::Error::InvalidParameter(format!(
                    "config declares scenario {}, subcommand is {}",
                    c.scenario.name(),
                    want.name()
                )));
            }
            c
        }
        None => ExperimentConfig::with_defaults(scenario.unwrap_or(Scenario::HardyCheck)),
    };
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (scenario, common, export) = match cli.command {
        Command::Constants(c) => (Scenario::Constants, c, false),
        Command::HardyCheck(c) => (Scenario::HardyCheck, c, false),
        Command::Elliptic(c) => (Scenario::Elliptic, c, false),
        Command::BlowupSweep(c) => (Scenario::BlowupSweep, c, false),
        Command::BoundaryRate(c) => (Scenario::BoundaryRate, c, false),
        Command::Parabolic(c) => (Scenario::Parabolic, c, false),
        Command::Stabilize(c) => (Scenario::Stabilize, c, false),
        Command::Contraction(c) => (Scenario::Contraction, c, false),
        Command::ExportMatrices(c) => (Scenario::HardyCheck, c, true),
    };
    let config = match load((!export).then_some(scenario), &common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if export {
        return match operators_for(&config, config.mesh.cells)
            .and_then(|ops| ops.export_coordinate(&config.output_dir))
        {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    let ctx = RunContext {
        threads: common.threads,
        seed: common.seed,
    };
    match run(&config, &ctx) {
        Ok(m) => {
            for s in &m.stages {
                let tag = match (s.asserted, s.passed) {
                    (false, _) => "INFO",
                    (true, true) => "PASS",
                    (true, false) => "FAIL",
                };
                println!("{tag} {} {}", s.name, s.detail);
            }
            if let Some(e) = &m.error {
                eprintln!("error: {e}");
            }
            println!(
                "manifest: {}",
                config.output_dir.join("manifest.json").display()
            );
            if m.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
