//! Drives a scenario from a config text and prints the manifest verdicts.
use hardylab::config::parse_config;
use hardylab::runner::{run, RunContext};

const CONFIG: &str = "
scenario = elliptic
output_dir = target/example-runs/elliptic

[params]
s = 0.25
lambda = 0.5*Lambda
gamma = 1

[data]
mu = const:1
f = const:1

[sweep]
fractions = 0.2, 0.4, 0.6
";

fn main() -> hardylab::Result<()> {
    let config = parse_config(CONFIG)?;
    let manifest = run(&config, &RunContext::default())?;
    for stage in &manifest.stages {
        println!(
            "{:<36} asserted={:<5} passed={}",
            stage.name, stage.asserted, stage.passed
        );
    }
    for f in &manifest.files {
        println!("{}  {}", f.sha256, f.path);
    }
    println!("success: {}", manifest.success);
    Ok(())
}
