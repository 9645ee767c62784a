//! Implicit Euler run inside the cone bracket and its discrete energy balance.
use std::sync::Arc;

use hardylab::constants::HardyParams;
use hardylab::data::DataSpec;
use hardylab::mesh::build_mesh;
use hardylab::newton::NewtonOptions;
use hardylab::operators::assemble;
use hardylab::parabolic::{
    energy_identity_residual, implicit_euler_run, ConeBracket, RunOptions, Source,
};

fn main() -> hardylab::Result<()> {
    let ops = assemble(Arc::new(build_mesh(1.0, 128, 2.0, 2.0)?), 0.25, &[])?;
    let p = HardyParams::with_lambda_fraction(1, 0.25, 0.3, 0.5)?;
    let source = Source::Steady(DataSpec::Const(1.0));
    let cone = ConeBracket::build(
        &ops,
        &p,
        &source.average(&ops, 0.0, 1.0),
        &NewtonOptions::default(),
    )?;
    println!("cone: m = {}, M = {:.4}", cone.m, cone.big_m);
    for steps in [50, 100, 200] {
        let run = implicit_euler_run(
            &ops,
            &p,
            &source,
            &cone.lower(),
            1.0 / steps as f64,
            1.0,
            Some(&cone),
            &RunOptions::default(),
        )?;
        let worst = energy_identity_residual(&run)
            .into_iter()
            .fold(0.0, f64::max);
        let e = run
            .energy_trace
            .last()
            .map(|r| r.energy())
            .unwrap_or(f64::NAN);
        println!("{steps:>4} steps  energy at T {e:.6}  worst identity residual {worst:.3e}");
    }
    Ok(())
}
