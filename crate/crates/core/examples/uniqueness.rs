//! Ladders started from a tiny and a huge initial guess land on the same
//! solution.
use std::sync::Arc;

use hardylab::constants::HardyParams;
use hardylab::data::DataSpec;
use hardylab::elliptic::{default_schedule, solve_ladder, EllipticProblem};
use hardylab::mesh::{build_mesh, GridFunction};
use hardylab::newton::NewtonOptions;
use hardylab::operators::assemble;

fn main() -> hardylab::Result<()> {
    let ops = assemble(Arc::new(build_mesh(1.0, 256, 2.0, 2.0)?), 0.25, &[])?;
    let opts = NewtonOptions::default();
    for (gamma, frac) in [(0.5, 0.5), (2.0, 0.3)] {
        let p = HardyParams::with_lambda_fraction(1, 0.25, frac, gamma)?;
        let prob = EllipticProblem::new(p, DataSpec::Const(1.0), DataSpec::Const(1.0));
        let low = GridFunction::constant(ops.mesh.clone(), 1e-3);
        let high = GridFunction::constant(ops.mesh.clone(), 1e3);
        let a = solve_ladder(&ops, &prob, &default_schedule(), 1e-10, Some(&low), &opts)?;
        let b = solve_ladder(&ops, &prob, &default_schedule(), 1e-10, Some(&high), &opts)?;
        println!(
            "gamma = {gamma}, lambda/Lambda = {frac}: sup distance {:.3e}",
            a.last().solution.linf_distance(&b.last().solution)
        );
    }
    Ok(())
}
