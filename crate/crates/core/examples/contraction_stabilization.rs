//! Ordered runs from the cone bounds contract towards each other and towards
//! the stationary solution in the weighted sup norm.
use std::sync::Arc;

use hardylab::constants::{beta_of_lambda, HardyParams};
use hardylab::mesh::build_mesh;
use hardylab::newton::NewtonOptions;
use hardylab::operators::assemble;
use hardylab::parabolic::{
    contraction_check, implicit_euler_run, stabilization_check, ConeBracket, RunOptions, Source,
};

fn main() -> hardylab::Result<()> {
    let ops = assemble(Arc::new(build_mesh(1.0, 128, 2.0, 2.0)?), 0.25, &[])?;
    let p = HardyParams::with_lambda_fraction(1, 0.25, 0.2, 0.5)?;
    let zero = vec![0.0; ops.interior_count()];
    let cone = ConeBracket::build(&ops, &p, &zero, &NewtonOptions::default())?;
    let (eta, horizon) = (5.0 / 200.0, 5.0);
    let opts = RunOptions::default();
    let c = contraction_check(
        &ops,
        &p,
        &Source::zero(),
        &cone.lower(),
        &cone.upper(),
        eta,
        horizon,
        &opts,
    )?;
    println!(
        "distance {:.4e} -> {:.4e}, nonincreasing {}, ordered {}",
        c.distance[0],
        c.distance.last().unwrap(),
        c.nonincreasing,
        c.ordered
    );
    // With f = 0 the stationary solution is the pure-problem profile w itself.
    let run = implicit_euler_run(
        &ops,
        &p,
        &Source::zero(),
        &cone.lower(),
        eta,
        horizon,
        Some(&cone),
        &opts,
    )?;
    let st = stabilization_check(&run, &cone.w, beta_of_lambda(&p)?, 1e-2);
    println!(
        "weighted sup distance {:.4e} -> {:.4e}, stabilized {}",
        st.distance[0],
        st.distance.last().unwrap(),
        st.stabilized
    );
    Ok(())
}
