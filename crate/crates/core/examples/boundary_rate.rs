//! Boundary decay exponent of the stationary solution for several γ.
use std::sync::Arc;

use hardylab::constants::HardyParams;
use hardylab::data::DataSpec;
use hardylab::diagnostics::{boundary_rate, fit_boundary_exponent};
use hardylab::elliptic::{stationary_solution, EllipticProblem};
use hardylab::mesh::build_mesh;
use hardylab::newton::NewtonOptions;
use hardylab::operators::assemble;

fn main() -> hardylab::Result<()> {
    let s = 0.25;
    let ops = assemble(Arc::new(build_mesh(1.0, 512, 2.0, 3.0)?), s, &[])?;
    for gamma in [0.5, 1.0, 2.0] {
        let p = HardyParams::with_lambda_fraction(1, s, 0.2, gamma)?;
        let prob = EllipticProblem::new(p, DataSpec::Const(1.0), DataSpec::Const(0.0));
        let u = stationary_solution(&ops, &prob, &NewtonOptions::default())?.solution;
        let fit = fit_boundary_exponent(&u, s, gamma == 1.0, None)?;
        println!(
            "gamma = {gamma}  rate {:.4}  fit {:.4}  (log-corrected: {})",
            boundary_rate(s, gamma),
            fit.exponent,
            gamma == 1.0
        );
    }
    Ok(())
}
