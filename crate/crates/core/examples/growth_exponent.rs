//! Fitted origin growth exponent of the untruncated solution against β(λ).
use std::sync::Arc;

use hardylab::constants::{beta_of_lambda, HardyParams};
use hardylab::data::DataSpec;
use hardylab::diagnostics::fit_origin_exponent;
use hardylab::elliptic::{default_init, solve_regularized, EllipticProblem, Level};
use hardylab::mesh::build_mesh;
use hardylab::newton::NewtonOptions;
use hardylab::operators::assemble;

fn main() -> hardylab::Result<()> {
    let ops = assemble(Arc::new(build_mesh(1.0, 512, 2.0, 3.0)?), 0.25, &[])?;
    for frac in [0.2, 0.4, 0.6, 0.8] {
        let p = HardyParams::with_lambda_fraction(1, 0.25, frac, 1.0)?;
        let prob =
            EllipticProblem::new(p, DataSpec::Const(0.0), DataSpec::Const(1.0)).at(Level::Limit);
        let u = solve_regularized(&ops, &prob, &default_init(&ops), &NewtonOptions::default())?
            .solution;
        let fit = fit_origin_exponent(&u, None)?;
        println!(
            "lambda/Lambda = {frac}  beta = {:.4}  fit = {:.4} ± {:.1e}",
            beta_of_lambda(&p)?,
            fit.exponent,
            fit.stderr
        );
    }
    Ok(())
}
