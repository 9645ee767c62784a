//! Monotone approximation ladder for -(Δ)^s u - λu/|x|^{2s} = μ/u^γ + f and
//! its untruncated limit.
use std::sync::Arc;

use hardylab::constants::HardyParams;
use hardylab::data::DataSpec;
use hardylab::elliptic::{solve_ladder, solve_limit, EllipticProblem};
use hardylab::mesh::build_mesh;
use hardylab::newton::NewtonOptions;
use hardylab::operators::assemble;

fn main() -> hardylab::Result<()> {
    let ops = assemble(Arc::new(build_mesh(1.0, 256, 2.0, 2.0)?), 0.25, &[])?;
    let p = HardyParams::with_lambda_fraction(1, 0.25, 0.5, 1.0)?;
    let prob = EllipticProblem::new(p, DataSpec::Const(1.0), DataSpec::Const(1.0));
    let opts = NewtonOptions::default();
    let schedule: Vec<u64> = (1..=40).map(|k| 1u64 << k).collect();
    let ladder = solve_ladder(&ops, &prob, &schedule, 1e-8, None, &opts)?;
    for (r, inc) in ladder.reports.iter().skip(1).zip(&ladder.increments) {
        println!(
            "n = {:<8} L1 increment {inc:.3e}  min on K {:.8}",
            r.level, r.min_interior
        );
    }
    println!(
        "converged {}  monotone {}",
        ladder.converged,
        ladder.monotone()
    );
    let limit = solve_limit(&ops, &prob, &ladder.last().solution, &opts)?;
    println!(
        "limit: min on K {:.8}, distance to last level {:.2e}",
        limit.min_interior,
        limit.solution.linf_distance(&ladder.last().solution)
    );
    Ok(())
}
