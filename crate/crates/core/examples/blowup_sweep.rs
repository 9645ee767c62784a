//! Bounded versus blow-up behaviour of the truncated problems across the
//! Hardy threshold. Strong origin grading keeps the discrete Hardy quotient
//! close to the continuous constant.
use std::sync::Arc;

use hardylab::constants::HardyParams;
use hardylab::data::DataSpec;
use hardylab::elliptic::{detect_blowup, EllipticProblem};
use hardylab::mesh::build_mesh;
use hardylab::newton::NewtonOptions;
use hardylab::operators::assemble;

fn main() -> hardylab::Result<()> {
    let ops = assemble(Arc::new(build_mesh(1.0, 1024, 12.0, 2.0)?), 0.25, &[])?;
    let schedule: Vec<u64> = (1..=62).map(|k| 1u64 << k).collect();
    for frac in [0.5, 0.9, 1.1, 2.0] {
        let p = HardyParams::with_lambda_fraction(1, 0.25, frac, 1.0)?;
        let prob = EllipticProblem::new(p, DataSpec::Const(1.0), DataSpec::Const(1.0));
        let r = detect_blowup(
            &ops,
            &prob,
            &schedule,
            (-0.5, 0.5),
            1e3,
            &NewtonOptions::default(),
        );
        println!(
            "lambda/Lambda = {frac:<4} verdict {:<12} levels {:>2}  last min_K {:.4e}  indefinite at {:?}",
            r.verdict.to_string(), r.levels.len(), r.min_on_k.last().copied().unwrap_or(f64::NAN), r.indefinite_at
        );
    }
    Ok(())
}
