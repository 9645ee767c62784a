//! Hardy constants, growth exponents and the uniqueness threshold.
use hardylab::constants::{beta_of_lambda, hardy_constant, lambda_star, HardyParams};

fn main() -> hardylab::Result<()> {
    println!("{:>2} {:>5} {:>12} {:>12}", "N", "s", "Lambda", "lambda_*");
    for dim in 1..=4u32 {
        for s in [0.1, 0.25, 0.4] {
            let p = HardyParams::new(dim, s, 0.0, 1.0)?;
            println!(
                "{dim:>2} {s:>5} {:>12.8} {:>12.8}",
                hardy_constant(&p)?,
                lambda_star(&p)?
            );
        }
    }
    let base = HardyParams::new(1, 0.25, 0.0, 1.0)?;
    println!("\nN=1, s=1/4");
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let p = base.with_lambda(frac * hardy_constant(&base)?);
        let beta = beta_of_lambda(&p)?;
        println!(
            "lambda/Lambda = {frac:.2}  alpha = {:.6}  beta = {beta:.6}",
            p.alpha_max() - beta
        );
    }
    Ok(())
}
