//! Discrete Hardy quotient approaching the sharp constant from above.
use std::sync::Arc;

use hardylab::constants::{hardy_constant, HardyParams};
use hardylab::mesh::build_mesh;
use hardylab::operators::{assemble, rayleigh_hardy_min};

fn main() -> hardylab::Result<()> {
    let s = 0.25;
    let hardy = hardy_constant(&HardyParams::new(1, s, 0.0, 1.0)?)?;
    println!("Lambda = {hardy:.12}");
    for cells in [64, 128, 256, 512] {
        let ops = assemble(Arc::new(build_mesh(1.0, cells, 2.0, 2.0)?), s, &[])?;
        let q = rayleigh_hardy_min(&ops)?;
        println!(
            "{cells:>5} cells  min quotient {q:.8}  ratio {:.5}",
            q / hardy
        );
    }
    Ok(())
}
