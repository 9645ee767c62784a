//! Writes the assembled operators in `i j value` form for external checks.
use std::sync::Arc;

use hardylab::mesh::build_mesh;
use hardylab::operators::assemble;

fn main() -> hardylab::Result<()> {
    let ops = assemble(Arc::new(build_mesh(1.0, 32, 2.0, 2.0)?), 0.25, &[])?;
    for path in ops.export_coordinate(std::path::Path::new("target/example-runs/matrices"))? {
        println!("{}", path.display());
    }
    Ok(())
}
