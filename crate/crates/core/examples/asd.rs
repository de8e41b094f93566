//! Closed anti-self-dual 2-forms on flat B⁴ built from curl eigenforms on S³.
//!
//!     cargo run --release --example asd

use hktriples::asd::{inventory, DEFAULT_SEED};

fn main() -> hktriples::Result<()> {
    let inv = inventory(&[2, 3], 15, DEFAULT_SEED)?;
    for g in inv.generators.iter().step_by(5) {
        println!(
            "#{:<2} k={} spin {}: closed {:.1e}  asd {:.1e}  tangent {:.1e}",
            g.index, g.k, g.spin, g.closed_residual, g.asd_residual, g.tangent_residual
        );
    }
    println!(
        "{} generators, worst: closed {:.1e} asd {:.1e} tangent {:.1e}",
        inv.generators.len(), inv.max_closed, inv.max_asd, inv.max_tangent
    );
    Ok(())
}
