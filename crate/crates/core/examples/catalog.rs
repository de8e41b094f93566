//! Closed-form hyperkähler triples and their constraint residuals.
//!
//!     cargo run --example catalog

use hktriples::exterior::STRUCTURE_CONSTANT;
use hktriples::profile::{catalog, Family};

fn main() -> hktriples::Result<()> {
    let families = [
        Family::FlatFixed,
        Family::FlatRotating,
        Family::EguchiHanson { c: 1.0 },
        Family::TaubNut { m: 1.0 },
    ];
    for fam in families {
        let e = catalog(fam)?;
        let (lo, hi) = e.default_grid();
        let res = e.grid_residuals(lo, hi, 200, STRUCTURE_CONSTANT)?;
        let wrong = e.grid_residuals(lo, hi, 200, 1.0)?;
        let f = e.jets(2.0 * lo)?.map(|j| j.value());
        println!(
            "{fam:?}: f({:.3}) = ({:.4}, {:.4}, {:.4})  |Q| {:.1e}  |dω| {:.1e}  (dη₁ = η₂∧η₃ would give {:.3})",
            2.0 * lo, f[0], f[1], f[2], res.max_q, res.max_d, wrong.max_d
        );
    }
    Ok(())
}
