//! Integration by parts for the collar Dirac operator on the flat unit ball.
//!
//!     cargo run --example greens_identity

use hktriples::collar::greens_identity_check;

fn main() -> hktriples::Result<()> {
    let rep = greens_identity_check(20, 7)?;
    for (i, r) in rep.residuals.iter().enumerate().take(5) {
        println!("pair {i}: (Du,v) - (u,D*v) = {:.6e}, boundary = {:.6e}, rel {:.1e}", r.lhs, r.boundary, r.residual);
    }
    println!("max over {} pairs: {:.2e}", rep.pairs, rep.max_residual);
    Ok(())
}
