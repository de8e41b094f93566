//! Integrate the cohomogeneity-one ODEs from catalog data and compare with
//! the closed form.
//!
//!     cargo run --example integrate

use hktriples::ode::Tolerances;
use hktriples::profile::{catalog, oracle_comparison, Family};

fn main() -> hktriples::Result<()> {
    let tol = Tolerances::default();
    for fam in [Family::EguchiHanson { c: 1.0 }, Family::TaubNut { m: 0.5 }] {
        let e = catalog(fam)?;
        let r0 = e.default_grid().0;
        let (tr, rep) = oracle_comparison(&e, r0, 10.0 * r0, &tol)?;
        let last = tr.last();
        println!("{fam:?}: {} steps, r {:.3} -> {:.3}", rep.steps, r0, e.radius_of(&last.f));
        println!("  f(end) = {:?}", last.f);
        println!("  shape error {:.2e}, time error {:.2e}", rep.shape_error, rep.time_error);
    }
    Ok(())
}
