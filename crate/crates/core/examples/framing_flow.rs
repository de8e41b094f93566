//! Flow boundary framings inward and classify how they end: a bolt for
//! Eguchi–Hanson, a smooth point for the round sphere and Taub–NUT.
//!
//!     cargo run --example framing_flow

use hktriples::framing::{catalog_framing, flow_integrate, mean_curvature, Direction, FramingState};
use hktriples::ode::Tolerances;
use hktriples::profile::{catalog, Family};
use hktriples::{FrameMode, Orientation};

fn main() -> hktriples::Result<()> {
    let tol = Tolerances::default();
    let eh = catalog(Family::EguchiHanson { c: 1.0 })?;
    let tn = catalog(Family::TaubNut { m: 1.0 })?;
    let starts = [
        ("eguchi-hanson r=2", catalog_framing(&eh, 2.0)?),
        ("taub-nut r=1.5", catalog_framing(&tn, 1.5)?),
        ("round", FramingState::diagonal([1.0; 3], FrameMode::Fixed, Orientation::Standard)),
    ];
    for (name, st) in starts {
        let h = mean_curvature(&st)?;
        let tr = flow_integrate(&st, Direction::Inward, 10.0, &tol)?;
        println!("{name:18} H = {h:.4}  -> {}  f = {:?}", tr.terminal.kind, tr.last().f);
    }
    Ok(())
}
