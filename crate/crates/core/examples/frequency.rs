//! Sign of the boundary frequency for the two standard perturbations.
//!
//!     cargo run --example frequency

use hktriples::spectrum::{frequency_preset, FrequencyPreset};
use hktriples::Orientation;

fn main() -> hktriples::Result<()> {
    for (preset, o) in [
        (FrequencyPreset::EguchiHansonDelta { c: 0.5 }, None),
        (FrequencyPreset::TaubNutDelta { m: 2.0 }, Some(Orientation::Reversed)),
        (FrequencyPreset::TaubNutDelta { m: 2.0 }, Some(Orientation::Standard)),
    ] {
        let rep = frequency_preset(preset, o)?;
        println!("{preset:?} ({:?}): {} (raw {})", rep.orientation, rep.verdict.classification, rep.raw.classification);
        for c in &rep.raw.components {
            println!("    λ = {:>3}  weight {:.3e}", c.eigenvalue, c.weight);
        }
    }
    Ok(())
}
