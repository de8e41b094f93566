//! Curl spectrum on invariant 1-forms of S³ by Peter–Weyl block.
//!
//!     cargo run --example spectrum

use hktriples::spectrum::{spectrum, SpectralOperator};
use hktriples::Orientation;

fn main() {
    let s = spectrum(SpectralOperator::Curl, 6, Orientation::Standard);
    println!("{:>6} {:>6} {:>9}", "λ", "mult", "coclosed");
    for l in s.lines.iter().filter(|l| l.complete) {
        println!("{:>6} {:>6} {:>9}", l.eigenvalue, l.multiplicity, l.coclosed_multiplicity);
    }
    // coclosed multiplicity k² − 1
    for k in 2..=5 {
        let k = k as f64;
        assert_eq!(s.coclosed_multiplicity(k), (k * k - 1.0) as usize);
    }
}
