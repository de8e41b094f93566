//! Hyperkähler triples on SU(2)-cohomogeneity-one 4-manifolds with boundary.
//!
//! The crate works on `ℝ_t × SU(2)` with the left-invariant coframe
//! `{dt, η₁, η₂, η₃}` normalised by `dη₁ = 2 η₂∧η₃` (cyclic), so that the
//! metric `Σ ηᵢ²` is the unit round 3-sphere. On top of an exact exterior
//! algebra kernel it provides
//!
//! * the hyperkähler constraint system on triples of 2-forms ([`triple`]),
//! * the fixed- and rotating-frame ODE reductions with a closed-form catalog
//!   and an adaptive integrator ([`profile`], [`ode`]),
//! * closed framings of `Λ²S³`, their induced metric, mean curvature and the
//!   framing flow `∂γ/∂t = d(*γ)` ([`framing`]),
//! * curl and `D_Y` spectra on the round `S³` by Peter–Weyl blocks, frequency
//!   classification and collar Dirac checks ([`spectrum`]),
//! * closed anti-self-dual forms on the flat ball built from boundary
//!   eigenforms ([`asd`]).

// index loops mirror the component formulas; negated comparisons reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod asd;
pub mod cli;
pub mod collar;
mod error;
pub mod exterior;
pub mod framing;
pub mod io;
pub mod ode;
pub mod profile;
pub mod pwform;
pub mod quadrature;
pub mod scalar;
pub mod spectrum;
pub mod su2;
pub mod triple;

pub use error::{Error, Result};
pub use exterior::{DiagonalMetric, MixedForm, Monomial};
pub use scalar::{Real, Scalar};
pub use triple::{SymMatrix3, TripleField};

use serde::{Deserialize, Serialize};

/// Orientation of the 3-sphere slices. `Reversed` negates the 3d Hodge star,
/// i.e. declares `−η₁∧η₂∧η₃` positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Standard,
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Standard => 1.0,
            Orientation::Reversed => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Standard => Orientation::Reversed,
            Orientation::Reversed => Orientation::Standard,
        }
    }
}

/// Whether the SU(2) action fixes the triple or rotates it by `Ad(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameMode {
    Fixed,
    Rotating,
}

/// One of the three frame directions `η₁, η₂, η₃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    One,
    Two,
    Three,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::One, Axis::Two, Axis::Three];

    /// Zero-based index.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// Levi-Civita symbol on zero-based indices.
pub(crate) fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}
