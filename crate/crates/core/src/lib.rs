//! Exact spectral solution of an unstable level |A⟩ that decays into a
//! continuum through an intermediate level |B⟩, and the survival dynamics of
//! the bare states with and without repeated measurement resets.
//!
//! The Hamiltonian in the bare basis `[A, B, ω ∈ [0, ω_max]]` is
//!
//! ```text
//!     | E_A   Ω     0        |
//! H = | Ω     E_B   f(ω')    |
//!     | 0     f(ω)  ω δ(ω−ω')|
//! ```
//!
//! * [`model`]: parameters, form factor, β(z) and its boundary values.
//! * [`spectral`]: continuum densities, bound states, closure sums.
//! * [`evolution`]: survival amplitudes on a shared spectral grid.
//! * [`zeno`]: measurement-reset protocol, Zeno/anti-Zeno classification.
//! * [`oracle`]: brute-force discretised Hamiltonian and closed-form limits.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod evolution;
pub mod fit;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod spectral;
pub mod zeno;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use error::{Result, ZenoError};
pub use evolution::{SpectralGrid, SurvivalCurve};
pub use model::ModelParams;

/// Complex number used for amplitudes and boundary values of β.
pub type ComplexValue = num_complex::Complex64;

/// One of the two bare discrete states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BareState {
    A,
    B,
}

impl BareState {
    /// Row of this state in the discretised Hamiltonian.
    pub fn index(self) -> usize {
        match self {
            BareState::A => 0,
            BareState::B => 1,
        }
    }
}

impl fmt::Display for BareState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BareState::A => "A",
            BareState::B => "B",
        })
    }
}

impl FromStr for BareState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(BareState::A),
            "B" | "b" => Ok(BareState::B),
            other => Err(format!("unknown bare state `{other}` (expected A or B)")),
        }
    }
}
