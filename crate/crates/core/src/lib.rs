//! Synthesis, simulation and error budgets for Barenco two-qubit gates
//! built from a tunable non-collinear Rydberg interaction.
//!
//! Units: angular frequencies in rad·μs⁻¹ with ħ = 1, durations in μs.
//! Use [`units`] to convert quoted "× 2π MHz" values at the boundary.
//!
//! ```
//! use barenco::config::Preset;
//! use barenco::protocols::{compose_ideal, special_gate, cnot_matrix, SpecialKind};
//! use barenco::atoms::BlockadeSpec;
//! use barenco::numerics::max_deviation_mod_phase;
//! use barenco::units::two_pi_mhz;
//!
//! let b = BlockadeSpec::new(two_pi_mhz(0.558), 0.0);
//! let p = special_gate(SpecialKind::Cnot, &b).unwrap();
//! let u = compose_ideal(&p).unwrap();
//! assert!(max_deviation_mod_phase(&u, &cnot_matrix()) < 1e-10);
//! # let _ = Preset::appendix_a();
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atoms;
pub mod config;
pub mod design;
pub mod dynamics;
pub mod error;
pub mod error_budget;
pub mod numerics;
pub mod protocols;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/units.md")]
    mod units {}
    #[doc = include_str!("../../../book/src/gates.md")]
    mod gates {}
    #[doc = include_str!("../../../book/src/interactions.md")]
    mod interactions {}
    #[doc = include_str!("../../../book/src/protocols.md")]
    mod protocols {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/errors.md")]
    mod errors {}
    #[doc = include_str!("../../../book/src/design.md")]
    mod design {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
