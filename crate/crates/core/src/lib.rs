//! Selective atom-motion interactions in trapped ions.
//!
//! A laser pair driving a Raman transition through a far-detuned level shifts
//! each motional Fock component by a different amount. Compensating the shift
//! of one doublet `{|g,N0>, |e,N0±1>}` makes it resonant while the others stay
//! detuned. This crate builds the corresponding Hamiltonians, propagates
//! states under them, and runs the protocols built on the effect.
//!
//! ```
//! use ionsel::hamiltonians::{RamanParams, Selector};
//! use ionsel::protocols::{generate_fock, Execution};
//! use ionsel::space::ModeSpace;
//! use ionsel::state::{PureState, State};
//! use ionsel::C64;
//!
//! let p = RamanParams::new(1e6, 1e6, 1e8, 0.1, 0.002, 1e6);
//! let beta: State = PureState::coherent(ModeSpace::new(20)?, C64::new(1.0, 0.0))?.into();
//! let r = generate_fock(&beta, 0, &p, Execution::Effective)?;
//! assert!(r.herald_probability > 0.36);
//! # Ok::<(), ionsel::error::Error>(())
//! ```
//!
//! The guide in `book/` walks through each module.

pub mod cli;
pub mod design;
pub mod error;
pub mod evolution;
pub mod hamiltonians;
mod linalg;
pub mod operator;
pub mod protocols;
pub mod space;
pub mod state;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spaces-and-states.md")]
    mod spaces_and_states {}
    #[doc = include_str!("../../../book/src/selective-hamiltonians.md")]
    mod selective_hamiltonians {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/protocols.md")]
    mod protocols {}
    #[doc = include_str!("../../../book/src/design.md")]
    mod design {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
