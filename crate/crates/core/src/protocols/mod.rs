//! State-engineering and measurement protocols built on selective pulses.
//!
//! Every protocol runs in one of two [`Execution`] modes. `Ideal` rotates
//! the selected doublet exactly and leaves every other doublet alone, so it
//! isolates the protocol logic. `Effective` propagates the full selective
//! Hamiltonian, so off-resonant doublets leak and pick up phases according
//! to the finite selectivity.

mod cpg;
mod fock;
mod pulse;
mod wigner;

pub use cpg::{cpg, cpg_process, ideal_cpg, CpgProcess};
pub use fock::{
    generate_fock, measure_population, refine_population, selective_cool, MeasurementRecord, PopulationEstimate, Shots,
};
pub use pulse::SelectivePulse;
pub use wigner::{wigner, WignerConvention, WignerGrid, WignerMethod};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Factor, Level, ModeSpace};
use crate::state::{PureState, State};

/// How pulses are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[default]
    Ideal,
    Effective,
}

/// Outcome of a heralded protocol.
#[derive(Clone, Debug)]
pub struct ProtocolResult {
    /// Probability of the heralding outcome.
    pub herald_probability: f64,
    /// Motional state conditioned on the herald.
    pub post_state: State,
    /// Total pulse time in seconds.
    pub duration: f64,
    /// Internal level whose detection heralds success.
    pub herald_level: Level,
}

/// Checks that `state` lives on a bare motional mode.
pub(crate) fn motional_mode(state: &State) -> Result<ModeSpace> {
    match state.space().factors() {
        [Factor::Mode(m)] => Ok(*m),
        _ => Err(Error::SpaceMismatch("expected a state of the motional mode alone".into())),
    }
}

/// Motional state left after the ions were found in known levels. Pure
/// inputs keep their amplitudes; mixed inputs are traced over the ions.
pub(crate) fn conditioned_mode(state: &State) -> Result<State> {
    let mode = state.space().require_mode()?;
    match state {
        State::Pure(s) => {
            let d = mode.dim();
            let blocks = s.dim() / d;
            let mut best = 0;
            let mut weight = -1.0;
            for b in 0..blocks {
                let w: f64 = (0..d).map(|n| s.amplitude(b * d + n).norm_sqr()).sum();
                if w > weight {
                    weight = w;
                    best = b;
                }
            }
            if weight < 1.0 - 1e-12 {
                return Ok(State::Mixed(state.reduced_mode()?));
            }
            let v = nalgebra::DVector::from_fn(d, |n, _| s.amplitude(best * d + n));
            Ok(State::Pure(PureState::new(v, crate::space::SpaceDescriptor::single(mode))?))
        }
        State::Mixed(_) => Ok(State::Mixed(state.reduced_mode()?)),
    }
}
