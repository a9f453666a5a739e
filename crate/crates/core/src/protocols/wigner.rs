use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fock::{population_with, Shots};
use super::pulse::SelectivePulse;
use super::{motional_mode, Execution};
use crate::error::Result;
use crate::hamiltonians::{RamanParams, Selector};
use crate::operator::{displacement, parity};
use crate::space::{InternalSpace, Level, SpaceDescriptor};
use crate::state::{MixedState, PureState, State};
use crate::C64;

/// Normalisation of the Wigner function.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WignerConvention {
    /// `W(α) = 2 Σ_n (-1)^n P_n(-α)`, bounded by 2.
    #[default]
    Paper,
    /// Phase-space density integrating to one, bounded by `2/π`.
    Standard,
}

impl WignerConvention {
    fn scale(self) -> f64 {
        match self {
            WignerConvention::Paper => 1.0,
            WignerConvention::Standard => 1.0 / PI,
        }
    }
}

/// How each grid value is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WignerMethod {
    /// Displaced parity computed directly from the density matrix.
    Oracle,
    /// Displace, then read every `P_n` with the selective population measurement.
    #[default]
    Protocol,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub alphas: Vec<C64>,
    pub values: Vec<f64>,
    pub convention: WignerConvention,
}

/// Wigner function of a motional state on the points `grid`.
///
/// The protocol measures `P_n` for `n < cutoff` and closes the sum with
/// `P_cutoff = 1 - Σ P_n`, since no doublet above the cutoff exists.
pub fn wigner(
    motional: &State,
    grid: &[C64],
    p: &RamanParams,
    convention: WignerConvention,
    method: WignerMethod,
    exec: Execution,
) -> Result<WignerGrid> {
    let mode = motional_mode(motional)?;
    let rho = motional.to_mixed();
    let parity_op = parity(mode);
    let pulses = match method {
        WignerMethod::Oracle => Vec::new(),
        WignerMethod::Protocol => {
            let space = SpaceDescriptor::ion_mode(InternalSpace::TwoLevel, mode.cutoff())?;
            (0..mode.cutoff())
                .map(|n| SelectivePulse::new(p, Selector::ajc(n), 0, &space, exec))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let ground = PureState::level(InternalSpace::TwoLevel, Level::G)?;
    let scale = 2.0 * convention.scale();

    let values = grid
        .par_iter()
        .map(|&alpha| -> Result<f64> {
            match method {
                WignerMethod::Oracle => {
                    let d = displacement(mode, alpha)?;
                    let displaced_parity = &(&d * &parity_op) * &d.adjoint();
                    Ok(scale * rho.expectation(&displaced_parity)?.re)
                }
                WignerMethod::Protocol => {
                    let d = displacement(mode, -alpha)?;
                    let shifted = MixedState::from_parts(d.matrix() * rho.matrix() * d.matrix().adjoint(), rho.space().clone());
                    let joint = State::Mixed(shifted).prepend(&ground)?;
                    let mut sum = 0.0;
                    let mut total = 0.0;
                    for (n, pulse) in pulses.iter().enumerate() {
                        let pn = population_with(pulse, &joint, Shots::Exact)?.estimate;
                        total += pn;
                        sum += if n % 2 == 0 { pn } else { -pn };
                    }
                    let last = 1.0 - total;
                    sum += if mode.cutoff() % 2 == 0 { last } else { -last };
                    Ok(scale * sum)
                }
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(WignerGrid { alphas: grid.to_vec(), values, convention })
}
