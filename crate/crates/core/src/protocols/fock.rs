use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pulse::{flip_internal, SelectivePulse};
use super::{conditioned_mode, motional_mode, Execution, ProtocolResult};
use crate::error::{Error, Result};
use crate::hamiltonians::{RamanParams, Selector};
use crate::space::{InternalSpace, Level, SpaceDescriptor};
use crate::state::{level_probability, measure_internal, PureState, State, MIN_PROBABILITY};

fn with_ion(motional: &State, level: Level) -> Result<(SpaceDescriptor, State)> {
    let mode = motional_mode(motional)?;
    let space = SpaceDescriptor::ion_mode(InternalSpace::TwoLevel, mode.cutoff())?;
    let ion = PureState::level(InternalSpace::TwoLevel, level)?;
    Ok((space, motional.prepend(&ion)?))
}

/// Selective blue-sideband π-pulse on `{|g,n0>, |e,n0+1>}` followed by
/// detection of `|e>`, which heralds the motional Fock state `|n0+1>`.
pub fn generate_fock(motional: &State, n0: usize, p: &RamanParams, exec: Execution) -> Result<ProtocolResult> {
    let (space, joint) = with_ion(motional, Level::G)?;
    let pulse = SelectivePulse::new(p, Selector::ajc(n0), 0, &space, exec)?;
    let after = pulse.apply(&joint, 1.0, false)?;
    let (prob, post) = measure_internal(&after, 0, Level::E)?;
    Ok(ProtocolResult {
        herald_probability: prob,
        post_state: conditioned_mode(&post)?,
        duration: pulse.duration(1.0),
        herald_level: Level::E,
    })
}

/// Single-shot cooling: with the ion in `|e>`, a π-pulse on `{|g,0>, |e,1>}`
/// moves `|e,1>` to `|g,0>`, so finding `|g>` heralds the motional ground state.
pub fn selective_cool(motional: &State, p: &RamanParams, exec: Execution) -> Result<ProtocolResult> {
    let (space, joint) = with_ion(motional, Level::E)?;
    let pulse = SelectivePulse::new(p, Selector::ajc(0), 0, &space, exec)?;
    let after = pulse.apply(&joint, 1.0, false)?;
    let (prob, post) = measure_internal(&after, 0, Level::G)?;
    Ok(ProtocolResult {
        herald_probability: prob,
        post_state: conditioned_mode(&post)?,
        duration: pulse.duration(1.0),
        herald_level: Level::G,
    })
}

/// How the excitation probability is turned into an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Shots {
    /// Born probability.
    Exact,
    /// Frequency of `|e>` over `shots` simulated detections.
    Finite { shots: u64, seed: u64 },
}

/// Counts from a finite-shot measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub shots: u64,
    pub excited_counts: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationEstimate {
    pub estimate: f64,
    /// Born probability of `|e>` after the pulse.
    pub probability: f64,
    pub record: Option<MeasurementRecord>,
}

fn sample(probability: f64, shots: Shots) -> Result<PopulationEstimate> {
    match shots {
        Shots::Exact => Ok(PopulationEstimate { estimate: probability, probability, record: None }),
        Shots::Finite { shots, seed } => {
            if shots == 0 {
                return Err(Error::InvalidParameter { name: "shots", reason: "need at least one shot".into() });
            }
            let dist = Bernoulli::new(probability.clamp(0.0, 1.0))
                .map_err(|e| Error::InvalidParameter { name: "probability", reason: e.to_string() })?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let excited_counts = (0..shots).filter(|_| dist.sample(&mut rng)).count() as u64;
            Ok(PopulationEstimate {
                estimate: excited_counts as f64 / shots as f64,
                probability,
                record: Some(MeasurementRecord { shots, excited_counts, seed }),
            })
        }
    }
}

/// Estimates `P_{n0}` as the probability of exciting the ion with the
/// selective π-pulse of [`generate_fock`].
pub fn measure_population(
    motional: &State,
    n0: usize,
    p: &RamanParams,
    shots: Shots,
    exec: Execution,
) -> Result<PopulationEstimate> {
    let (space, joint) = with_ion(motional, Level::G)?;
    let pulse = SelectivePulse::new(p, Selector::ajc(n0), 0, &space, exec)?;
    population_with(&pulse, &joint, shots)
}

pub(crate) fn population_with(pulse: &SelectivePulse, joint: &State, shots: Shots) -> Result<PopulationEstimate> {
    let after = pulse.apply(joint, 1.0, false)?;
    sample(level_probability(&after, 0, Level::E)?, shots)
}

/// Sharpened estimates of `P_{n0}`. After an `|e>` detection the ion is
/// returned to `|g>` and the next doublet `{|g,n0+k>, |e,n0+k+1>}` is pulsed;
/// estimate `k` is the probability that the first `k + 1` detections all
/// find `|e>`. Population leaked from neighbouring doublets fails the later
/// checks, so the sequence discards it round by round.
pub fn refine_population(motional: &State, n0: usize, p: &RamanParams, rounds: usize, exec: Execution) -> Result<Vec<f64>> {
    let (space, mut joint) = with_ion(motional, Level::G)?;
    let mode = space.require_mode()?;
    Selector::ajc(n0 + rounds).check_mode(mode)?;
    let mut estimates = Vec::with_capacity(rounds + 1);
    let mut weight = 1.0;
    for k in 0..=rounds {
        let pulse = SelectivePulse::new(p, Selector::ajc(n0 + k), 0, &space, exec)?;
        let after = pulse.apply(&joint, 1.0, false)?;
        let prob = level_probability(&after, 0, Level::E)?;
        weight *= prob;
        estimates.push(weight);
        if k == rounds {
            break;
        }
        if weight < MIN_PROBABILITY {
            estimates.resize(rounds + 1, 0.0);
            break;
        }
        let (_, post) = measure_internal(&after, 0, Level::E)?;
        joint = flip_internal(&post, 0)?;
    }
    Ok(estimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ModeSpace;
    use crate::state::{fidelity, thermal_state};
    use crate::C64;

    fn params(s20: bool) -> RamanParams {
        // η1 = 0.1 with η2 = 0.002 gives S = 20; η2 = 0.0004 gives S = 100.
        RamanParams::new(1e6, 1e6, 1e8, 0.1, if s20 { 0.002 } else { 0.0004 }, 1e6)
    }

    fn coherent(cutoff: usize, beta: f64) -> State {
        PureState::coherent(ModeSpace::new(cutoff).unwrap(), C64::new(beta, 0.0)).unwrap().into()
    }

    fn fock(cutoff: usize, n: usize) -> State {
        PureState::fock(ModeSpace::new(cutoff).unwrap(), n).unwrap().into()
    }

    #[test]
    fn fock_from_fock() {
        let r = generate_fock(&fock(6, 2), 2, &params(true), Execution::Ideal).unwrap();
        assert!((r.herald_probability - 1.0).abs() < 1e-12);
        assert!((fidelity(&r.post_state, &fock(6, 3)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.herald_level, Level::E);
    }

    #[test]
    fn fock_from_coherent_ideal() {
        let r = generate_fock(&coherent(20, 1.0), 2, &params(true), Execution::Ideal).unwrap();
        assert!((r.herald_probability - (-1f64).exp() / 2.0).abs() < 1e-6);
        assert!((fidelity(&r.post_state, &fock(20, 3)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fock_from_coherent_effective() {
        let r = generate_fock(&coherent(20, 1.0), 2, &params(true), Execution::Effective).unwrap();
        assert!(fidelity(&r.post_state, &fock(20, 3)).unwrap() >= 0.99);
    }

    #[test]
    fn fock_out_of_range() {
        assert!(matches!(
            generate_fock(&fock(3, 1), 3, &params(true), Execution::Ideal),
            Err(Error::SelectorOutOfRange(_))
        ));
        assert!(matches!(
            generate_fock(&fock(5, 1), 3, &params(true), Execution::Ideal),
            Err(Error::ZeroProbability(_))
        ));
    }

    #[test]
    fn cooling_thermal() {
        let rho: State = thermal_state(ModeSpace::new(30).unwrap(), 0.5).unwrap().into();
        let r = selective_cool(&rho, &params(true), Execution::Ideal).unwrap();
        assert!((r.herald_probability - 2.0 / 9.0).abs() < 1e-3);
        assert!(fidelity(&r.post_state, &fock(30, 0)).unwrap() >= 0.999);
        assert_eq!(r.herald_level, Level::G);
    }

    #[test]
    fn cooling_edge_cases() {
        let r = selective_cool(&fock(4, 1), &params(true), Execution::Ideal).unwrap();
        assert!((r.herald_probability - 1.0).abs() < 1e-12);
        assert!((fidelity(&r.post_state, &fock(4, 0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(selective_cool(&fock(4, 0), &params(true), Execution::Ideal), Err(Error::ZeroProbability(_))));
    }

    #[test]
    fn measurement_exact_and_sampled() {
        let p = params(true);
        let m = measure_population(&fock(5, 3), 3, &p, Shots::Exact, Execution::Ideal).unwrap();
        assert!((m.estimate - 1.0).abs() < 1e-12);
        let c = coherent(30, 1.0);
        let exact = measure_population(&c, 0, &p, Shots::Exact, Execution::Ideal).unwrap();
        assert!((exact.estimate - (-1f64).exp()).abs() < 1e-6);
        let shots = Shots::Finite { shots: 10_000, seed: 7 };
        let a = measure_population(&c, 0, &p, shots, Execution::Ideal).unwrap();
        let b = measure_population(&c, 0, &p, shots, Execution::Ideal).unwrap();
        assert_eq!(a, b);
        let q = exact.estimate;
        assert!((a.estimate - q).abs() <= 3.0 * (q * (1.0 - q) / 10_000.0).sqrt());
        let rec = a.record.unwrap();
        assert!(rec.excited_counts <= rec.shots);
        assert_eq!(measure_population(&fock(5, 3), 1, &p, Shots::Exact, Execution::Ideal).unwrap().estimate, 0.0);
    }

    #[test]
    fn refinement() {
        let c = coherent(20, 1.0);
        let ideal = refine_population(&c, 1, &params(true), 2, Execution::Ideal).unwrap();
        assert_eq!(ideal.len(), 3);
        assert!((ideal[1] - ideal[0]).abs() < 1e-12 && (ideal[2] - ideal[1]).abs() < 1e-12);
        let single = refine_population(&c, 1, &params(true), 0, Execution::Ideal).unwrap();
        let direct = measure_population(&c, 1, &params(true), Shots::Exact, Execution::Ideal).unwrap();
        assert_eq!(single, vec![direct.estimate]);
        assert!(refine_population(&c, 18, &params(true), 2, Execution::Ideal).is_err());
    }

    #[test]
    fn refinement_converges_under_effective_dynamics() {
        // S = 5
        let p = RamanParams::new(1e6, 1e6, 1e8, 0.1, 0.008, 1e6);
        let c = coherent(20, 1.0);
        let truth = (-1f64).exp();
        let est = refine_population(&c, 1, &p, 2, Execution::Effective).unwrap();
        assert!((est[1] - truth).abs() < (est[0] - truth).abs(), "{est:?}");
    }
}
