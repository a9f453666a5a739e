use nalgebra::{DMatrix, DVector};

use super::pulse::SelectivePulse;
use super::{motional_mode, Execution};
use crate::error::{Error, Result};
use crate::hamiltonians::{RamanParams, Selector};
use crate::space::{Factor, InternalSpace, ModeSpace, SpaceDescriptor};
use crate::state::{PureState, State};
use crate::C64;

/// The three pulses of the gate on a given register.
struct Sequence {
    map: SelectivePulse,
    phase: SelectivePulse,
}

impl Sequence {
    fn new(p: &RamanParams, space: &SpaceDescriptor, exec: Execution) -> Result<Self> {
        Ok(Sequence {
            map: SelectivePulse::new(p, Selector::jc(1)?, 0, space, exec)?,
            phase: SelectivePulse::new(p, Selector::jc(2)?, 1, space, exec)?,
        })
    }

    fn run(&self, state: &State) -> Result<State> {
        let s = self.map.apply(state, 1.0, false)?;
        let s = self.phase.apply(&s, 2.0, false)?;
        self.map.apply(&s, 1.0, true)
    }

    fn duration(&self) -> f64 {
        2.0 * self.map.duration(1.0) + self.phase.duration(2.0)
    }
}

fn register_space(qubits: &PureState, mode: ModeSpace) -> Result<SpaceDescriptor> {
    let two = Factor::Internal(InternalSpace::TwoLevel);
    if qubits.space().factors() != [two, two] {
        return Err(Error::SpaceMismatch("the register must hold two two-level ions".into()));
    }
    if mode.cutoff() < 3 {
        return Err(Error::CutoffTooSmall { cutoff: mode.cutoff(), required: 3 });
    }
    SpaceDescriptor::two_ions_mode(mode.cutoff())
}

/// Controlled-phase gate through the shared mode.
///
/// Ion 0 is mapped onto the mode by a red-sideband π-pulse on
/// `{|g,1>, |e,0>}`, ion 1 receives a 2π-pulse on `{|g,2>, |e,1>}` that flips
/// the sign of its `|e>` component whenever the mode holds one phonon, and
/// the first pulse is undone. Returns the joint state of both ions and the mode.
pub fn cpg(qubits: &PureState, motional: &PureState, p: &RamanParams, exec: Execution) -> Result<PureState> {
    let motional_state: State = motional.clone().into();
    let mode = motional_mode(&motional_state)?;
    let space = register_space(qubits, mode)?;
    let joint = State::Pure(qubits.tensor(motional)?);
    debug_assert_eq!(joint.space(), &space);
    let out = Sequence::new(p, &space, exec)?.run(&joint)?;
    match out {
        State::Pure(s) => Ok(s),
        State::Mixed(_) => unreachable!("pure input stays pure"),
    }
}

/// `diag(1, 1, 1, -1)` on `{|gg>, |ge>, |eg>, |ee>}`.
pub fn ideal_cpg() -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
    ]))
}

/// Gate quality with the mode starting in `|0>`.
#[derive(Clone, Debug)]
pub struct CpgProcess {
    /// Register block `<kl, 0| G |ij, 0>` of the implemented gate.
    pub register: DMatrix<C64>,
    /// `|Tr(U_ideal^† M)|^2 / 16`.
    pub process_fidelity: f64,
    /// Smallest probability of finding the mode back in `|0>` over the basis
    /// inputs and the uniform superposition.
    pub mode_return_fidelity: f64,
    pub duration: f64,
}

pub fn cpg_process(p: &RamanParams, cutoff: usize, exec: Execution) -> Result<CpgProcess> {
    let mode = ModeSpace::new(cutoff)?;
    let qubit_space = SpaceDescriptor::new(vec![InternalSpace::TwoLevel.into(), InternalSpace::TwoLevel.into()])?;
    let probe = PureState::basis(&qubit_space, 0)?;
    let space = register_space(&probe, mode)?;
    let seq = Sequence::new(p, &space, exec)?;
    let d = mode.dim();
    let vacuum_slot = |k: usize| k * d;

    let mut register = DMatrix::zeros(4, 4);
    let mut mode_return = f64::INFINITY;
    let mut inputs: Vec<DVector<C64>> = (0..4).map(|i| DVector::from_fn(4, |k, _| C64::new((k == i) as u8 as f64, 0.0))).collect();
    inputs.push(DVector::from_element(4, C64::new(0.5, 0.0)));
    for (i, amps) in inputs.iter().enumerate() {
        let mut v = DVector::zeros(space.dim());
        for k in 0..4 {
            v[vacuum_slot(k)] = amps[k];
        }
        let out = seq.run(&State::Pure(PureState::new(v, space.clone())?))?;
        let out = out.as_pure().expect("pure input stays pure");
        let back: f64 = (0..4).map(|k| out.amplitude(vacuum_slot(k)).norm_sqr()).sum();
        mode_return = mode_return.min(back);
        if i < 4 {
            for k in 0..4 {
                register[(k, i)] = out.amplitude(vacuum_slot(k));
            }
        }
    }
    let overlap = (ideal_cpg().adjoint() * &register).trace();
    Ok(CpgProcess {
        register,
        process_fidelity: overlap.norm_sqr() / 16.0,
        mode_return_fidelity: mode_return,
        duration: seq.duration(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::fidelity;

    fn p() -> RamanParams {
        RamanParams::new(1e6, 1e6, 1e8, 0.1, 0.002, 1e6)
    }

    fn qubits(amps: [f64; 4]) -> PureState {
        let s = SpaceDescriptor::new(vec![InternalSpace::TwoLevel.into(), InternalSpace::TwoLevel.into()]).unwrap();
        PureState::new(DVector::from_iterator(4, amps.iter().map(|&a| C64::new(a, 0.0))), s).unwrap()
    }

    fn vacuum(cutoff: usize) -> PureState {
        PureState::fock(ModeSpace::new(cutoff).unwrap(), 0).unwrap()
    }

    #[test]
    fn uniform_input_flips_last_sign() {
        let out = cpg(&qubits([0.5; 4]), &vacuum(4), &p(), Execution::Ideal).unwrap();
        let want = qubits([0.5, 0.5, 0.5, -0.5]).tensor(&vacuum(4)).unwrap();
        assert!((out.inner(&want).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn ground_register_untouched() {
        let input = qubits([1.0, 0.0, 0.0, 0.0]);
        let out = cpg(&input, &vacuum(3), &p(), Execution::Ideal).unwrap();
        let f = fidelity(&out.into(), &input.tensor(&vacuum(3)).unwrap().into()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn twice_is_identity() {
        let input = qubits([0.3, -0.5, 0.7, 0.2]);
        let once = cpg(&input, &vacuum(4), &p(), Execution::Ideal).unwrap();
        let space = SpaceDescriptor::two_ions_mode(4).unwrap();
        let seq = Sequence::new(&p(), &space, Execution::Ideal).unwrap();
        let twice = seq.run(&once.into()).unwrap();
        let f = fidelity(&twice, &input.tensor(&vacuum(4)).unwrap().into()).unwrap();
        assert!((f - 1.0).abs() < 1e-10);
    }

    #[test]
    fn superposed_mode_is_also_gated() {
        let m = ModeSpace::new(4).unwrap();
        let mode = PureState::new(
            DVector::from_fn(5, |n, _| C64::new(if n < 2 { 0.6 + 0.2 * n as f64 } else { 0.0 }, 0.0)),
            SpaceDescriptor::single(m),
        )
        .unwrap();
        let out = cpg(&qubits([0.5; 4]), &mode, &p(), Execution::Ideal).unwrap();
        let want = qubits([0.5, 0.5, 0.5, -0.5]).tensor(&mode).unwrap();
        assert!((fidelity(&out.into(), &want.into()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn high_phonon_components_untouched() {
        let m = ModeSpace::new(6).unwrap();
        let mode = PureState::fock(m, 4).unwrap();
        let input = qubits([0.1, 0.4, -0.6, 0.5]);
        let out = cpg(&input, &mode, &p(), Execution::Ideal).unwrap();
        let want = input.tensor(&mode).unwrap();
        assert!((out.inner(&want).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn small_cutoff_rejected() {
        assert!(matches!(
            cpg(&qubits([0.5; 4]), &vacuum(2), &p(), Execution::Ideal),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn process_fidelities() {
        let ideal = cpg_process(&p(), 4, Execution::Ideal).unwrap();
        assert!((ideal.process_fidelity - 1.0).abs() < 1e-12);
        assert!((ideal.mode_return_fidelity - 1.0).abs() < 1e-12);
        let eff = cpg_process(&p(), 8, Execution::Effective).unwrap();
        assert!(eff.process_fidelity >= 0.99, "{}", eff.process_fidelity);
        assert!(eff.mode_return_fidelity >= 0.99, "{}", eff.mode_return_fidelity);
    }
}
