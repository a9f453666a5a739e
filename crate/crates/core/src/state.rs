//! Pure and mixed states, projective measurement of internal levels, Fock
//! populations and fidelities.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::{coherent_tail, Operator, DISPLACEMENT_TOLERANCE};
use crate::space::{InternalSpace, Level, ModeSpace, SpaceDescriptor};
use crate::C64;

/// Outcomes below this probability cannot be post-selected on.
pub const MIN_PROBABILITY: f64 = 1e-14;

const NORM_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = -1e-10;

/// Unit vector on a composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: DVector<C64>,
    space: SpaceDescriptor,
}

/// Hermitian, unit-trace, positive semidefinite density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    matrix: DMatrix<C64>,
    space: SpaceDescriptor,
}

#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(PureState),
    Mixed(MixedState),
}

pub(crate) fn coherent_amplitudes(alpha: C64, cutoff: usize) -> DVector<C64> {
    let mut v = DVector::zeros(cutoff + 1);
    let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    v[0] = amp;
    for n in 1..=cutoff {
        amp *= alpha / (n as f64).sqrt();
        v[n] = amp;
    }
    v
}

impl PureState {
    /// Normalises `amplitudes`; fails on a zero vector or a length mismatch.
    pub fn new(amplitudes: DVector<C64>, space: SpaceDescriptor) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("amplitude vector has zero or non-finite norm".into()));
        }
        Ok(PureState { amplitudes: amplitudes / C64::new(norm, 0.0), space })
    }

    pub(crate) fn from_parts(amplitudes: DVector<C64>, space: SpaceDescriptor) -> Self {
        PureState { amplitudes, space }
    }

    pub fn basis(space: &SpaceDescriptor, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::IndexOutOfRange { index, len: space.dim() });
        }
        let mut v = DVector::zeros(space.dim());
        v[index] = C64::new(1.0, 0.0);
        Ok(PureState { amplitudes: v, space: space.clone() })
    }

    pub fn fock(mode: ModeSpace, n: usize) -> Result<Self> {
        Self::basis(&SpaceDescriptor::single(mode), n)
    }

    pub fn level(internal: InternalSpace, level: Level) -> Result<Self> {
        Self::basis(&SpaceDescriptor::single(internal), internal.index_of(level)?)
    }

    /// Coherent state `|alpha>` from its exact Fock amplitudes, renormalised
    /// on the truncated space.
    pub fn coherent(mode: ModeSpace, alpha: C64) -> Result<Self> {
        let tail = coherent_tail(alpha, mode.cutoff());
        if tail > DISPLACEMENT_TOLERANCE {
            return Err(Error::Truncation { error: tail, tolerance: DISPLACEMENT_TOLERANCE });
        }
        Self::new(coherent_amplitudes(alpha, mode.cutoff()), SpaceDescriptor::single(mode))
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        check_space(&self.space, &other.space)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let space = self.space.concat(&other.space)?;
        Ok(PureState { amplitudes: self.amplitudes.kronecker(&other.amplitudes), space })
    }

    pub fn to_mixed(&self) -> MixedState {
        MixedState {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            space: self.space.clone(),
        }
    }

    /// `op |self>`, renormalised.
    pub fn evolve(&self, op: &Operator) -> Result<PureState> {
        check_space(&self.space, op.space())?;
        PureState::new(op.matrix() * &self.amplitudes, self.space.clone())
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        check_space(&self.space, op.space())?;
        Ok(self.amplitudes.dotc(&(op.matrix() * &self.amplitudes)))
    }
}

/// Kronecker product of pure states in factor order.
pub fn tensor_states(states: &[&PureState]) -> Result<PureState> {
    let (first, rest) = states
        .split_first()
        .ok_or_else(|| Error::InvalidLayout("tensor of an empty list".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, s| acc.tensor(s))
}

impl MixedState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<C64>, space: SpaceDescriptor) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > NORM_TOL {
            return Err(Error::InvalidState(format!("density matrix is not Hermitian (defect {defect:e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("density matrix trace is {tr}, expected 1")));
        }
        let (values, _) = linalg::eigh(&matrix);
        let min = values.min();
        if min < POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("density matrix has eigenvalue {min:e}")));
        }
        Ok(MixedState { matrix, space })
    }

    /// Symmetrises and rescales to unit trace without further checks.
    pub(crate) fn from_parts(matrix: DMatrix<C64>, space: SpaceDescriptor) -> Self {
        let mut m = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        let tr = linalg::trace(&m).re;
        if tr > 0.0 {
            m /= C64::new(tr, 0.0);
        }
        MixedState { matrix: m, space }
    }

    /// Diagonal state with the given populations (renormalised).
    pub fn diagonal(space: &SpaceDescriptor, populations: &[f64]) -> Result<Self> {
        if populations.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: populations.len() });
        }
        if populations.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidState("populations must be finite and non-negative".into()));
        }
        let total: f64 = populations.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidState("populations sum to zero".into()));
        }
        let diag = DVector::from_iterator(space.dim(), populations.iter().map(|p| C64::new(p / total, 0.0)));
        Ok(MixedState { matrix: DMatrix::from_diagonal(&diag), space: space.clone() })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    pub fn tensor(&self, other: &MixedState) -> Result<MixedState> {
        let space = self.space.concat(&other.space)?;
        Ok(MixedState { matrix: self.matrix.kronecker(&other.matrix), space })
    }

    /// `U rho U^dagger`.
    pub fn evolve(&self, op: &Operator) -> Result<MixedState> {
        check_space(&self.space, op.space())?;
        Ok(MixedState::from_parts(op.matrix() * &self.matrix * op.matrix().adjoint(), self.space.clone()))
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        check_space(&self.space, op.space())?;
        Ok((&self.matrix * op.matrix()).trace())
    }
}

/// Thermal occupation `p_n ∝ (nbar / (1 + nbar))^n`, renormalised on the
/// truncated space.
pub fn thermal_state(mode: ModeSpace, nbar: f64) -> Result<MixedState> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter { name: "nbar", reason: format!("must be finite and >= 0, got {nbar}") });
    }
    let ratio = nbar / (1.0 + nbar);
    let pops: Vec<f64> = (0..mode.dim()).map(|n| if n == 0 { 1.0 } else { ratio.powi(n as i32) }).collect();
    MixedState::diagonal(&SpaceDescriptor::single(mode), &pops)
}

impl State {
    pub fn space(&self) -> &SpaceDescriptor {
        match self {
            State::Pure(s) => s.space(),
            State::Mixed(s) => s.space(),
        }
    }

    pub fn dim(&self) -> usize {
        self.space().dim()
    }

    pub fn to_mixed(&self) -> MixedState {
        match self {
            State::Pure(s) => s.to_mixed(),
            State::Mixed(s) => s.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            State::Pure(s) => Some(s),
            State::Mixed(_) => None,
        }
    }

    /// Norm for pure states, trace for mixed states.
    pub fn norm(&self) -> f64 {
        match self {
            State::Pure(s) => s.norm(),
            State::Mixed(s) => s.trace(),
        }
    }

    /// Diagonal of the density matrix in the composite basis.
    pub fn populations(&self) -> Vec<f64> {
        match self {
            State::Pure(s) => s.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
            State::Mixed(s) => (0..s.dim()).map(|i| s.matrix[(i, i)].re).collect(),
        }
    }

    pub fn population(&self, index: usize) -> f64 {
        match self {
            State::Pure(s) => s.amplitudes[index].norm_sqr(),
            State::Mixed(s) => s.matrix[(index, index)].re,
        }
    }

    pub fn evolve(&self, op: &Operator) -> Result<State> {
        Ok(match self {
            State::Pure(s) => State::Pure(s.evolve(op)?),
            State::Mixed(s) => State::Mixed(s.evolve(op)?),
        })
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        match self {
            State::Pure(s) => s.expectation(op),
            State::Mixed(s) => s.expectation(op),
        }
    }

    /// Prepend a pure factor (for example an internal level) to this state.
    pub fn prepend(&self, factor: &PureState) -> Result<State> {
        Ok(match self {
            State::Pure(s) => State::Pure(factor.tensor(s)?),
            State::Mixed(s) => State::Mixed(factor.to_mixed().tensor(s)?),
        })
    }

    /// Reduced state of the motional mode (partial trace over internal factors).
    pub fn reduced_mode(&self) -> Result<MixedState> {
        let mode = self.space().require_mode()?;
        let d = mode.dim();
        let blocks = self.dim() / d;
        let rho = self.to_mixed();
        let mut out = DMatrix::zeros(d, d);
        for b in 0..blocks {
            out += rho.matrix.view((b * d, b * d), (d, d));
        }
        Ok(MixedState::from_parts(out, SpaceDescriptor::single(mode)))
    }

    /// Reduced state of the internal factors (partial trace over the mode).
    pub fn reduced_internal(&self) -> Result<MixedState> {
        let mode = self.space().require_mode()?;
        let d = mode.dim();
        let blocks = self.dim() / d;
        if blocks == 1 {
            return Err(Error::SpaceMismatch("the space has no internal factor".into()));
        }
        let rho = self.to_mixed();
        let mut out = DMatrix::zeros(blocks, blocks);
        for i in 0..blocks {
            for j in 0..blocks {
                out[(i, j)] = rho.matrix.view((i * d, j * d), (d, d)).trace();
            }
        }
        let factors = self.space().factors()[..self.space().factors().len() - 1].to_vec();
        Ok(MixedState::from_parts(out, SpaceDescriptor::new(factors)?))
    }
}

impl From<PureState> for State {
    fn from(s: PureState) -> Self {
        State::Pure(s)
    }
}

impl From<MixedState> for State {
    fn from(s: MixedState) -> Self {
        State::Mixed(s)
    }
}

fn check_space(a: &SpaceDescriptor, b: &SpaceDescriptor) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// Composite indices whose internal factor `factor` is in `level`.
pub(crate) fn level_indices(space: &SpaceDescriptor, factor: usize, level: Level) -> Result<Vec<usize>> {
    let internal = space.internal(factor)?;
    let target = internal.index_of(level)?;
    Ok((0..space.dim()).filter(|&i| space.digits(i)[factor] == target).collect())
}

/// Projective measurement of `|level><level|` on internal factor `factor`.
///
/// Returns the Born probability and the renormalised post-measurement state.
pub fn measure_internal(state: &State, factor: usize, level: Level) -> Result<(f64, State)> {
    let space = state.space().clone();
    let keep = level_indices(&space, factor, level)?;
    match state {
        State::Pure(s) => {
            let mut v = DVector::zeros(s.dim());
            for &i in &keep {
                v[i] = s.amplitudes[i];
            }
            let p = v.norm_squared().clamp(0.0, 1.0);
            if p < MIN_PROBABILITY {
                return Err(Error::ZeroProbability(p));
            }
            Ok((p, State::Pure(PureState::from_parts(v / C64::new(p.sqrt(), 0.0), space))))
        }
        State::Mixed(s) => {
            let mut m = DMatrix::zeros(s.dim(), s.dim());
            for &i in &keep {
                for &j in &keep {
                    m[(i, j)] = s.matrix[(i, j)];
                }
            }
            let p = linalg::trace(&m).re.clamp(0.0, 1.0);
            if p < MIN_PROBABILITY {
                return Err(Error::ZeroProbability(p));
            }
            Ok((p, State::Mixed(MixedState::from_parts(m, space))))
        }
    }
}

/// Probability of finding internal factor `factor` in `level`, without
/// post-selection.
pub fn level_probability(state: &State, factor: usize, level: Level) -> Result<f64> {
    let keep = level_indices(state.space(), factor, level)?;
    Ok(keep.iter().map(|&i| state.population(i)).sum::<f64>().clamp(0.0, 1.0))
}

/// Motional Fock populations `P_n`, traced over every internal factor.
pub fn fock_populations(state: &State) -> Result<Vec<f64>> {
    let mode = state.space().require_mode()?;
    let d = mode.dim();
    let mut out = vec![0.0; d];
    for (i, p) in state.populations().into_iter().enumerate() {
        out[i % d] += p;
    }
    Ok(out)
}

/// Fidelity: `|<a|b>|^2` for pure states, `<a|rho|a>` for pure against mixed
/// and the Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2` otherwise.
pub fn fidelity(a: &State, b: &State) -> Result<f64> {
    check_space(a.space(), b.space())?;
    let f = match (a, b) {
        (State::Pure(x), State::Pure(y)) => x.inner(y)?.norm_sqr(),
        (State::Pure(x), State::Mixed(r)) | (State::Mixed(r), State::Pure(x)) => {
            x.amplitudes.dotc(&(&r.matrix * &x.amplitudes)).re
        }
        (State::Mixed(r), State::Mixed(s)) => {
            let sqrt_r = linalg::hermitian_function(&r.matrix, |x| x.max(0.0).sqrt());
            let inner = &sqrt_r * &s.matrix * &sqrt_r;
            let (values, _) = linalg::eigh(&inner);
            let root: f64 = values.iter().map(|v| v.max(0.0).sqrt()).sum();
            root * root
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(c: usize) -> ModeSpace {
        ModeSpace::new(c).unwrap()
    }

    fn poisson(mean: f64, n: usize) -> f64 {
        (0..n).fold((-mean).exp(), |acc, k| acc * mean / (k + 1) as f64)
    }

    #[test]
    fn product_ground_state_index() {
        let g = PureState::level(InternalSpace::TwoLevel, Level::G).unwrap();
        let v = PureState::fock(mode(4), 0).unwrap();
        let s = g.tensor(&v).unwrap();
        assert_eq!(s.amplitude(0), C64::new(1.0, 0.0));
    }

    #[test]
    fn thermal_examples() {
        let r = thermal_state(mode(30), 0.0).unwrap();
        assert_eq!(r.population(0), 1.0);
        let r = thermal_state(mode(30), 0.5).unwrap();
        assert!((r.population(0) - 1.0 / 1.5).abs() < 1e-6);
        assert!((r.population(1) - 0.5 / 2.25).abs() < 1e-6);
        for nbar in [0.1, 1.0, 5.0] {
            let r = thermal_state(mode(30), nbar).unwrap();
            assert!((r.trace() - 1.0).abs() < 1e-12);
        }
        assert!(thermal_state(mode(3), -1.0).is_err());
    }

    #[test]
    fn measure_zero_probability() {
        let s = SpaceDescriptor::ion_mode(InternalSpace::TwoLevel, 5).unwrap();
        let st = State::Pure(PureState::basis(&s, s.basis_index(&[Level::G], 3).unwrap()).unwrap());
        assert!(matches!(measure_internal(&st, 0, Level::E), Err(Error::ZeroProbability(_))));
    }

    #[test]
    fn measure_equal_superposition() {
        let s = SpaceDescriptor::ion_mode(InternalSpace::TwoLevel, 5).unwrap();
        let mut v = DVector::zeros(s.dim());
        v[s.basis_index(&[Level::G], 0).unwrap()] = C64::new(1.0, 0.0);
        v[s.basis_index(&[Level::E], 1).unwrap()] = C64::new(1.0, 0.0);
        let st = State::Pure(PureState::new(v, s.clone()).unwrap());
        let (p, post) = measure_internal(&st, 0, Level::E).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let e1 = State::Pure(PureState::basis(&s, s.basis_index(&[Level::E], 1).unwrap()).unwrap());
        assert!((fidelity(&post, &e1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn measure_classical_mixture() {
        let s = SpaceDescriptor::ion_mode(InternalSpace::TwoLevel, 3).unwrap();
        let mut pops = vec![0.0; s.dim()];
        pops[s.basis_index(&[Level::G], 0).unwrap()] = 0.25;
        let e2 = s.basis_index(&[Level::E], 2).unwrap();
        pops[e2] = 0.75;
        let st = State::Mixed(MixedState::diagonal(&s, &pops).unwrap());
        let (p, post) = measure_internal(&st, 0, Level::E).unwrap();
        assert!((p - 0.75).abs() < 1e-15);
        assert!((post.population(e2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fock_populations_examples() {
        let s = SpaceDescriptor::ion_mode(InternalSpace::TwoLevel, 5).unwrap();
        let st = State::Pure(PureState::basis(&s, s.basis_index(&[Level::G], 2).unwrap()).unwrap());
        let p = fock_populations(&st).unwrap();
        assert_eq!(p[2], 1.0);
        assert_eq!(p.iter().sum::<f64>(), 1.0);

        let coh = State::Pure(PureState::coherent(mode(30), C64::new(1.0, 0.0)).unwrap());
        for (n, pn) in fock_populations(&coh).unwrap().iter().enumerate() {
            assert!((pn - poisson(1.0, n)).abs() < 1e-8);
        }

        let th = thermal_state(mode(30), 0.5).unwrap();
        let pops = fock_populations(&State::Mixed(th.clone())).unwrap();
        for n in 0..=30 {
            assert!((pops[n] - th.population(n)).abs() < 1e-15);
        }
    }

    #[test]
    fn fidelity_examples() {
        let m = mode(30);
        let zero = State::Pure(PureState::fock(m, 0).unwrap());
        let one = State::Pure(PureState::fock(m, 1).unwrap());
        let coh = State::Pure(PureState::coherent(m, C64::new(1.0, 0.0)).unwrap());
        assert!((fidelity(&coh, &coh).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!((fidelity(&zero, &coh).unwrap() - (-1.0f64).exp()).abs() < 1e-6);
        // Uhlmann agrees with the pure formula for rank-one inputs.
        let a = State::Mixed(coh.to_mixed());
        let b = State::Mixed(zero.to_mixed());
        assert!((fidelity(&a, &b).unwrap() - (-1.0f64).exp()).abs() < 1e-6);
        let other = State::Pure(PureState::fock(mode(3), 0).unwrap());
        assert!(fidelity(&zero, &other).is_err());
    }

    #[test]
    fn mixed_state_validation() {
        let s = SpaceDescriptor::single(mode(1));
        let bad_trace = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(0.5, 0.0), C64::new(0.4, 0.0)]));
        assert!(MixedState::new(bad_trace, s.clone()).is_err());
        let negative = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!(MixedState::new(negative, s.clone()).is_err());
        let mut non_herm = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0)]));
        non_herm[(0, 1)] = C64::new(0.1, 0.0);
        assert!(MixedState::new(non_herm, s).is_err());
    }

    #[test]
    fn partial_traces() {
        let g = PureState::level(InternalSpace::TwoLevel, Level::E).unwrap();
        let coh = PureState::coherent(mode(10), C64::new(0.3, 0.1)).unwrap();
        let st = State::Pure(g.tensor(&coh).unwrap());
        let m = st.reduced_mode().unwrap();
        assert!((fidelity(&State::Mixed(m), &State::Pure(coh)).unwrap() - 1.0).abs() < 1e-12);
        let i = st.reduced_internal().unwrap();
        assert!((i.population(1) - 1.0).abs() < 1e-12);
    }
}
