//! Propagation under constant and time-dependent Hamiltonians, π-pulse
//! durations and Rabi scans.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hamiltonians::{selective_hamiltonian, RamanParams, Selector};
use crate::linalg;
use crate::operator::Operator;
use crate::space::{InternalSpace, Level, SpaceDescriptor};
use crate::state::{MixedState, PureState, State};
use crate::C64;

/// Relative Hermiticity tolerance accepted by the propagators.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A Hamiltonian that depends explicitly on time.
pub trait TimeDependentHamiltonian {
    fn space(&self) -> &SpaceDescriptor;

    fn operator_at(&self, t: f64) -> Operator;

    /// `out = H(t) x` for a block of column vectors.
    fn apply(&self, t: f64, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        out.copy_from(&(self.operator_at(t).matrix() * x));
    }
}

/// Adapter turning a closure `t -> H(t)` into a [`TimeDependentHamiltonian`].
pub struct FnHamiltonian<F> {
    space: SpaceDescriptor,
    builder: F,
}

impl<F: Fn(f64) -> Operator> FnHamiltonian<F> {
    pub fn new(space: SpaceDescriptor, builder: F) -> Self {
        FnHamiltonian { space, builder }
    }
}

impl<F: Fn(f64) -> Operator> TimeDependentHamiltonian for FnHamiltonian<F> {
    fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    fn operator_at(&self, t: f64) -> Operator {
        (self.builder)(t)
    }
}

/// Constant Hamiltonian acting as a time-dependent one.
impl TimeDependentHamiltonian for Operator {
    fn space(&self) -> &SpaceDescriptor {
        Operator::space(self)
    }

    fn operator_at(&self, _t: f64) -> Operator {
        self.clone()
    }

    fn apply(&self, _t: f64, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        out.copy_from(&(self.matrix() * x));
    }
}

fn check_hermitian(h: &Operator) -> Result<()> {
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * h.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitian(defect));
    }
    Ok(())
}

/// Spectral decomposition of a constant Hamiltonian, reusable for any time.
#[derive(Clone, Debug)]
pub struct Propagator {
    energies: DVector<f64>,
    vectors: DMatrix<C64>,
    space: SpaceDescriptor,
}

impl Propagator {
    pub fn new(h: &Operator) -> Result<Self> {
        check_hermitian(h)?;
        let (energies, vectors) = linalg::eigh(h.matrix());
        Ok(Propagator { energies, vectors, space: h.space().clone() })
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    /// `exp(-i H t)`.
    pub fn unitary(&self, t: f64) -> Operator {
        Operator::from_parts(linalg::unitary_from_eigen(&self.energies, &self.vectors, t), self.space.clone())
    }

    pub(crate) fn evolve_vector(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut c = self.vectors.adjoint() * psi;
        for (k, ck) in c.iter_mut().enumerate() {
            *ck *= C64::from_polar(1.0, -self.energies[k] * t);
        }
        &self.vectors * c
    }

    /// Applies `exp(-i H t)` without renormalising the result.
    pub fn evolve(&self, state: &State, t: f64) -> Result<State> {
        if state.space() != &self.space {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), found: state.dim() });
        }
        Ok(match state {
            State::Pure(s) => State::Pure(PureState::from_parts(self.evolve_vector(s.amplitudes(), t), self.space.clone())),
            State::Mixed(r) => {
                let u = linalg::unitary_from_eigen(&self.energies, &self.vectors, t);
                State::Mixed(MixedState::from_parts(&u * r.matrix() * u.adjoint(), self.space.clone()))
            }
        })
    }
}

/// `exp(-i H t)` applied to `state`.
pub fn propagate_const(h: &Operator, t: f64, state: &State) -> Result<State> {
    Propagator::new(h)?.evolve(state, t)
}

/// Bookkeeping from one call of [`propagate_timedep_with_stats`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    /// `|‖ψ(t1)‖ - ‖ψ(t0)‖|`, or the trace change for mixed states.
    pub norm_drift: f64,
}

const MAX_STEPS: usize = 50_000_000;
const TAYLOR_TERMS: usize = 60;
const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Fourth-order Magnus integrator. Each step exponentiates
/// `Ω = -i h/2 (H1 + H2) + √3 h²/12 [H1, H2]` with `H1,2` sampled at the
/// two Gauss-Legendre nodes, through a Taylor series summed to round-off,
/// so every accepted step is unitary to machine precision.
struct Magnus<'a, H: ?Sized> {
    hamiltonian: &'a H,
    h1x: DMatrix<C64>,
    h2x: DMatrix<C64>,
    h12x: DMatrix<C64>,
    h21x: DMatrix<C64>,
}

impl<'a, H: TimeDependentHamiltonian + ?Sized> Magnus<'a, H> {
    fn new(hamiltonian: &'a H, rows: usize, cols: usize) -> Self {
        let z = DMatrix::zeros(rows, cols);
        Magnus { hamiltonian, h1x: z.clone(), h2x: z.clone(), h12x: z.clone(), h21x: z }
    }

    fn omega(&mut self, t1: f64, t2: f64, h: f64, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        self.hamiltonian.apply(t1, x, &mut self.h1x);
        self.hamiltonian.apply(t2, x, &mut self.h2x);
        self.hamiltonian.apply(t1, &self.h2x, &mut self.h12x);
        self.hamiltonian.apply(t2, &self.h1x, &mut self.h21x);
        let a = C64::new(0.0, -h / 2.0);
        let b = C64::new(SQRT3 * h * h / 12.0, 0.0);
        for (k, o) in out.iter_mut().enumerate() {
            *o = a * (self.h1x[k] + self.h2x[k]) + b * (self.h12x[k] - self.h21x[k]);
        }
    }

    fn step(&mut self, t: f64, h: f64, x: &DMatrix<C64>) -> Option<DMatrix<C64>> {
        let t1 = t + h * (0.5 - SQRT3 / 6.0);
        let t2 = t + h * (0.5 + SQRT3 / 6.0);
        let scale = linalg_max(x).max(f64::MIN_POSITIVE);
        let mut sum = x.clone();
        let mut term = x.clone();
        let mut next = DMatrix::zeros(x.nrows(), x.ncols());
        for k in 1..=TAYLOR_TERMS {
            self.omega(t1, t2, h, &term, &mut next);
            next /= C64::new(k as f64, 0.0);
            std::mem::swap(&mut term, &mut next);
            sum += &term;
            if linalg_max(&term) <= 1e-17 * scale {
                return Some(sum);
            }
        }
        None
    }
}

fn linalg_max(m: &DMatrix<C64>) -> f64 {
    linalg::max_abs(m)
}

/// Integrates `i dX/dt = H(t) X` for a block of columns. The local error is
/// held below `tol · h / |t1 - t0|`, so errors summed over the whole interval
/// stay of order `tol`.
fn integrate_block<H: TimeDependentHamiltonian + ?Sized>(
    hamiltonian: &H,
    t0: f64,
    t1: f64,
    mut x: DMatrix<C64>,
    tol: f64,
) -> Result<(DMatrix<C64>, IntegrationStats)> {
    let span = t1 - t0;
    let mut stats = IntegrationStats::default();
    if span == 0.0 || x.ncols() == 0 {
        return Ok((x, stats));
    }
    let dir = span.signum();
    let total = span.abs();
    let scale = hamiltonian.operator_at(t0).matrix().norm().max(f64::MIN_POSITIVE);
    let mut h = total.min(0.1 / scale);
    let mut t = t0;
    let mut magnus = Magnus::new(hamiltonian, x.nrows(), x.ncols());
    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= total * 1e-15 {
            break;
        }
        h = h.min(remaining);
        if h < total * 1e-14 || stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::StepFailure { t, h });
        }
        let signed = h * dir;
        let trial = magnus.step(t, signed, &x).and_then(|full| {
            let mid = magnus.step(t, signed / 2.0, &x)?;
            let half = magnus.step(t + signed / 2.0, signed / 2.0, &mid)?;
            Some((full, half))
        });
        let Some((full, half)) = trial else {
            stats.rejected += 1;
            h *= 0.25;
            continue;
        };
        let err = linalg_max(&(&half - &full)) / 15.0;
        let allowed = tol * h / total;
        if err <= allowed {
            x = half;
            t += signed;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 4.0 } else { (0.9 * (allowed / err).powf(0.25)).clamp(0.2, 4.0) };
        h *= factor;
    }
    Ok((x, stats))
}

/// Evolves `state` from `t0` to `t1` under a time-dependent Hamiltonian.
pub fn propagate_timedep<H: TimeDependentHamiltonian + ?Sized>(
    hamiltonian: &H,
    t0: f64,
    t1: f64,
    state: &State,
    tol: f64,
) -> Result<State> {
    propagate_timedep_with_stats(hamiltonian, t0, t1, state, tol).map(|(s, _)| s)
}

pub fn propagate_timedep_with_stats<H: TimeDependentHamiltonian + ?Sized>(
    hamiltonian: &H,
    t0: f64,
    t1: f64,
    state: &State,
    tol: f64,
) -> Result<(State, IntegrationStats)> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("must be positive, got {tol}") });
    }
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidParameter { name: "t1", reason: "times must be finite".into() });
    }
    let space = hamiltonian.space().clone();
    if state.space() != &space {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: state.dim() });
    }
    check_hermitian(&hamiltonian.operator_at(t0))?;
    check_hermitian(&hamiltonian.operator_at(t1))?;

    match state {
        State::Pure(s) => {
            let x = DMatrix::from_column_slice(s.dim(), 1, s.amplitudes().as_slice());
            let (x, mut stats) = integrate_block(hamiltonian, t0, t1, x, tol)?;
            let psi = DVector::from_column_slice(x.as_slice());
            stats.norm_drift = (psi.norm() - s.norm()).abs();
            Ok((State::Pure(PureState::from_parts(psi, space)), stats))
        }
        State::Mixed(r) => {
            // rho = W W^dagger with the columns of W the weighted eigenvectors.
            let (values, vectors) = linalg::eigh(r.matrix());
            let keep: Vec<usize> = (0..values.len()).filter(|&k| values[k] > 1e-16).collect();
            let mut w = DMatrix::zeros(r.dim(), keep.len());
            for (c, &k) in keep.iter().enumerate() {
                w.set_column(c, &(vectors.column(k) * C64::new(values[k].sqrt(), 0.0)));
            }
            let (w, mut stats) = integrate_block(hamiltonian, t0, t1, w, tol)?;
            let rho = &w * w.adjoint();
            stats.norm_drift = (linalg::trace(&rho).re - r.trace()).abs();
            // from_parts rescales to unit trace; drift is reported above.
            Ok((State::Mixed(MixedState::from_parts(rho, space)), stats))
        }
    }
}

/// π-pulse durations for a selected doublet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiTime {
    /// First complete transfer under [`selective_hamiltonian`]: `π / (2 |Ω_eff| √m)`.
    pub derived: f64,
    /// Pulse-area convention `|Ω_eff| t √m = π`, twice the derived value.
    pub paper: f64,
    /// First transfer maximum located numerically, when requested.
    pub refined: Option<f64>,
}

/// π-time of `sel`, where `m` is the larger Fock index of the doublet.
pub fn pi_time(p: &RamanParams, sel: Selector, refine: bool) -> Result<PiTime> {
    sel.validate()?;
    let coupling = p.omega_eff().abs() * (sel.top() as f64).sqrt();
    if !(coupling > 0.0) || !coupling.is_finite() {
        return Err(Error::InvalidParameter { name: "omega_eff", reason: "effective coupling must be non-zero".into() });
    }
    let derived = PI / (2.0 * coupling);
    let refined = if refine { Some(refine_first_transfer(p, sel, derived)?) } else { None };
    Ok(PiTime { derived, paper: 2.0 * derived, refined })
}

/// Locates the first maximum of the `|g,n0> -> |e,partner>` transfer by a
/// coarse scan followed by bisection on the sign of the analytic derivative.
fn refine_first_transfer(p: &RamanParams, sel: Selector, guess: f64) -> Result<f64> {
    let space = SpaceDescriptor::ion_mode(InternalSpace::TwoLevel, sel.top() + 1)?;
    let h = selective_hamiltonian(p, sel, &space)?;
    let prop = Propagator::new(&h)?;
    let from = space.basis_index(&[Level::G], sel.n0)?;
    let to = space.basis_index(&[Level::E], sel.partner())?;
    let v = &prop.vectors;
    let e = &prop.energies;
    // A(t) = Σ_k V[to,k] e^{-i E_k t} V[from,k]^*, P = |A|^2, dP/dt = 2 Re(A^* A').
    let weights: Vec<C64> = (0..e.len()).map(|k| v[(to, k)] * v[(from, k)].conj()).collect();
    let slope = |t: f64| {
        let mut a = C64::new(0.0, 0.0);
        let mut da = C64::new(0.0, 0.0);
        for (k, w) in weights.iter().enumerate() {
            let z = w * C64::from_polar(1.0, -e[k] * t);
            a += z;
            da += z * C64::new(0.0, -e[k]);
        }
        2.0 * (a.conj() * da).re
    };
    let samples = 64;
    let dt = 2.0 * guess / samples as f64;
    let mut lo = None;
    for i in 1..=samples {
        let (ta, tb) = ((i - 1) as f64 * dt, i as f64 * dt);
        if slope(ta) > 0.0 && slope(tb) <= 0.0 {
            lo = Some((ta, tb));
            break;
        }
    }
    let (mut a, mut b) = lo.ok_or_else(|| Error::InvalidState("no transfer maximum within two π-times".into()))?;
    for _ in 0..200 {
        if b - a <= 1e-12_f64.min(1e-15 * b) {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if slope(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Populations of watched basis states along a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// One row per time, one column per watched state.
    pub populations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.populations.iter().map(|row| row[k]).collect()
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter { name: "times", reason: "must be finite and strictly increasing".into() });
    }
    Ok(())
}

fn check_watch(space: &SpaceDescriptor, watch: &[usize]) -> Result<Vec<String>> {
    watch
        .iter()
        .map(|&i| {
            if i >= space.dim() {
                Err(Error::IndexOutOfRange { index: i, len: space.dim() })
            } else {
                Ok(space.label(i))
            }
        })
        .collect()
}

/// Evolves `state0` (given at `t = 0`) under constant `h` and records the
/// populations of the composite basis states in `watch` at each time.
pub fn rabi_scan(h: &Operator, state0: &State, times: &[f64], watch: &[usize]) -> Result<Trace> {
    check_times(times)?;
    let labels = check_watch(h.space(), watch)?;
    let prop = Propagator::new(h)?;
    let mut populations = Vec::with_capacity(times.len());
    for &t in times {
        let s = prop.evolve(state0, t)?;
        populations.push(watch.iter().map(|&i| s.population(i)).collect());
    }
    Ok(Trace { times: times.to_vec(), labels, populations })
}

/// [`rabi_scan`] for a time-dependent Hamiltonian, integrating from `t = 0`.
pub fn rabi_scan_timedep<H: TimeDependentHamiltonian + ?Sized>(
    hamiltonian: &H,
    state0: &State,
    times: &[f64],
    watch: &[usize],
    tol: f64,
) -> Result<Trace> {
    check_times(times)?;
    let labels = check_watch(hamiltonian.space(), watch)?;
    let mut populations = Vec::with_capacity(times.len());
    let mut state = state0.clone();
    let mut t = 0.0;
    for &tk in times {
        state = propagate_timedep(hamiltonian, t, tk, &state, tol)?;
        t = tk;
        populations.push(watch.iter().map(|&i| state.population(i)).collect());
    }
    Ok(Trace { times: times.to_vec(), labels, populations })
}
