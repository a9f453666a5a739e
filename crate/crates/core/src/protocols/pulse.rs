use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::evolution::{pi_time, Propagator};
use crate::hamiltonians::{selective_hamiltonian, two_ion_selective, RamanParams, Selector};
use crate::space::{Factor, InternalSpace, Level, SpaceDescriptor};
use crate::state::{MixedState, PureState, State};
use crate::C64;

use super::Execution;

#[derive(Clone, Debug)]
enum Dynamics {
    /// Exact rotation inside each selected doublet, identity elsewhere.
    Ideal { pairs: Vec<(usize, usize)>, coupling: C64 },
    /// Full selective Hamiltonian, viewed in the frame that rotates with its diagonal.
    Effective { propagator: Propagator, diagonal: DVector<f64> },
}

/// A selective pulse on one ion of a register, ready to be applied repeatedly.
///
/// Pulse areas are in units of π: `1.0` is a π-pulse, `2.0` a 2π-pulse.
#[derive(Clone, Debug)]
pub struct SelectivePulse {
    selector: Selector,
    ion: usize,
    space: SpaceDescriptor,
    pi_time: f64,
    dynamics: Dynamics,
}

impl SelectivePulse {
    pub fn new(p: &RamanParams, selector: Selector, ion: usize, space: &SpaceDescriptor, exec: Execution) -> Result<Self> {
        let mode = space.require_mode()?;
        let ions = space.factors().len() - 1;
        if ion >= ions {
            return Err(Error::IndexOutOfRange { index: ion, len: ions });
        }
        if space.factors()[..ions].iter().any(|f| *f != Factor::Internal(InternalSpace::TwoLevel)) {
            return Err(Error::SpaceMismatch("selective pulses act on two-level ions".into()));
        }
        selector.check_mode(mode)?;
        let pi = pi_time(p, selector, false)?.derived;
        let dynamics = match exec {
            Execution::Ideal => {
                let g = InternalSpace::TwoLevel.index_of(Level::G)?;
                let e = InternalSpace::TwoLevel.index_of(Level::E)?;
                let mut pairs = Vec::new();
                for i in 0..space.dim() {
                    let mut digits = space.digits(i);
                    if digits[ion] == g && digits[ions] == selector.n0 {
                        digits[ion] = e;
                        digits[ions] = selector.partner();
                        pairs.push((i, space.index(&digits)?));
                    }
                }
                let coupling = C64::new(0.0, p.omega_eff() * (selector.top() as f64).sqrt());
                Dynamics::Ideal { pairs, coupling }
            }
            Execution::Effective => {
                let h = match ions {
                    1 => selective_hamiltonian(p, selector, space)?,
                    2 => two_ion_selective(p, ion, selector, space)?,
                    _ => return Err(Error::SpaceMismatch("at most two ions are supported".into())),
                };
                let diagonal = h.matrix().diagonal().map(|z| z.re);
                Dynamics::Effective { propagator: Propagator::new(&h)?, diagonal }
            }
        };
        Ok(SelectivePulse { selector, ion, space: space.clone(), pi_time: pi, dynamics })
    }

    pub fn selector(&self) -> Selector {
        self.selector
    }

    pub fn ion(&self) -> usize {
        self.ion
    }

    pub fn pi_time(&self) -> f64 {
        self.pi_time
    }

    pub fn duration(&self, area: f64) -> f64 {
        area.abs() * self.pi_time
    }

    /// The pulse propagator on the full space.
    pub fn unitary(&self, area: f64, inverse: bool) -> DMatrix<C64> {
        let d = self.space.dim();
        let mut u = DMatrix::identity(d, d);
        for c in 0..d {
            let col = self.apply_vector(&u.column(c).into_owned(), area, inverse);
            u.set_column(c, &col);
        }
        u
    }

    /// Entries `(U_gg, U_eg)` of the ideal doublet rotation; `U_ee = U_gg`
    /// and `U_ge = U_eg` with the coupling phase conjugated.
    fn ideal_rotation(coupling: C64, area: f64, inverse: bool) -> (f64, C64) {
        // exp(-i θ (c |e><g| + c* |g><e|) / |c|) with θ = area π / 2
        let theta = area * std::f64::consts::FRAC_PI_2 * if inverse { -1.0 } else { 1.0 };
        (theta.cos(), C64::new(0.0, -theta.sin()) * coupling / coupling.norm())
    }

    fn apply_vector(&self, psi: &DVector<C64>, area: f64, inverse: bool) -> DVector<C64> {
        let t = self.duration(area);
        match &self.dynamics {
            Dynamics::Ideal { pairs, coupling } => {
                let (cos, off) = Self::ideal_rotation(*coupling, area, inverse);
                let off_up = -off.conj();
                let mut out = psi.clone();
                for &(g, e) in pairs {
                    let (a, b) = (psi[g], psi[e]);
                    out[g] = a * cos + off_up * b;
                    out[e] = b * cos + off * a;
                }
                out
            }
            Dynamics::Effective { propagator, diagonal } => {
                let frame = |v: &mut DVector<C64>, sign: f64| {
                    for (k, z) in v.iter_mut().enumerate() {
                        *z *= C64::from_polar(1.0, sign * diagonal[k] * t);
                    }
                };
                if inverse {
                    let mut v = psi.clone();
                    frame(&mut v, -1.0);
                    propagator.evolve_vector(&v, -t)
                } else {
                    let mut v = propagator.evolve_vector(psi, t);
                    frame(&mut v, 1.0);
                    v
                }
            }
        }
    }

    fn apply_matrix(&self, rho: &DMatrix<C64>, area: f64, inverse: bool) -> DMatrix<C64> {
        match &self.dynamics {
            Dynamics::Ideal { pairs, coupling } => {
                let (cos, off) = Self::ideal_rotation(*coupling, area, inverse);
                let off_up = -off.conj();
                let d = rho.nrows();
                let mut m = rho.clone();
                // U rho
                for c in 0..d {
                    for &(g, e) in pairs {
                        let (a, b) = (m[(g, c)], m[(e, c)]);
                        m[(g, c)] = a * cos + off_up * b;
                        m[(e, c)] = b * cos + off * a;
                    }
                }
                // (U rho) U^dagger
                for r in 0..d {
                    for &(g, e) in pairs {
                        let (a, b) = (m[(r, g)], m[(r, e)]);
                        m[(r, g)] = a * cos + off_up.conj() * b;
                        m[(r, e)] = b * cos + off.conj() * a;
                    }
                }
                m
            }
            Dynamics::Effective { .. } => {
                let u = self.unitary(area, inverse);
                &u * rho * u.adjoint()
            }
        }
    }

    /// Applies the pulse (or its inverse) to `state`.
    pub fn apply(&self, state: &State, area: f64, inverse: bool) -> Result<State> {
        if state.space() != &self.space {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), found: state.dim() });
        }
        Ok(match state {
            State::Pure(s) => {
                State::Pure(PureState::from_parts(self.apply_vector(s.amplitudes(), area, inverse), self.space.clone()))
            }
            State::Mixed(r) => {
                State::Mixed(MixedState::from_parts(self.apply_matrix(r.matrix(), area, inverse), self.space.clone()))
            }
        })
    }
}

/// Flips `|e>` to `|g>` (and back) on ion `ion` without touching the mode.
pub(crate) fn flip_internal(state: &State, ion: usize) -> Result<State> {
    let space = state.space().clone();
    let internal = space.internal(ion)?;
    if internal != InternalSpace::TwoLevel {
        return Err(Error::SpaceMismatch("flip needs a two-level ion".into()));
    }
    let perm: Vec<usize> = (0..space.dim())
        .map(|i| {
            let mut d = space.digits(i);
            d[ion] = 1 - d[ion];
            space.index(&d)
        })
        .collect::<Result<_>>()?;
    Ok(match state {
        State::Pure(s) => {
            let v = DVector::from_fn(space.dim(), |i, _| s.amplitude(perm[i]));
            State::Pure(PureState::from_parts(v, space))
        }
        State::Mixed(r) => {
            let m = DMatrix::from_fn(space.dim(), space.dim(), |i, j| r.matrix()[(perm[i], perm[j])]);
            State::Mixed(MixedState::from_parts(m, space))
        }
    })
}
