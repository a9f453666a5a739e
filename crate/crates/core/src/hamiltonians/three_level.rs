//! The time-dependent three-level Raman model before adiabatic elimination.
//!
//! The Hamiltonian is written in the interaction picture of
//! `ν a^†a + ω_e |e><e| + ω_c |c><c|` after the optical rotating-wave
//! approximation. The standing wave on `g <-> c` contributes
//! `2 g1 cos(η1 x(t))` with `x(t) = a e^{-iνt} + a^† e^{iνt}`, expanded to
//! second order in `η1`; the travelling wave on `e <-> c` contributes
//! `g2 e^{-iη2 x(t)}`, expanded to first order in `η2`.

use nalgebra::{DMatrix, DVector};

use super::RamanParams;
use crate::error::{Error, Result};
use crate::evolution::TimeDependentHamiltonian;
use crate::operator::{annihilation_matrix, embed, transition_matrix, Operator};
use crate::space::{Factor, InternalSpace, Level, ModeSpace, SpaceDescriptor};
use crate::state::PureState;
use crate::C64;

#[derive(Clone, Debug)]
struct HarmonicTerm {
    frequency: f64,
    entries: Vec<(usize, usize, C64)>,
}

/// `H(t) = Σ_k (e^{i ω_k t} M_k + h.c.)` with sparse `M_k`.
#[derive(Clone, Debug)]
pub struct HarmonicHamiltonian {
    space: SpaceDescriptor,
    terms: Vec<HarmonicTerm>,
}

impl HarmonicHamiltonian {
    pub fn new(space: SpaceDescriptor) -> Self {
        HarmonicHamiltonian { space, terms: Vec::new() }
    }

    /// Adds `e^{i ω t} M + h.c.`.
    pub fn add_term(&mut self, frequency: f64, matrix: &DMatrix<C64>) -> Result<()> {
        let d = self.space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        let mut entries = Vec::new();
        for j in 0..d {
            for i in 0..d {
                let v = matrix[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    entries.push((i, j, v));
                }
            }
        }
        if !entries.is_empty() {
            self.terms.push(HarmonicTerm { frequency, entries });
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.frequency).collect()
    }

    pub fn nonzeros(&self) -> usize {
        self.terms.iter().map(|t| 2 * t.entries.len()).sum()
    }

    /// Sum of `e^{-i ω_k t} / ω_k · M_k^† ψ`: the slaved amplitude that a
    /// far-detuned level acquires when `ψ` varies slowly.
    fn slaved_response(&self, t: f64, psi: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(psi.len());
        for term in &self.terms {
            let w = C64::from_polar(1.0, -term.frequency * t) / term.frequency;
            for &(i, j, v) in &term.entries {
                out[j] += w * v.conj() * psi[i];
            }
        }
        out
    }
}

impl TimeDependentHamiltonian for HarmonicHamiltonian {
    fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    fn operator_at(&self, t: f64) -> Operator {
        let d = self.space.dim();
        let mut m = DMatrix::zeros(d, d);
        for term in &self.terms {
            let phase = C64::from_polar(1.0, term.frequency * t);
            for &(i, j, v) in &term.entries {
                let z = phase * v;
                m[(i, j)] += z;
                m[(j, i)] += z.conj();
            }
        }
        Operator::from_parts(m, self.space.clone())
    }

    fn apply(&self, t: f64, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        out.fill(C64::new(0.0, 0.0));
        let cols = x.ncols();
        for term in &self.terms {
            let phase = C64::from_polar(1.0, term.frequency * t);
            for &(i, j, v) in &term.entries {
                let z = phase * v;
                let zc = z.conj();
                for c in 0..cols {
                    out[(i, c)] += z * x[(j, c)];
                    out[(j, c)] += zc * x[(i, c)];
                }
            }
        }
    }
}

/// Three-level ion in the Raman configuration, coupled to one mode.
#[derive(Clone, Debug)]
pub struct ThreeLevelRaman {
    params: RamanParams,
    mode: ModeSpace,
    hamiltonian: HarmonicHamiltonian,
}

impl ThreeLevelRaman {
    pub fn new(p: &RamanParams, space: &SpaceDescriptor) -> Result<Self> {
        let mode = match space.factors() {
            [Factor::Internal(InternalSpace::ThreeLevel), Factor::Mode(m)] => *m,
            _ => return Err(Error::SpaceMismatch("expected a three-level ion coupled to one mode".into())),
        };
        let omega_e = p.omega_e.ok_or(Error::MissingField("omega_e"))?;
        let omega_c = p.omega_c.ok_or(Error::MissingField("omega_c"))?;
        let omega1 = p.omega1.ok_or(Error::MissingField("omega1"))?;
        let omega2 = p.omega2.ok_or(Error::MissingField("omega2"))?;

        let d = mode.dim();
        let a = annihilation_matrix(mode);
        let ad = a.adjoint();
        let id = DMatrix::<C64>::identity(d, d);
        let two_n_plus_one = DMatrix::from_diagonal(&DVector::from_fn(d, |n, _| C64::new((2 * n + 1) as f64, 0.0)));
        let gc = transition_matrix(InternalSpace::ThreeLevel, Level::G, Level::C)?;
        let ec = transition_matrix(InternalSpace::ThreeLevel, Level::E, Level::C)?;
        let lift = |internal: &DMatrix<C64>, motional: &DMatrix<C64>| embed(space, &[Some(internal), Some(motional)]);

        let re = |x: f64| C64::new(x, 0.0);
        let det_gc = omega1 - omega_c;
        let det_ec = omega2 + omega_e - omega_c;
        let (g1, g2, eta1, eta2, nu) = (p.g1, p.g2, p.eta1, p.eta2, p.nu);

        let mut h = HarmonicHamiltonian::new(space.clone());
        // 2 g1 cos(η1 x) |g><c|, with x^2 -> a^2 e^{-2iνt} + a^†2 e^{2iνt} + (2n + 1).
        h.add_term(det_gc, &lift(&gc, &((&id - &two_n_plus_one * re(eta1 * eta1 / 2.0)) * re(2.0 * g1))))?;
        h.add_term(det_gc - 2.0 * nu, &lift(&gc, &(&a * &a * re(-g1 * eta1 * eta1))))?;
        h.add_term(det_gc + 2.0 * nu, &lift(&gc, &(&ad * &ad * re(-g1 * eta1 * eta1))))?;
        // g2 e^{-iη2 x} |e><c|.
        h.add_term(det_ec, &lift(&ec, &(&id * re(g2))))?;
        h.add_term(det_ec - nu, &lift(&ec, &(&a * C64::new(0.0, -g2 * eta2))))?;
        h.add_term(det_ec + nu, &lift(&ec, &(&ad * C64::new(0.0, -g2 * eta2))))?;

        Ok(ThreeLevelRaman { params: *p, mode, hamiltonian: h })
    }

    pub fn params(&self) -> &RamanParams {
        &self.params
    }

    pub fn mode(&self) -> ModeSpace {
        self.mode
    }

    pub fn hamiltonian(&self) -> &HarmonicHamiltonian {
        &self.hamiltonian
    }

    /// Adds the adiabatically slaved `|c>` amplitude to a state living in the
    /// `{g, e}` manifold at time `t`, so the simulation starts on the dressed
    /// state instead of switching the lasers on suddenly.
    pub fn adiabatic_dressing(&self, psi: &PureState, t: f64) -> Result<PureState> {
        let space = self.hamiltonian.space();
        if psi.space() != space {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: psi.dim() });
        }
        let c = InternalSpace::ThreeLevel.index_of(Level::C)?;
        if (0..psi.dim()).any(|i| space.digits(i)[0] == c && psi.amplitude(i).norm() > 0.0) {
            return Err(Error::InvalidState("state to dress already populates |c>".into()));
        }
        let slaved = self.hamiltonian.slaved_response(t, psi.amplitudes());
        PureState::new(psi.amplitudes() + slaved, space.clone())
    }
}

impl TimeDependentHamiltonian for ThreeLevelRaman {
    fn space(&self) -> &SpaceDescriptor {
        self.hamiltonian.space()
    }

    fn operator_at(&self, t: f64) -> Operator {
        self.hamiltonian.operator_at(t)
    }

    fn apply(&self, t: f64, x: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        self.hamiltonian.apply(t, x, out)
    }
}

/// The three-level Hamiltonian at time `t`.
pub fn three_level_hamiltonian(p: &RamanParams, t: f64, space: &SpaceDescriptor) -> Result<Operator> {
    Ok(ThreeLevelRaman::new(p, space)?.operator_at(t))
}
