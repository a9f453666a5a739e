//! Hamiltonian builders for the single-ion Raman scheme.
//!
//! Units: `hbar = 1`, every frequency is an angular frequency in rad/s and
//! every time is in seconds. Internal factors come first in the tensor
//! order and the motional mode last.
//!
//! The effective model couples `|g>` and `|e>` through a blue sideband with
//! strength `omega_eff = 2 eta2 g1 g2 / delta` and dresses `|g>` with the
//! number-dependent light shift `-4 g1^2/delta [1 - eta1^2 (2n + 1)]`. Because
//! that shift grows linearly in `n`, each anti-Jaynes-Cummings doublet
//! `{|g,n>, |e,n+1>}` has its own detuning, and compensating one of them
//! leaves all others detuned by multiples of `8 eta1^2 g1^2 / delta`.

mod params;
mod three_level;

pub use params::{lamb_dicke_parameter, RamanParams, Selector, SubspaceKind};
pub use three_level::{three_level_hamiltonian, HarmonicHamiltonian, ThreeLevelRaman};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{annihilation_matrix, embed, number_matrix, projector_matrix, transition_matrix, Operator};
use crate::space::{Factor, InternalSpace, Level, ModeSpace, SpaceDescriptor};
use crate::C64;

/// One term `internal ⊗ mode` of an ion-mode Hamiltonian.
#[derive(Clone, Debug)]
pub(crate) struct IonModeTerm {
    pub internal: DMatrix<C64>,
    pub mode: DMatrix<C64>,
}

/// Sum of product terms acting on one ion and the shared mode.
#[derive(Clone, Debug, Default)]
pub(crate) struct IonModeTerms(pub Vec<IonModeTerm>);

impl IonModeTerms {
    fn push(&mut self, internal: DMatrix<C64>, mode: DMatrix<C64>) {
        self.0.push(IonModeTerm { internal, mode });
    }

    /// Assemble on `space`, placing the internal part on factor `ion` and the
    /// identity on every other internal factor.
    pub fn assemble(&self, space: &SpaceDescriptor, ion: usize) -> Operator {
        let n = space.factors().len();
        let mut total = DMatrix::zeros(space.dim(), space.dim());
        for term in &self.0 {
            let mut locals: Vec<Option<&DMatrix<C64>>> = vec![None; n];
            locals[ion] = Some(&term.internal);
            locals[n - 1] = Some(&term.mode);
            total += embed(space, &locals);
        }
        Operator::from_parts(total, space.clone())
    }
}

/// Checks `space` is `TwoLevel ⊗ Mode` and returns the mode.
fn two_level_mode(space: &SpaceDescriptor) -> Result<ModeSpace> {
    match space.factors() {
        [Factor::Internal(InternalSpace::TwoLevel), Factor::Mode(m)] => Ok(*m),
        _ => Err(Error::SpaceMismatch("expected a two-level ion coupled to one mode".into())),
    }
}

fn sigma_plus() -> DMatrix<C64> {
    transition_matrix(InternalSpace::TwoLevel, Level::E, Level::G).expect("two-level transition")
}

fn sigma_minus() -> DMatrix<C64> {
    transition_matrix(InternalSpace::TwoLevel, Level::G, Level::E).expect("two-level transition")
}

fn proj(level: Level) -> DMatrix<C64> {
    projector_matrix(InternalSpace::TwoLevel, level).expect("two-level projector")
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Resonant Jaynes-Cummings coupling `g (sigma^+ a + sigma a^dagger)`.
pub fn jc_hamiltonian(g: f64, space: &SpaceDescriptor) -> Result<Operator> {
    let mode = two_level_mode(space)?;
    let a = annihilation_matrix(mode);
    let mut terms = IonModeTerms::default();
    terms.push(sigma_plus() * real(g), a.clone());
    terms.push(sigma_minus() * real(g), a.adjoint());
    Ok(terms.assemble(space, 0))
}

/// Anti-Jaynes-Cummings coupling `g (sigma^+ a^dagger + sigma a)`.
pub fn ajc_hamiltonian(g: f64, space: &SpaceDescriptor) -> Result<Operator> {
    let mode = two_level_mode(space)?;
    let a = annihilation_matrix(mode);
    let mut terms = IonModeTerms::default();
    terms.push(sigma_plus() * real(g), a.adjoint());
    terms.push(sigma_minus() * real(g), a);
    Ok(terms.assemble(space, 0))
}

/// Light-shift diagonal of the effective model.
fn stark_terms(p: &RamanParams, mode: ModeSpace) -> IonModeTerms {
    let d = mode.dim();
    let carrier = 4.0 * p.g1 * p.g1 / p.delta;
    let ground = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |n, _| {
        real(-carrier + carrier * p.eta1 * p.eta1 * (2 * n + 1) as f64)
    }));
    let mut terms = IonModeTerms::default();
    terms.push(proj(Level::G), ground);
    terms.push(proj(Level::E), DMatrix::identity(d, d) * real(-p.g2 * p.g2 / p.delta));
    terms
}

/// Blue-sideband (`kind = Ajc`) or red-sideband (`kind = Jc`) coupling with
/// the phase convention of the effective model: `i omega_eff (|e><g| a^dagger - h.c.)`.
fn coupling_terms(p: &RamanParams, kind: SubspaceKind, mode: ModeSpace) -> IonModeTerms {
    let a = annihilation_matrix(mode);
    let w = C64::new(0.0, p.omega_eff());
    let (raise, lower) = match kind {
        SubspaceKind::Ajc => (a.adjoint(), a),
        SubspaceKind::Jc => (a.clone(), a.adjoint()),
    };
    let mut terms = IonModeTerms::default();
    terms.push(sigma_plus() * w, raise);
    terms.push(sigma_minus() * (-w), lower);
    terms
}

/// Effective two-level Hamiltonian obtained after eliminating `|c>`:
///
/// `-4 [g1^2/Δ - η1^2 g1^2/Δ (2 a^† a + 1)] |g><g| - g2^2/Δ |e><e|
///  + i Ω_eff (|e><g| a^† - |g><e| a)`.
pub fn effective_hamiltonian(p: &RamanParams, space: &SpaceDescriptor) -> Result<Operator> {
    let mode = two_level_mode(space)?;
    let mut terms = stark_terms(p, mode);
    terms.0.extend(coupling_terms(p, SubspaceKind::Ajc, mode).0);
    Ok(terms.assemble(space, 0))
}

/// Detuning `E(e) - E(g, n0)` of the doublet whose ground member is `|g, n0>`.
pub fn bare_detuning(p: &RamanParams, n0: usize) -> f64 {
    -4.0 * p.eta1 * p.eta1 * (p.g1 * p.g1 / p.delta) * (2 * n0 + 1) as f64
        + (4.0 * p.g1 * p.g1 / p.delta - p.g2 * p.g2 / p.delta)
}

/// Detuning left on doublet `n` once doublet `n0` has been compensated.
pub fn residual_detuning(p: &RamanParams, n: usize, n0: usize) -> f64 {
    -8.0 * p.eta1 * p.eta1 * (p.g1 * p.g1 / p.delta) * (n as f64 - n0 as f64)
}

/// Selectivity `S = 4 (η1^2 / η2) (g1 / g2)`: neighbouring-doublet detuning in
/// units of the effective coupling.
pub fn selectivity(p: &RamanParams) -> f64 {
    4.0 * (p.eta1 * p.eta1 / p.eta2) * (p.g1 / p.g2)
}

fn selective_terms(p: &RamanParams, sel: Selector, mode: ModeSpace) -> Result<IonModeTerms> {
    sel.check_mode(mode)?;
    let d = mode.dim();
    let mut terms = stark_terms(p, mode);
    terms.push(proj(Level::E), DMatrix::identity(d, d) * real(-bare_detuning(p, sel.n0)));
    terms.0.extend(coupling_terms(p, sel.kind, mode).0);
    Ok(terms)
}

/// Effective Hamiltonian with the `|e>` energy shifted so that the selected
/// doublet is exactly resonant.
///
/// For [`SubspaceKind::Ajc`] the coupling is the blue sideband of
/// [`effective_hamiltonian`]; for [`SubspaceKind::Jc`] it is the mirrored red
/// sideband `i Ω_eff (|e><g| a - |g><e| a^†)` on the same light-shift diagonal.
/// Either way the compensation is `-bare_detuning(p, n0) |e><e|`.
pub fn selective_hamiltonian(p: &RamanParams, sel: Selector, space: &SpaceDescriptor) -> Result<Operator> {
    let mode = two_level_mode(space)?;
    Ok(selective_terms(p, sel, mode)?.assemble(space, 0))
}

/// [`selective_hamiltonian`] acting on ion `target_ion` of a two-ion register,
/// identity on the other ion.
pub fn two_ion_selective(
    p: &RamanParams,
    target_ion: usize,
    sel: Selector,
    space: &SpaceDescriptor,
) -> Result<Operator> {
    let mode = match space.factors() {
        [Factor::Internal(InternalSpace::TwoLevel), Factor::Internal(InternalSpace::TwoLevel), Factor::Mode(m)] => *m,
        _ => return Err(Error::SpaceMismatch("expected two two-level ions and one mode".into())),
    };
    if target_ion > 1 {
        return Err(Error::IndexOutOfRange { index: target_ion, len: 2 });
    }
    Ok(selective_terms(p, sel, mode)?.assemble(space, target_ion))
}

/// Number operator lifted to `space`.
pub fn number_operator(space: &SpaceDescriptor) -> Result<Operator> {
    let mode = space.require_mode()?;
    let n = space.factors().len();
    let num = number_matrix(mode);
    let mut locals: Vec<Option<&DMatrix<C64>>> = vec![None; n];
    locals[n - 1] = Some(&num);
    Ok(Operator::from_parts(embed(space, &locals), space.clone()))
}
