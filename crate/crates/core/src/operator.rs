//! Operators on composite spaces and the standard constructors: ladder
//! operators, atomic transitions, tensor products and displacements.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::space::{InternalSpace, Level, ModeSpace, SpaceDescriptor};
use crate::C64;

/// Allowed loss of the displaced vacuum outside the truncated space.
pub const DISPLACEMENT_TOLERANCE: f64 = 1e-6;

/// A square complex matrix tagged with the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
    space: SpaceDescriptor,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>, space: SpaceDescriptor) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: if matrix.nrows() != dim { matrix.nrows() } else { matrix.ncols() },
            });
        }
        Ok(Operator { matrix, space })
    }

    pub(crate) fn from_parts(matrix: DMatrix<C64>, space: SpaceDescriptor) -> Self {
        debug_assert_eq!(matrix.nrows(), space.dim());
        Operator { matrix, space }
    }

    pub fn identity(space: &SpaceDescriptor) -> Self {
        let d = space.dim();
        Operator { matrix: DMatrix::identity(d, d), space: space.clone() }
    }

    pub fn zeros(space: &SpaceDescriptor) -> Self {
        let d = space.dim();
        Operator { matrix: DMatrix::zeros(d, d), space: space.clone() }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Operator { matrix: self.matrix.adjoint(), space: self.space.clone() }
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.matrix)
    }

    /// Hermitian up to `rel_tol` relative to the largest entry.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Operator { matrix: &self.matrix * factor, space: self.space.clone() }
    }

    pub fn kron(&self, other: &Operator) -> Result<Operator> {
        let space = self.space.concat(&other.space)?;
        Ok(Operator { matrix: self.matrix.kronecker(&other.matrix), space })
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(&self.matrix * v)
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(Operator {
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
            space: self.space.clone(),
        })
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(Operator { matrix: self.matrix.component_mul(&other.matrix), space: self.space.clone() })
    }

    pub(crate) fn check_same_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch("operators act on different spaces".into()));
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "adding operators on different spaces");
        Operator { matrix: &self.matrix + &rhs.matrix, space: self.space.clone() }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "subtracting operators on different spaces");
        Operator { matrix: &self.matrix - &rhs.matrix, space: self.space.clone() }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.space, rhs.space, "multiplying operators on different spaces");
        Operator { matrix: &self.matrix * &rhs.matrix, space: self.space.clone() }
    }
}

pub(crate) fn annihilation_matrix(mode: ModeSpace) -> DMatrix<C64> {
    let d = mode.dim();
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub(crate) fn number_matrix(mode: ModeSpace) -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_fn(mode.dim(), |n, _| C64::new(n as f64, 0.0)))
}

/// Truncated annihilation and creation operators `(a, a^dagger)`.
pub fn mode_ladder(mode: ModeSpace) -> (Operator, Operator) {
    let space = SpaceDescriptor::single(mode);
    let a = annihilation_matrix(mode);
    let ad = a.adjoint();
    (Operator::from_parts(a, space.clone()), Operator::from_parts(ad, space))
}

pub(crate) fn transition_matrix(space: InternalSpace, lower: Level, upper: Level) -> Result<DMatrix<C64>> {
    let i = space.index_of(lower)?;
    let j = space.index_of(upper)?;
    if i == j {
        return Err(Error::InvalidParameter {
            name: "upper",
            reason: format!("transition needs two distinct levels, got {lower} twice"),
        });
    }
    let mut m = DMatrix::zeros(space.dim(), space.dim());
    m[(i, j)] = C64::new(1.0, 0.0);
    Ok(m)
}

pub(crate) fn projector_matrix(space: InternalSpace, level: Level) -> Result<DMatrix<C64>> {
    let i = space.index_of(level)?;
    let mut m = DMatrix::zeros(space.dim(), space.dim());
    m[(i, i)] = C64::new(1.0, 0.0);
    Ok(m)
}

/// `|lower><upper|` on a single internal space.
pub fn atomic_transition(space: InternalSpace, lower: Level, upper: Level) -> Result<Operator> {
    Ok(Operator::from_parts(transition_matrix(space, lower, upper)?, SpaceDescriptor::single(space)))
}

/// `|level><level|` on a single internal space.
pub fn level_projector(space: InternalSpace, level: Level) -> Result<Operator> {
    Ok(Operator::from_parts(projector_matrix(space, level)?, SpaceDescriptor::single(space)))
}

/// Kronecker product in the given factor order.
pub fn tensor(ops: &[&Operator]) -> Result<Operator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::InvalidLayout("tensor of an empty list".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, op| acc.kron(op))
}

/// Lift per-factor matrices to the full space; `None` means identity.
pub(crate) fn embed(space: &SpaceDescriptor, locals: &[Option<&DMatrix<C64>>]) -> DMatrix<C64> {
    debug_assert_eq!(locals.len(), space.factors().len());
    let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for (f, local) in space.factors().iter().zip(locals) {
        out = match local {
            Some(m) => out.kronecker(*m),
            None => out.kronecker(&DMatrix::<C64>::identity(f.dim(), f.dim())),
        };
    }
    out
}

/// Lift an internal-space operator acting on factor `factor` to `space`.
pub fn embed_internal(op: &Operator, factor: usize, space: &SpaceDescriptor) -> Result<Operator> {
    let internal = space.internal(factor)?;
    if op.space() != &SpaceDescriptor::single(internal) {
        return Err(Error::SpaceMismatch(format!(
            "operator does not act on the {internal} space of factor {factor}"
        )));
    }
    let mut locals: Vec<Option<&DMatrix<C64>>> = vec![None; space.factors().len()];
    locals[factor] = Some(op.matrix());
    Ok(Operator::from_parts(embed(space, &locals), space.clone()))
}

/// Lift a mode operator to the mode factor of `space`.
pub fn embed_mode(op: &Operator, space: &SpaceDescriptor) -> Result<Operator> {
    let mode = space.require_mode()?;
    if op.space() != &SpaceDescriptor::single(mode) {
        return Err(Error::SpaceMismatch("operator does not act on the mode of the space".into()));
    }
    let mut locals: Vec<Option<&DMatrix<C64>>> = vec![None; space.factors().len()];
    *locals.last_mut().expect("non-empty") = Some(op.matrix());
    Ok(Operator::from_parts(embed(space, &locals), space.clone()))
}

/// Probability weight of the exact coherent state `|alpha>` above `cutoff`.
pub fn coherent_tail(alpha: C64, cutoff: usize) -> f64 {
    let x = alpha.norm_sqr();
    let mut term = (-x).exp();
    let mut kept = term;
    for n in 1..=cutoff {
        term *= x / n as f64;
        kept += term;
    }
    (1.0 - kept).max(0.0)
}

/// Displacement `D(alpha) = exp(alpha a^dagger - alpha^* a)` on the truncated mode.
///
/// The truncated generator is exponentiated exactly through its Hermitian
/// eigendecomposition. The result is rejected with [`Error::Truncation`] when
/// the displaced vacuum either loses more than [`DISPLACEMENT_TOLERANCE`] of
/// its weight above the cutoff or deviates from the exact coherent amplitudes
/// by more than that amount.
pub fn displacement(mode: ModeSpace, alpha: C64) -> Result<Operator> {
    let space = SpaceDescriptor::single(mode);
    if alpha == C64::new(0.0, 0.0) {
        return Ok(Operator::identity(&space));
    }
    let a = annihilation_matrix(mode);
    let generator = a.adjoint() * alpha - &a * alpha.conj();
    // D = exp(G) = exp(-i K) with K = i G Hermitian.
    let k = generator * C64::i();
    let (values, vectors) = linalg::eigh(&k);
    let d = linalg::unitary_from_eigen(&values, &vectors, 1.0);

    let tail = coherent_tail(alpha, mode.cutoff());
    let exact = crate::state::coherent_amplitudes(alpha, mode.cutoff());
    let deviation = (d.column(0) - exact).norm_squared();
    let error = tail.max(deviation);
    if error > DISPLACEMENT_TOLERANCE {
        return Err(Error::Truncation { error, tolerance: DISPLACEMENT_TOLERANCE });
    }
    Ok(Operator::from_parts(d, space))
}

/// Photon-number parity `(-1)^{a^dagger a}`.
pub fn parity(mode: ModeSpace) -> Operator {
    let diag = DVector::from_fn(mode.dim(), |n, _| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
    Operator::from_parts(DMatrix::from_diagonal(&diag), SpaceDescriptor::single(mode))
}
