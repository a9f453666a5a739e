//! Hilbert-space descriptors.
//!
//! A composite space is an ordered list of factors: internal (electronic)
//! factors first, then at most one motional mode, always last. A basis state
//! with factor indices `(i1, i2, ..., n)` sits at the row-major position
//! `((i1 * d2 + i2) * ...) * d_mode + n`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Electronic level label. `G` is always index 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    G,
    E,
    C,
}

impl Level {
    pub fn label(self) -> char {
        match self {
            Level::G => 'g',
            Level::E => 'e',
            Level::C => 'c',
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Internal level structure of one ion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InternalSpace {
    /// `{g, e}`
    TwoLevel,
    /// `{g, e, c}`, `c` being the far-detuned auxiliary level of the Raman scheme.
    ThreeLevel,
}

impl InternalSpace {
    pub fn dim(self) -> usize {
        self.levels().len()
    }

    pub fn levels(self) -> &'static [Level] {
        match self {
            InternalSpace::TwoLevel => &[Level::G, Level::E],
            InternalSpace::ThreeLevel => &[Level::G, Level::E, Level::C],
        }
    }

    pub fn index_of(self, level: Level) -> Result<usize> {
        self.levels()
            .iter()
            .position(|&l| l == level)
            .ok_or(Error::UnknownLevel { level, space: self })
    }
}

impl fmt::Display for InternalSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InternalSpace::TwoLevel => write!(f, "two-level"),
            InternalSpace::ThreeLevel => write!(f, "three-level"),
        }
    }
}

/// Truncated harmonic-oscillator space `span{|0>, ..., |cutoff>}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeSpace {
    cutoff: usize,
}

impl ModeSpace {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidParameter {
                name: "cutoff",
                reason: "the mode cutoff must be at least 1".into(),
            });
        }
        Ok(ModeSpace { cutoff })
    }

    /// Highest retained Fock index.
    pub fn cutoff(self) -> usize {
        self.cutoff
    }

    pub fn dim(self) -> usize {
        self.cutoff + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    Internal(InternalSpace),
    Mode(ModeSpace),
}

impl Factor {
    pub fn dim(self) -> usize {
        match self {
            Factor::Internal(s) => s.dim(),
            Factor::Mode(m) => m.dim(),
        }
    }
}

impl From<InternalSpace> for Factor {
    fn from(s: InternalSpace) -> Self {
        Factor::Internal(s)
    }
}

impl From<ModeSpace> for Factor {
    fn from(m: ModeSpace) -> Self {
        Factor::Mode(m)
    }
}

/// Ordered tensor-product layout of a composite space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceDescriptor {
    factors: Vec<Factor>,
}

impl SpaceDescriptor {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidLayout("a space needs at least one factor".into()));
        }
        let modes = factors.iter().filter(|f| matches!(f, Factor::Mode(_))).count();
        if modes > 1 {
            return Err(Error::InvalidLayout("at most one motional mode is supported".into()));
        }
        if modes == 1 && !matches!(factors.last(), Some(Factor::Mode(_))) {
            return Err(Error::InvalidLayout("the motional mode must be the last factor".into()));
        }
        Ok(SpaceDescriptor { factors })
    }

    pub fn single(factor: impl Into<Factor>) -> Self {
        SpaceDescriptor { factors: vec![factor.into()] }
    }

    /// One ion with the given level structure coupled to a mode.
    pub fn ion_mode(internal: InternalSpace, cutoff: usize) -> Result<Self> {
        Self::new(vec![internal.into(), ModeSpace::new(cutoff)?.into()])
    }

    /// Two two-level ions sharing one mode.
    pub fn two_ions_mode(cutoff: usize) -> Result<Self> {
        Self::new(vec![
            InternalSpace::TwoLevel.into(),
            InternalSpace::TwoLevel.into(),
            ModeSpace::new(cutoff)?.into(),
        ])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).product()
    }

    pub fn concat(&self, other: &SpaceDescriptor) -> Result<Self> {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self::new(factors)
    }

    pub fn mode(&self) -> Option<ModeSpace> {
        match self.factors.last() {
            Some(Factor::Mode(m)) => Some(*m),
            _ => None,
        }
    }

    pub fn require_mode(&self) -> Result<ModeSpace> {
        self.mode()
            .ok_or_else(|| Error::SpaceMismatch("the space has no motional mode".into()))
    }

    /// Internal factor at position `factor`.
    pub fn internal(&self, factor: usize) -> Result<InternalSpace> {
        match self.factors.get(factor) {
            Some(Factor::Internal(s)) => Ok(*s),
            Some(Factor::Mode(_)) => Err(Error::SpaceMismatch(format!(
                "factor {factor} is a motional mode, not an internal space"
            ))),
            None => Err(Error::IndexOutOfRange { index: factor, len: self.factors.len() }),
        }
    }

    pub fn internal_count(&self) -> usize {
        self.factors.iter().filter(|f| matches!(f, Factor::Internal(_))).count()
    }

    /// Row-major composite index of per-factor indices.
    pub fn index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.factors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.factors.len(),
                found: digits.len(),
            });
        }
        let mut idx = 0;
        for (d, f) in digits.iter().zip(&self.factors) {
            if *d >= f.dim() {
                return Err(Error::IndexOutOfRange { index: *d, len: f.dim() });
            }
            idx = idx * f.dim() + d;
        }
        Ok(idx)
    }

    /// Inverse of [`SpaceDescriptor::index`].
    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = idx % f.dim();
            idx /= f.dim();
        }
        out
    }

    /// Composite index of the product basis state `|levels..., n>`.
    pub fn basis_index(&self, levels: &[Level], n: usize) -> Result<usize> {
        let mode = self.require_mode()?;
        if n > mode.cutoff() {
            return Err(Error::IndexOutOfRange { index: n, len: mode.dim() });
        }
        if levels.len() != self.internal_count() {
            return Err(Error::DimensionMismatch {
                expected: self.internal_count(),
                found: levels.len(),
            });
        }
        let mut digits = Vec::with_capacity(self.factors.len());
        for (k, level) in levels.iter().enumerate() {
            digits.push(self.internal(k)?.index_of(*level)?);
        }
        digits.push(n);
        self.index(&digits)
    }

    /// Human-readable ket label such as `g,e,3`.
    pub fn label(&self, idx: usize) -> String {
        self.digits(idx)
            .iter()
            .zip(&self.factors)
            .map(|(d, f)| match f {
                Factor::Internal(s) => s.levels()[*d].label().to_string(),
                Factor::Mode(_) => d.to_string(),
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_must_be_positive() {
        assert!(ModeSpace::new(0).is_err());
        assert_eq!(ModeSpace::new(9).unwrap().dim(), 10);
    }

    #[test]
    fn mode_must_be_last() {
        let m = ModeSpace::new(3).unwrap();
        assert!(SpaceDescriptor::new(vec![m.into(), InternalSpace::TwoLevel.into()]).is_err());
        assert!(SpaceDescriptor::new(vec![m.into(), m.into()]).is_err());
        assert!(SpaceDescriptor::new(vec![]).is_err());
    }

    #[test]
    fn two_ions_and_mode_dimension() {
        let s = SpaceDescriptor::two_ions_mode(9).unwrap();
        assert_eq!(s.dim(), 40);
    }

    #[test]
    fn index_layout_is_row_major() {
        let s = SpaceDescriptor::two_ions_mode(4).unwrap();
        assert_eq!(s.index(&[1, 0, 3]).unwrap(), (2 + 0) * 5 + 3);
        assert_eq!(s.digits(13), vec![1, 0, 3]);
        assert_eq!(s.basis_index(&[Level::E, Level::G], 3).unwrap(), 13);
        assert_eq!(s.label(13), "e,g,3");
    }

    #[test]
    fn unknown_level_is_rejected() {
        assert!(InternalSpace::TwoLevel.index_of(Level::C).is_err());
        assert_eq!(InternalSpace::ThreeLevel.index_of(Level::C).unwrap(), 2);
    }
}
