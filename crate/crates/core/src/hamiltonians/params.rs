use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::ModeSpace;

/// Reduced Planck constant in J s.
const HBAR: f64 = 1.054_571_817e-34;

/// `eta = k sqrt(hbar / (2 m nu))` for wavenumber `k` (1/m), ion mass `m` (kg)
/// and trap frequency `nu` (rad/s).
pub fn lamb_dicke_parameter(wavenumber: f64, mass: f64, nu: f64) -> f64 {
    wavenumber * (HBAR / (2.0 * mass * nu)).sqrt()
}

/// Hardware parameters of the Raman scheme, all frequencies in rad/s.
///
/// `g1` drives `g <-> c` with a standing wave, `g2` drives `e <-> c` with a
/// travelling wave, and `delta` is the common detuning from `|c>`. The
/// level and laser frequencies are only needed by the three-level model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamanParams {
    pub g1: f64,
    pub g2: f64,
    pub delta: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub nu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega2: Option<f64>,
    /// Ion mass in kg; informational unless η is derived with [`lamb_dicke_parameter`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

impl RamanParams {
    pub fn new(g1: f64, g2: f64, delta: f64, eta1: f64, eta2: f64, nu: f64) -> Self {
        RamanParams {
            g1,
            g2,
            delta,
            eta1,
            eta2,
            nu,
            omega_e: None,
            omega_c: None,
            omega1: None,
            omega2: None,
            mass: None,
        }
    }

    /// Checks the Lamb-Dicke and sign invariants.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be positive and finite, got {v}") })
            }
        };
        positive("g1", self.g1)?;
        positive("g2", self.g2)?;
        positive("nu", self.nu)?;
        if !(self.delta.abs() > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter { name: "delta", reason: format!("must be non-zero and finite, got {}", self.delta) });
        }
        for (name, eta) in [("eta1", self.eta1), ("eta2", self.eta2)] {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::InvalidParameter { name, reason: format!("must lie in (0, 1), got {eta}") });
            }
        }
        Ok(())
    }

    /// Effective sideband Rabi coupling `2 η2 g1 g2 / Δ` (signed with Δ).
    pub fn omega_eff(&self) -> f64 {
        2.0 * self.eta2 * self.g1 * self.g2 / self.delta
    }

    /// Spacing `8 η1^2 g1^2 / Δ` of the light-shifted ground ladder.
    pub fn stark_spacing(&self) -> f64 {
        8.0 * self.eta1 * self.eta1 * self.g1 * self.g1 / self.delta
    }

    /// Fill in laser frequencies for the three-level model: `ω1 = ω_c - Δ`
    /// and `ω1 - ω2 = ω_e + ν + δ`, where `δ` is the bare detuning of the
    /// selected blue-sideband doublet. Shifting laser 2 by `δ` is the
    /// frequency-domain form of the compensation used by the effective model.
    pub fn with_raman_tuning(mut self, omega_e: f64, omega_c: f64, n0: usize) -> Self {
        let omega1 = omega_c - self.delta;
        let shift = super::bare_detuning(&self, n0);
        self.omega_e = Some(omega_e);
        self.omega_c = Some(omega_c);
        self.omega1 = Some(omega1);
        self.omega2 = Some(omega1 - omega_e - self.nu - shift);
        self
    }
}

/// Which sideband family a selective interaction addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubspaceKind {
    /// Red sideband: `{|g,n0>, |e,n0-1>}`.
    #[serde(rename = "JC")]
    Jc,
    /// Blue sideband: `{|g,n0>, |e,n0+1>}`.
    #[serde(rename = "AJC")]
    Ajc,
}

/// The doublet tuned to resonance. `n0` is always the Fock index paired with `|g>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Selector {
    pub kind: SubspaceKind,
    pub n0: usize,
}

impl Selector {
    pub fn new(kind: SubspaceKind, n0: usize) -> Result<Self> {
        let s = Selector { kind, n0 };
        s.validate()?;
        Ok(s)
    }

    pub fn ajc(n0: usize) -> Self {
        Selector { kind: SubspaceKind::Ajc, n0 }
    }

    pub fn jc(n0: usize) -> Result<Self> {
        Self::new(SubspaceKind::Jc, n0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == SubspaceKind::Jc && self.n0 == 0 {
            return Err(Error::SelectorOutOfRange("a JC doublet needs n0 >= 1".into()));
        }
        Ok(())
    }

    /// Fock index paired with `|e>`.
    pub fn partner(&self) -> usize {
        match self.kind {
            SubspaceKind::Ajc => self.n0 + 1,
            SubspaceKind::Jc => self.n0 - 1,
        }
    }

    /// Larger Fock index of the doublet; the coupling scales as its square root.
    pub fn top(&self) -> usize {
        self.n0.max(self.partner())
    }

    pub fn check_mode(&self, mode: ModeSpace) -> Result<()> {
        self.validate()?;
        if self.top() > mode.cutoff() {
            return Err(Error::SelectorOutOfRange(format!(
                "{self} needs Fock level {} but the cutoff is {}",
                self.top(),
                mode.cutoff()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            SubspaceKind::Ajc => "AJC",
            SubspaceKind::Jc => "JC",
        };
        write!(f, "{kind}{{|g,{}>, |e,{}>}}", self.n0, self.partner())
    }
}
