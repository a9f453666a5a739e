use serde::{Deserialize, Serialize};

use crate::design::{DesignConstraints, ValidityThresholds};
use crate::error::{Error, Result};
use crate::hamiltonians::{RamanParams, Selector};
use crate::protocols::{Execution, WignerConvention, WignerMethod};
use crate::space::{Level, ModeSpace};
use crate::state::{thermal_state, PureState, State};
use crate::C64;

/// A composite basis state `|level, n>` of one ion and the mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisLabel {
    pub level: Level,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeUnit {
    #[default]
    #[serde(rename = "s")]
    Seconds,
    /// Multiples of the transfer π-time of the selected doublet.
    #[serde(rename = "pi")]
    PiTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default)]
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub unit: TimeUnit,
}

impl TimeGrid {
    pub fn values(&self, unit_seconds: f64) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::InvalidParameter { name: "times.points", reason: "the time grid is empty".into() });
        }
        if !(self.start >= 0.0 && self.stop.is_finite() && (self.stop > self.start || self.points == 1)) {
            return Err(Error::InvalidParameter {
                name: "times.stop",
                reason: format!("need 0 <= start < stop, got [{}, {}]", self.start, self.stop),
            });
        }
        let scale = match self.unit {
            TimeUnit::Seconds => 1.0,
            TimeUnit::PiTime => unit_seconds,
        };
        let span = self.stop - self.start;
        Ok((0..self.points)
            .map(|k| {
                let f = if self.points == 1 { 0.0 } else { k as f64 / (self.points - 1) as f64 };
                scale * (self.start + span * f)
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RabiModel {
    /// Effective Hamiltonian with the selected doublet compensated.
    #[default]
    Selective,
    /// Effective Hamiltonian without compensation.
    Effective,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiConfig {
    pub params: RamanParams,
    pub cutoff: usize,
    pub selector: Selector,
    /// Defaults to `|g, n0>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<BasisLabel>,
    pub times: TimeGrid,
    /// Defaults to both states of the selected doublet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watch: Option<Vec<BasisLabel>>,
    #[serde(default)]
    pub hamiltonian: RabiModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Initial state of the motional mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawMotional")]
pub enum MotionalSpec {
    Fock { n: usize },
    Coherent { re: f64, im: f64 },
    Thermal { nbar: f64 },
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MotionalKind {
    Fock,
    Coherent,
    Thermal,
}

// Flat form; the arbitrary-precision number backend cannot feed internally
// tagged enums directly.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMotional {
    kind: MotionalKind,
    n: Option<usize>,
    re: Option<f64>,
    im: Option<f64>,
    nbar: Option<f64>,
}

impl TryFrom<RawMotional> for MotionalSpec {
    type Error = String;

    fn try_from(r: RawMotional) -> std::result::Result<Self, String> {
        let extra = |ok: bool, kind: &str| if ok { Ok(()) } else { Err(format!("unexpected field for `{kind}` motional state")) };
        match r.kind {
            MotionalKind::Fock => {
                extra(r.re.is_none() && r.im.is_none() && r.nbar.is_none(), "fock")?;
                Ok(MotionalSpec::Fock { n: r.n.ok_or("missing field `n`")? })
            }
            MotionalKind::Coherent => {
                extra(r.n.is_none() && r.nbar.is_none(), "coherent")?;
                Ok(MotionalSpec::Coherent { re: r.re.ok_or("missing field `re`")?, im: r.im.unwrap_or(0.0) })
            }
            MotionalKind::Thermal => {
                extra(r.n.is_none() && r.re.is_none() && r.im.is_none(), "thermal")?;
                Ok(MotionalSpec::Thermal { nbar: r.nbar.ok_or("missing field `nbar`")? })
            }
        }
    }
}

impl MotionalSpec {
    pub fn build(&self, cutoff: usize) -> Result<State> {
        let mode = ModeSpace::new(cutoff)?;
        Ok(match *self {
            MotionalSpec::Fock { n } => PureState::fock(mode, n)?.into(),
            MotionalSpec::Coherent { re, im } => PureState::coherent(mode, C64::new(re, im))?.into(),
            MotionalSpec::Thermal { nbar } => thermal_state(mode, nbar)?.into(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockConfig {
    pub params: RamanParams,
    pub cutoff: usize,
    pub n0: usize,
    pub motional: MotionalSpec,
    #[serde(default)]
    pub mode: Execution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolConfig {
    pub params: RamanParams,
    pub cutoff: usize,
    pub motional: MotionalSpec,
    #[serde(default)]
    pub mode: Execution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub params: RamanParams,
    pub cutoff: usize,
    pub n0: usize,
    pub motional: MotionalSpec,
    #[serde(default)]
    pub mode: Execution,
    /// Number of simulated detections; the exact probability when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    /// Extra refinement rounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    fn values(&self, name: &'static str) -> Result<Vec<f64>> {
        if self.points == 0 || !(self.min <= self.max) || !self.max.is_finite() || !self.min.is_finite() {
            return Err(Error::InvalidParameter { name, reason: "need min <= max and at least one point".into() });
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        Ok((0..self.points).map(|k| self.min + (self.max - self.min) * k as f64 / (self.points - 1) as f64).collect())
    }
}

/// Phase-space points: a rectangular grid, an explicit list, or both.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Axis>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<[f64; 2]>,
}

impl PhaseGrid {
    pub fn alphas(&self) -> Result<Vec<C64>> {
        let mut out = Vec::new();
        match (&self.re, &self.im) {
            (Some(re), Some(im)) => {
                let (xs, ys) = (re.values("grid.re")?, im.values("grid.im")?);
                for &x in &xs {
                    for &y in &ys {
                        out.push(C64::new(x, y));
                    }
                }
            }
            (None, None) => {}
            (None, Some(_)) => return Err(Error::MissingField("grid.re")),
            (Some(_), None) => return Err(Error::MissingField("grid.im")),
        }
        out.extend(self.points.iter().map(|p| C64::new(p[0], p[1])));
        if out.is_empty() {
            return Err(Error::InvalidParameter { name: "grid", reason: "no phase-space points".into() });
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    pub params: RamanParams,
    pub cutoff: usize,
    pub motional: MotionalSpec,
    pub grid: PhaseGrid,
    #[serde(default)]
    pub convention: WignerConvention,
    #[serde(default)]
    pub method: WignerMethod,
    #[serde(default)]
    pub mode: Execution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpgConfig {
    pub params: RamanParams,
    pub cutoff: usize,
    /// Register amplitudes `[re, im]` on `|gg>, |ge>, |eg>, |ee>`;
    /// the uniform superposition when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<[[f64; 2]; 4]>,
    /// Defaults to the motional ground state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motional: Option<MotionalSpec>,
    #[serde(default)]
    pub mode: Execution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    /// Parameters to assess.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<RamanParams>,
    #[serde(default = "default_selector")]
    pub selector: Selector,
    #[serde(default)]
    pub thresholds: ValidityThresholds,
    /// Constrained search to run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<DesignConstraints>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_selector() -> Selector {
    Selector::ajc(0)
}
