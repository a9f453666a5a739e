//! Feasibility analysis and constrained search over the Raman parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{pi_time, PiTime};
use crate::hamiltonians::{residual_detuning, selectivity, RamanParams, Selector};

/// Thresholds behind the validity flags of a [`FeasibilityReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidityThresholds {
    /// Lamb-Dicke parameters must stay below this value.
    pub max_eta: f64,
    /// Minimum `|Δ| / |Ω_eff|`.
    pub min_adiabatic_ratio: f64,
    /// Minimum `|Δ| / max(g1, g2)`.
    pub min_dispersive_margin: f64,
    /// Coherence time in seconds used for `decoherence_ratio`.
    pub tau_dec: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        ValidityThresholds { max_eta: 0.3, min_adiabatic_ratio: 10.0, min_dispersive_margin: 10.0, tau_dec: 10e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub selectivity: f64,
    pub omega_eff: f64,
    pub pi_time_derived: f64,
    pub pi_time_paper: f64,
    /// `|Δ| / max(g1, g2)`.
    pub dispersive_margin: f64,
    pub ld_valid: bool,
    /// `|Δ| / |Ω_eff|`.
    pub adiabatic_ratio: f64,
    pub adiabatic_valid: bool,
    /// Pulse-area π-time over the coherence time.
    pub decoherence_ratio: f64,
}

impl FeasibilityReport {
    pub fn valid(&self) -> bool {
        self.ld_valid && self.adiabatic_valid
    }
}

pub fn feasibility(p: &RamanParams, sel: Selector) -> Result<FeasibilityReport> {
    feasibility_with(p, sel, &ValidityThresholds::default())
}

pub fn feasibility_with(p: &RamanParams, sel: Selector, th: &ValidityThresholds) -> Result<FeasibilityReport> {
    p.validate()?;
    let PiTime { derived, paper, .. } = pi_time(p, sel, false)?;
    let omega_eff = p.omega_eff();
    let dispersive_margin = p.delta.abs() / p.g1.max(p.g2);
    let adiabatic_ratio = p.delta.abs() / omega_eff.abs();
    Ok(FeasibilityReport {
        selectivity: selectivity(p),
        omega_eff,
        pi_time_derived: derived,
        pi_time_paper: paper,
        dispersive_margin,
        ld_valid: p.eta1 < th.max_eta && p.eta2 < th.max_eta,
        adiabatic_ratio,
        adiabatic_valid: adiabatic_ratio >= th.min_adiabatic_ratio && dispersive_margin >= th.min_dispersive_margin,
        decoherence_ratio: paper / th.tau_dec,
    })
}

/// Generalized-Rabi bound `Ω_R^2 / (Ω_R^2 + δ^2)` on the population that
/// doublet `{|g,n>, |e,n+1>}` can transfer while doublet `n0` is resonant,
/// with `Ω_R = 2 |Ω_eff| √(n+1)` and `δ` the residual detuning.
pub fn leakage_bound(p: &RamanParams, n: usize, n0: usize) -> Result<f64> {
    if n == n0 {
        return Err(Error::InvalidParameter { name: "n", reason: "the selected doublet is resonant".into() });
    }
    let rabi_sq = 4.0 * p.omega_eff() * p.omega_eff() * (n + 1) as f64;
    let delta = residual_detuning(p, n, n0);
    Ok(rabi_sq / (rabi_sq + delta * delta))
}

/// Closed interval of allowed values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn new(min: f64, max: f64) -> Self {
        Bounds { min, max }
    }

    pub fn fixed(v: f64) -> Self {
        Bounds { min: v, max: v }
    }

    fn check(&self, name: &'static str) -> Result<()> {
        if !(self.min > 0.0 && self.min <= self.max && self.max.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("bounds must satisfy 0 < min <= max, got [{}, {}]", self.min, self.max),
            });
        }
        Ok(())
    }

    /// `points` values spaced evenly in log scale.
    fn grid(&self, points: usize) -> Vec<f64> {
        if self.min == self.max || points == 1 {
            return vec![self.min];
        }
        let (a, b) = (self.min.ln(), self.max.ln());
        (0..points)
            .map(|k| match k {
                0 => self.min,
                k if k == points - 1 => self.max,
                k => (a + (b - a) * k as f64 / (points - 1) as f64).exp(),
            })
            .collect()
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConstraints {
    pub min_selectivity: f64,
    /// Upper limit on the transfer π-time in seconds.
    pub max_pi_time: f64,
    pub g1: Bounds,
    pub g2: Bounds,
    pub delta: Bounds,
    pub eta1: Bounds,
    pub eta2: Bounds,
    /// Trap frequency, held fixed.
    pub nu: f64,
    #[serde(default = "default_selector")]
    pub selector: Selector,
    /// Grid points per parameter.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub thresholds: ValidityThresholds,
}

fn default_selector() -> Selector {
    Selector::ajc(0)
}

fn default_grid_points() -> usize {
    6
}

impl DesignConstraints {
    fn validate(&self) -> Result<()> {
        for (name, b) in [("g1", self.g1), ("g2", self.g2), ("delta", self.delta), ("eta1", self.eta1), ("eta2", self.eta2)] {
            b.check(name)?;
        }
        if self.grid_points == 0 {
            return Err(Error::InvalidParameter { name: "grid_points", reason: "need at least one point".into() });
        }
        if !(self.max_pi_time > 0.0) {
            return Err(Error::InvalidParameter { name: "max_pi_time", reason: "must be positive".into() });
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter { name: "nu", reason: "must be positive".into() });
        }
        self.selector.validate()
    }

    fn bounds(&self) -> [Bounds; 5] {
        [self.g1, self.g2, self.delta, self.eta1, self.eta2]
    }

    fn params(&self, x: [f64; 5]) -> RamanParams {
        RamanParams::new(x[0], x[1], x[2], x[3], x[4], self.nu)
    }

    /// π-time of `x` when every constraint holds.
    fn objective(&self, x: [f64; 5]) -> Option<(f64, FeasibilityReport)> {
        let report = feasibility_with(&self.params(x), self.selector, &self.thresholds).ok()?;
        let ok = report.valid()
            && report.selectivity >= self.min_selectivity
            && report.pi_time_derived <= self.max_pi_time;
        ok.then_some((report.pi_time_derived, report))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesignPoint {
    pub params: RamanParams,
    pub report: FeasibilityReport,
}

/// Minimises the π-time subject to the constraints: a log-spaced grid over
/// every bounded parameter, then a coordinate pattern search from the best
/// grid point. The grid winner is the lowest π-time, ties going to the
/// lexicographically first grid index, so the result does not depend on how
/// the grid is split across threads.
pub fn search(c: &DesignConstraints) -> Result<DesignPoint> {
    c.validate()?;
    let axes: Vec<Vec<f64>> = c.bounds().iter().map(|b| b.grid(c.grid_points)).collect();
    let sizes: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let point = |mut idx: usize| {
        let mut x = [0.0; 5];
        for k in (0..5).rev() {
            x[k] = axes[k][idx % sizes[k]];
            idx /= sizes[k];
        }
        x
    };
    let best = (0..total)
        .into_par_iter()
        .filter_map(|i| c.objective(point(i)).map(|(t, _)| (t, i)))
        .reduce_with(|a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a });
    let Some((mut best_t, index)) = best else {
        return Err(Error::Infeasible(format!("none of the {total} grid points meets the constraints")));
    };

    let mut x = point(index);
    let bounds = c.bounds();
    let mut steps: Vec<f64> = bounds
        .iter()
        .zip(&sizes)
        .map(|(b, &n)| if n > 1 { (b.max / b.min).ln() / (n - 1) as f64 } else { 0.0 })
        .collect();
    for _ in 0..500 {
        if steps.iter().all(|&s| s < 1e-9) {
            break;
        }
        let mut improved = false;
        for k in 0..5 {
            if steps[k] < 1e-9 {
                continue;
            }
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[k] = bounds[k].clamp(x[k] * (dir * steps[k]).exp());
                if y[k] == x[k] {
                    continue;
                }
                if let Some((t, _)) = c.objective(y) {
                    if t < best_t {
                        best_t = t;
                        x = y;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            for s in &mut steps {
                *s *= 0.5;
            }
        }
    }

    let params = c.params(x);
    let (_, report) = c
        .objective(x)
        .ok_or_else(|| Error::Infeasible("refined point failed its constraint re-check".into()))?;
    Ok(DesignPoint { params, report })
}
