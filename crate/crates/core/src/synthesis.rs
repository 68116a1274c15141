//! Element-value search against a requirement mask.
//!
//! Free element values are optimised in log space with restarted Nelder-Mead.
//! Restart 0 starts from the base design; later restarts draw uniformly in the
//! log-bounds box from a seeded LCG, so a given config always gives the same
//! answer.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{sweep, UnitCellParams};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::metrics::{evaluate_mask, FilterMetrics, MaskViolation, SpecMask};
use crate::optim::{nelder_mead, Lcg64, NelderMeadOptions};

/// Cost returned when the response has no bracketed pass-band or a mask
/// point falls outside the sweep.
pub const INFEASIBLE_COST: f64 = 1e6;

/// Offset between restart seeds (golden-ratio increment).
const RESTART_SEED_STEP: u64 = 0x9E37_79B9_7F4A_7C15;

/// Default lower and upper bound factors around each base value.
pub const DEFAULT_BOUND_FACTORS: [f64; 2] = [0.1, 10.0];

fn default_base() -> UnitCellParams {
    UnitCellParams::swapped()
}
fn default_grid() -> FrequencyGrid {
    FrequencyGrid::linear(0.3e9, 1.2e9, 2001).expect("valid grid")
}
fn default_stages() -> usize {
    2
}
fn default_z0() -> f64 {
    50.0
}
fn default_max_iterations() -> usize {
    3000
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_restarts() -> usize {
    8
}
fn default_seed() -> u64 {
    1
}
fn default_polish_rounds() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Starting design; also fixes topology and inductor interpretation.
    #[serde(default = "default_base")]
    pub base: UnitCellParams,
    /// `[min, max]` per element field name. Missing fields get
    /// [`DEFAULT_BOUND_FACTORS`] times the base value; `min == max` fixes a value.
    #[serde(default)]
    pub bounds: BTreeMap<String, [f64; 2]>,
    #[serde(default = "SpecMask::wpt_730mhz")]
    pub mask: SpecMask,
    #[serde(default = "default_grid")]
    pub grid: FrequencyGrid,
    #[serde(default = "default_stages")]
    pub stages: usize,
    #[serde(default = "default_z0")]
    pub z0_ohm: f64,
    /// Nelder-Mead iterations per run.
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Simplex size (in log units) below which a run stops.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Extra runs restarted from each run's result while they still improve.
    #[serde(default = "default_polish_rounds")]
    pub polish_rounds: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            base: default_base(),
            bounds: BTreeMap::new(),
            mask: SpecMask::wpt_730mhz(),
            grid: default_grid(),
            stages: default_stages(),
            z0_ohm: default_z0(),
            max_iterations: default_max_iterations(),
            tolerance: default_tolerance(),
            restarts: default_restarts(),
            seed: default_seed(),
            polish_rounds: default_polish_rounds(),
        }
    }
}

impl SynthesisConfig {
    /// Resolved `[min, max]` for the five elements, in field order.
    pub fn resolved_bounds(&self) -> Result<[(f64, f64); 5]> {
        let named = self.base.named_values();
        for key in self.bounds.keys() {
            if !named.iter().any(|(n, _)| n == key) {
                return Err(Error::InvalidConfig(format!(
                    "unknown bounds key {key:?}; expected one of {}",
                    named.map(|(n, _)| n).join(", ")
                )));
            }
        }
        let mut out = [(0.0, 0.0); 5];
        for (slot, (name, base)) in out.iter_mut().zip(named) {
            let (lo, hi) = match self.bounds.get(name) {
                Some(&[lo, hi]) => (lo, hi),
                None => (
                    DEFAULT_BOUND_FACTORS[0] * base,
                    DEFAULT_BOUND_FACTORS[1] * base,
                ),
            };
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "bounds for {name} must satisfy 0 < min <= max, got [{lo}, {hi}]"
                )));
            }
            *slot = (lo, hi);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.mask.validate()?;
        self.resolved_bounds()?;
        if self.stages < 1 {
            return Err(Error::InvalidConfig("stages must be at least 1".into()));
        }
        if !(self.z0_ohm > 0.0 && self.z0_ohm.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "z0_ohm must be positive, got {}",
                self.z0_ohm
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Mask cost of a design, with [`INFEASIBLE_COST`] when it cannot be scored.
pub fn cost(p: &UnitCellParams, cfg: &SynthesisConfig) -> f64 {
    match score(p, cfg) {
        Ok((c, _, _)) => c,
        Err(_) => INFEASIBLE_COST,
    }
}

fn score(
    p: &UnitCellParams,
    cfg: &SynthesisConfig,
) -> Result<(f64, FilterMetrics, Vec<MaskViolation>)> {
    let outcome = sweep(p, &cfg.grid, cfg.stages, cfg.z0_ohm)?;
    let e = evaluate_mask(&outcome.table, &cfg.mask)?;
    Ok((e.cost, e.metrics, e.violations))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub start_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisResult {
    pub params: UnitCellParams,
    pub cost: f64,
    /// True exactly when every mask requirement is met (cost zero).
    pub converged: bool,
    pub metrics: Option<FilterMetrics>,
    pub violations: Vec<MaskViolation>,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    pub evaluations: usize,
    pub stages: usize,
    pub seed: u64,
}

pub fn synthesize(cfg: &SynthesisConfig) -> Result<SynthesisResult> {
    cfg.validate()?;
    let bounds = cfg.resolved_bounds()?;
    let base = cfg.base.values();
    let free: Vec<usize> = (0..5).filter(|&i| bounds[i].0 < bounds[i].1).collect();
    let log_bounds: Vec<(f64, f64)> = free
        .iter()
        .map(|&i| (bounds[i].0.ln(), bounds[i].1.ln()))
        .collect();

    let design = |x: &[f64]| {
        let mut v = base;
        for (i, b) in bounds.iter().enumerate() {
            v[i] = v[i].clamp(b.0, b.1);
        }
        for (k, &i) in free.iter().enumerate() {
            v[i] = x[k].exp();
        }
        cfg.base.with_values(v)
    };
    let mut evaluations = 0usize;
    let mut objective = |x: &[f64]| {
        evaluations += 1;
        cost(&design(x), cfg)
    };
    let opts = NelderMeadOptions {
        max_iterations: cfg.max_iterations,
        x_tolerance: cfg.tolerance,
        f_tolerance: 0.0,
        initial_step: 0.25,
        target: 0.0,
    };

    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    let mut summaries = Vec::new();
    for r in 0..cfg.restarts.max(1) {
        let start: Vec<f64> = if r == 0 {
            free.iter().map(|&i| base[i].ln()).collect()
        } else {
            let mut rng = Lcg64::new(cfg.seed.wrapping_add((r as u64).wrapping_mul(RESTART_SEED_STEP)));
            log_bounds
                .iter()
                .map(|&(lo, hi)| lo + (hi - lo) * rng.next_f64())
                .collect()
        };
        let start_cost = objective(&start);
        let mut m = nelder_mead(&mut objective, &start, Some(&log_bounds), &opts);
        let mut iterations = m.iterations;
        for _ in 0..cfg.polish_rounds {
            if m.value <= 0.0 {
                break;
            }
            let next = nelder_mead(&mut objective, &m.x, Some(&log_bounds), &opts);
            iterations += next.iterations;
            let improved = next.value < m.value;
            if next.value <= m.value {
                m = next;
            }
            if !improved {
                break;
            }
        }
        summaries.push(RestartSummary {
            index: r,
            start_cost,
            final_cost: m.value,
            iterations,
        });
        if best.as_ref().is_none_or(|(c, _, _)| m.value < *c) {
            best = Some((m.value, m.x, r));
        }
        if best.as_ref().is_some_and(|(c, _, _)| *c <= 0.0) {
            break;
        }
    }

    let (_, x, best_restart) = best.expect("at least one restart");
    let params = design(&x);
    let (cost, metrics, violations) = match score(&params, cfg) {
        Ok((c, m, v)) => (c, Some(m), v),
        Err(_) => (INFEASIBLE_COST, None, Vec::new()),
    };
    Ok(SynthesisResult {
        params,
        cost,
        converged: cost == 0.0,
        metrics,
        violations,
        best_restart,
        restarts: summaries,
        evaluations,
        stages: cfg.stages,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bounds_bracket_the_base() {
        let cfg = SynthesisConfig::default();
        let b = cfg.resolved_bounds().unwrap();
        for ((lo, hi), v) in b.iter().zip(cfg.base.values()) {
            assert!((lo / v - 0.1).abs() < 1e-12 && (hi / v - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_bounds_are_rejected() {
        let mut cfg = SynthesisConfig::default();
        cfg.bounds.insert("c_x".into(), [1.0, 2.0]);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let mut cfg = SynthesisConfig::default();
        cfg.bounds.insert("c_farad".into(), [2e-12, 1e-12]);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn unscorable_design_costs_the_penalty() {
        // Grid far below the band: no bracketed pass-band.
        let cfg = SynthesisConfig {
            grid: FrequencyGrid::linear(1e6, 2e6, 11).unwrap(),
            ..Default::default()
        };
        assert_eq!(cost(&cfg.base, &cfg), INFEASIBLE_COST);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = SynthesisConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: SynthesisConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<SynthesisConfig>(r#"{"stagez": 2}"#).is_err());
    }

    #[test]
    fn fixed_values_stay_put() {
        let mut cfg = SynthesisConfig {
            restarts: 1,
            max_iterations: 30,
            polish_rounds: 0,
            ..Default::default()
        };
        let c = cfg.base.c_farad;
        cfg.bounds.insert("c_farad".into(), [c, c]);
        let r = synthesize(&cfg).unwrap();
        assert_eq!(r.params.c_farad, c);
    }
}
