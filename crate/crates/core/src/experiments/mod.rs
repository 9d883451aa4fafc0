//! Verification studies built on the solver: noise sweeps with rate fits,
//! the stability bound, the logarithmic law at `x = a`, the filter-bound
//! sweep, and the contrast against the unregularized evaluator.
//!
//! Independent cells run through [`crate::exec::map_ordered`]; reports are
//! assembled in a fixed order so verdicts do not depend on scheduling.

mod blowup;
mod convergence;
mod lemma;
mod stability;

pub use blowup::{run_blowup_contrast, BLOWUP_MIN_RATIO};
pub use convergence::{
    run_bias_control, run_convergence_study, run_loglaw_check, BOUNDARY_RATE_TOLERANCE, INTERIOR_RATE_TOLERANCE,
    LOGLAW_MAX_SLOPE, MONOTONE_TOLERANCE,
};
pub use lemma::{run_lemma_sweep, LemmaGrid};
pub use stability::run_stability_check;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noise levels, replicates and probe points of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub epsilons: Vec<f64>,
    pub m: f64,
    pub k: f64,
    pub seeds: Vec<u64>,
    pub probe_x: Vec<f64>,
}

impl SweepPlan {
    pub fn validate(&self, a: f64) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::Config("plan needs at least one epsilon".into()));
        }
        if !self.epsilons.iter().all(|&e| e > 0.0 && e.is_finite()) {
            return Err(Error::Config("plan epsilons must be positive".into()));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("plan epsilons must be strictly decreasing".into()));
        }
        if !(self.m > 0.0 && self.m <= 1.0) {
            return Err(Error::Config(format!("plan m must lie in (0, 1], got {}", self.m)));
        }
        if !(self.k >= 1.0) {
            return Err(Error::Config(format!("plan k must be >= 1, got {}", self.k)));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("plan needs at least one seed".into()));
        }
        if self.probe_x.is_empty() || !self.probe_x.iter().all(|x| (0.0..=a).contains(x)) {
            return Err(Error::Config(format!("probe_x must be non-empty and inside [0, {a}]")));
        }
        Ok(())
    }
}

/// One `(epsilon, seed, x)` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub epsilon: f64,
    pub seed: u64,
    pub x: f64,
    pub error: f64,
    pub beta: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Least-squares slope of `ln(error)` against `ln(epsilon)` at one probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub x: f64,
    pub slope: f64,
    pub points: usize,
    /// Norm rates `m (1 - x/a)` and `1 - m x / a` from the error estimate.
    pub theoretical: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StudyReport {
    pub kind: String,
    pub rows: Vec<ReportRow>,
    pub fitted_slopes: Vec<SlopeFit>,
    pub verdicts: BTreeMap<String, bool>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub runtime_ms: u64,
}

pub const CSV_HEADER: &str = "epsilon,seed,x,error,beta,iterations,converged";

impl StudyReport {
    pub(crate) fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            ..Self::default()
        }
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    pub fn verdict(&self, name: &str) -> Option<bool> {
        self.verdicts.get(name).copied()
    }

    pub fn slope_at(&self, x: f64) -> Option<f64> {
        self.fitted_slopes
            .iter()
            .find(|s| (s.x - x).abs() <= 1e-12 * x.abs().max(1.0))
            .map(|s| s.slope)
    }

    pub(crate) fn sort_rows(&mut self) {
        self.rows.sort_by(|a, b| {
            a.epsilon
                .total_cmp(&b.epsilon)
                .then(a.seed.cmp(&b.seed))
                .then(a.x.total_cmp(&b.x))
        });
    }

    /// One line per row under [`CSV_HEADER`]; floats in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{:?},{},{:?},{:?},{:?},{},{}\n",
                r.epsilon, r.seed, r.x, r.error, r.beta, r.iterations, r.converged
            ));
        }
        out
    }

    /// Summary without the per-row records.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "verdicts": self.verdicts,
            "fitted_slopes": self.fitted_slopes,
            "metrics": self.metrics,
            "notes": self.notes,
            "runtime_ms": self.runtime_ms,
        })
    }

    pub(crate) fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }
}

/// Least-squares slope through `(ln x, ln y)`. `None` with fewer than two
/// distinct abscissae or a non-positive value.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

pub(crate) fn elapsed_ms(start: std::time::Instant) -> u64 {
    start.elapsed().as_millis() as u64
}
