//! Exhaustive check of the filter bound and its shifted form.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::{map_ordered, Execution};
use crate::kernel::{filter_value, lemma1_bound, shifted_filter_value, shifted_lemma1_bound, KernelParams};

use super::{elapsed_ms, StudyReport};

/// Parameter grid of the bound sweep. Eigenvalues are `(n pi / b)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaGrid {
    pub a: f64,
    pub b: f64,
    pub alphas: Vec<f64>,
    pub k_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub n_max: usize,
    pub x_points: usize,
}

impl LemmaGrid {
    /// `n <= 200`, 21 x-points, `beta = 1e-1 .. 1e-8`, `k = 1, 2, 3`.
    pub fn standard(a: f64, b: f64, alphas: Vec<f64>) -> Self {
        Self {
            a,
            b,
            alphas,
            k_values: vec![1.0, 2.0, 3.0],
            beta_values: (1..=8).map(|e| 10f64.powi(-e)).collect(),
            n_max: 200,
            x_points: 21,
        }
    }

    fn xs(&self) -> Vec<f64> {
        let m = self.x_points.max(2);
        let mut xs: Vec<f64> = (0..m).map(|j| self.a * j as f64 / (m - 1) as f64).collect();
        xs[m - 1] = self.a;
        xs
    }
}

#[derive(Default)]
struct CellResult {
    skipped: bool,
    max_ratio: f64,
    max_shifted_ratio: f64,
    violations: usize,
    shifted_violations: usize,
    evaluations: usize,
}

fn check_cell(grid: &LemmaGrid, xs: &[f64], p: &KernelParams) -> Result<CellResult> {
    if !p.hypothesis_ok() {
        return Ok(CellResult {
            skipped: true,
            ..CellResult::default()
        });
    }
    let bounds: Vec<f64> = xs.iter().map(|&x| lemma1_bound(p, x)).collect::<Result<_>>()?;
    let mut r = CellResult::default();
    for n in 1..=grid.n_max {
        let lambda = (n as f64 * std::f64::consts::PI / grid.b).powi(2);
        for (i, &x) in xs.iter().enumerate() {
            let ratio = filter_value(p, lambda, x)? / bounds[i];
            r.max_ratio = r.max_ratio.max(ratio);
            r.violations += usize::from(ratio > 1.0);
            r.evaluations += 1;
            for &xi in &xs[..=i] {
                let ratio = shifted_filter_value(p, lambda, x, xi)? / shifted_lemma1_bound(p, x, xi)?;
                r.max_shifted_ratio = r.max_shifted_ratio.max(ratio);
                r.shifted_violations += usize::from(ratio > 1.0);
                r.evaluations += 1;
            }
        }
    }
    Ok(r)
}

/// Checks the filter against its bound at every `(alpha, k, beta, n, x)` of
/// the grid, and the shifted filter at every `xi <= x`. Cells violating
/// `a^k > k beta` are skipped and counted.
pub fn run_lemma_sweep(grid: &LemmaGrid, exec: Execution) -> Result<StudyReport> {
    let start = Instant::now();
    let xs = grid.xs();
    let mut cells = Vec::new();
    for &alpha in &grid.alphas {
        for &k in &grid.k_values {
            for &beta in &grid.beta_values {
                cells.push(KernelParams::new(alpha, grid.a, k, beta)?);
            }
        }
    }
    let results = map_ordered(exec, &cells, |p| check_cell(grid, &xs, p));

    let mut total = CellResult::default();
    let mut skipped = 0usize;
    for r in results {
        let r = r?;
        skipped += usize::from(r.skipped);
        total.max_ratio = total.max_ratio.max(r.max_ratio);
        total.max_shifted_ratio = total.max_shifted_ratio.max(r.max_shifted_ratio);
        total.violations += r.violations;
        total.shifted_violations += r.shifted_violations;
        total.evaluations += r.evaluations;
    }

    let mut report = StudyReport::new("lemma");
    report.metric("cells", cells.len() as f64);
    report.metric("hypothesis_skipped", skipped as f64);
    report.metric("evaluations", total.evaluations as f64);
    report.metric("max_ratio", total.max_ratio);
    report.metric("max_shifted_ratio", total.max_shifted_ratio);
    report.metric("violations", total.violations as f64);
    report.metric("shifted_violations", total.shifted_violations as f64);
    report
        .verdicts
        .insert("lemma1_ok".into(), total.violations == 0 && total.max_ratio <= 1.0);
    report.verdicts.insert(
        "shifted_ok".into(),
        total.shifted_violations == 0 && total.max_shifted_ratio <= 1.0,
    );
    report.runtime_ms = elapsed_ms(start);
    Ok(report)
}
