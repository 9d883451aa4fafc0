//! The unregularized evaluator against the regularized solver on one noisy
//! sample.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::make_noisy;
use crate::solver::{evaluate_exact_mild, solve_regularized, trajectory_error, Discretization, Manufactured, RegularizationConfig};
use crate::spectral_basis::eigenvalue;

use super::{elapsed_ms, ReportRow, StudyReport};

/// Required ratio of unregularized to regularized error at `x = a`.
pub const BLOWUP_MIN_RATIO: f64 = 1e3;

/// Smallest `sqrt(alpha lambda_N) a` for which noise in the top mode is
/// amplified by at least `cosh(30)`.
const MIN_TOP_EXPONENT: f64 = 30.0;

/// Perturbs the Cauchy data at level `reg.epsilon` (none when it is zero),
/// then evaluates the cosh/sinh formulas with the truth inside the
/// nonlinearity and, separately, solves the regularized problem. Passes when
/// the first error at `x = a` is at least [`BLOWUP_MIN_RATIO`] times the
/// second, or when the evaluator overflows.
pub fn run_blowup_contrast(
    problem: &Manufactured,
    reg: &RegularizationConfig,
    disc: &Discretization,
    seed: u64,
) -> Result<StudyReport> {
    let start = Instant::now();
    let c = &problem.spec.constants;
    let a = c.a;
    let top = (c.alpha_min() * eigenvalue(disc.basis.n_modes, &disc.basis)?).sqrt() * a;
    if reg.epsilon > 0.0 && top < MIN_TOP_EXPONENT {
        return Err(Error::Config(format!(
            "blow-up contrast needs sqrt(alpha lambda_N) a >= {MIN_TOP_EXPONENT}, got {top:.3}; raise n_modes"
        )));
    }
    let data = if reg.epsilon > 0.0 {
        make_noisy(&problem.data, reg.epsilon, seed)?.data
    } else {
        problem.data.clone()
    };

    let mild = evaluate_exact_mild(&problem.spec, &data, &problem.truth, disc)?;
    let (sol, diag) = solve_regularized(&problem.spec, &data, reg, disc)?;
    if !diag.converged {
        return Err(Error::Diverged("regularized solve in the blow-up contrast did not converge".into()));
    }
    let last = disc.n_x - 1;
    let exact_err = trajectory_error(&mild.trajectory, &problem.truth)?[last];
    let reg_err = trajectory_error(&sol, &problem.truth)?[last];
    let ratio = if exact_err.is_finite() { exact_err / reg_err } else { f64::INFINITY };

    let mut report = StudyReport::new("blowup");
    report.rows.push(ReportRow {
        epsilon: reg.epsilon,
        seed,
        x: a,
        error: reg_err,
        beta: reg.beta(),
        iterations: diag.iterations,
        converged: diag.converged,
    });
    report.metric("top_exponent", top);
    report.metric("unregularized_error", exact_err);
    report.metric("regularized_error", reg_err);
    report.metric("ratio", ratio);
    report.metric("saturated_modes", mild.saturated.len() as f64);
    if mild.is_saturated() {
        report
            .notes
            .push(format!("unregularized evaluator overflowed in {} mode(s)", mild.saturated.len()));
    }
    report
        .verdicts
        .insert("blowup_ok".into(), mild.is_saturated() || ratio >= BLOWUP_MIN_RATIO);
    report.runtime_ms = elapsed_ms(start);
    Ok(report)
}
