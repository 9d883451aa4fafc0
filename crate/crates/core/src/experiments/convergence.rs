//! Noise sweeps: rate fits at interior probes, monotonicity, and the
//! logarithmic law at the far boundary.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::model::make_noisy;
use crate::solver::{
    manufactured_from_ansatz, solve_regularized, trajectory_error, Discretization, Manufactured,
    RegularizationConfig, Trajectory,
};

use super::{elapsed_ms, log_log_slope, ReportRow, SlopeFit, StudyReport, SweepPlan};

/// Allowed gap between fitted and predicted slope at interior probes.
pub const INTERIOR_RATE_TOLERANCE: f64 = 0.3;
/// Same, at `x = 0` where the rate is exactly `m`.
pub const BOUNDARY_RATE_TOLERANCE: f64 = 0.15;
/// Relative slack when checking that errors do not grow as epsilon shrinks.
pub const MONOTONE_TOLERANCE: f64 = 0.05;
/// Largest slope accepted at `x = a`.
pub const LOGLAW_MAX_SLOPE: f64 = 0.2;

/// Rows within this factor of the quadrature error estimate are not fitted.
const FLOOR_FACTOR: f64 = 10.0;

struct Sweep {
    rows: Vec<ReportRow>,
    /// `means[p][e]`: seed average at probe `p` and epsilon `e`, or `None`
    /// when every seed diverged or fell under the floor.
    means: Vec<Vec<Option<f64>>>,
    floored: usize,
    diverged: usize,
}

fn probe_indices(problem: &Manufactured, plan: &SweepPlan, disc: &Discretization) -> Result<Vec<usize>> {
    let a = problem.spec.constants.a;
    plan.validate(a)?;
    plan.probe_x.iter().map(|&x| disc.node_index(a, x)).collect()
}

fn reg_for(plan: &SweepPlan, epsilon: f64) -> RegularizationConfig {
    RegularizationConfig::new(epsilon, plan.m, plan.k)
}

/// Richardson estimate of the x-quadrature error at each probe for the given
/// beta: exact data solved on this grid and on one with halved step.
fn quadrature_floor(
    problem: &Manufactured,
    reg: &RegularizationConfig,
    disc: &Discretization,
    probes: &[usize],
) -> Result<Vec<f64>> {
    let fine_disc = Discretization {
        n_x: 2 * disc.n_x - 1,
        ..*disc
    };
    let fine = manufactured_from_ansatz(problem.ansatz.clone(), problem.spec.constants, &fine_disc)?;
    let (coarse_sol, _) = solve_regularized(&problem.spec, &problem.data, reg, disc)?;
    let (fine_sol, _) = solve_regularized(&fine.spec, &fine.data, reg, &fine_disc)?;
    Ok(probes
        .iter()
        .map(|&j| {
            let du = coarse_sol.u[j].distance(&fine_sol.u[2 * j]);
            let dv = coarse_sol.v[j].distance(&fine_sol.v[2 * j]);
            (du * du + dv * dv).sqrt() * 4.0 / 3.0
        })
        .collect())
}

fn error_at(sol: &Trajectory, truth: &Trajectory, probes: &[usize]) -> Result<Vec<f64>> {
    let err = trajectory_error(sol, truth)?;
    Ok(probes.iter().map(|&j| err[j]).collect())
}

fn run_sweep(
    problem: &Manufactured,
    plan: &SweepPlan,
    disc: &Discretization,
    exec: Execution,
    noisy: bool,
) -> Result<Sweep> {
    let probes = probe_indices(problem, plan, disc)?;
    let seeds: Vec<u64> = if noisy { plan.seeds.clone() } else { vec![0] };
    let cells: Vec<(usize, u64)> = (0..plan.epsilons.len())
        .flat_map(|e| seeds.iter().map(move |&s| (e, s)))
        .collect();

    let floors: Vec<Result<Vec<f64>>> = map_ordered(exec, &plan.epsilons, |&eps| {
        quadrature_floor(problem, &reg_for(plan, eps), disc, &probes)
    });
    let floors = floors.into_iter().collect::<Result<Vec<_>>>()?;

    let outcomes: Vec<Result<(Vec<f64>, usize, bool)>> = map_ordered(exec, &cells, |&(e, seed)| {
        let eps = plan.epsilons[e];
        let reg = reg_for(plan, eps);
        let data = if noisy {
            make_noisy(&problem.data, eps, seed)?.data
        } else {
            problem.data.clone()
        };
        let (sol, diag) = solve_regularized(&problem.spec, &data, &reg, disc)?;
        Ok((error_at(&sol, &problem.truth, &probes)?, diag.iterations, diag.converged))
    });

    let mut rows = Vec::new();
    let mut sums = vec![vec![(0.0, 0usize); plan.epsilons.len()]; probes.len()];
    let (mut floored, mut diverged) = (0, 0);
    for (&(e, seed), outcome) in cells.iter().zip(outcomes) {
        let (errors, iterations, converged) = outcome?;
        let eps = plan.epsilons[e];
        if !converged {
            diverged += 1;
        }
        for (p, &err) in errors.iter().enumerate() {
            rows.push(ReportRow {
                epsilon: eps,
                seed,
                x: plan.probe_x[p],
                error: err,
                beta: reg_for(plan, eps).beta(),
                iterations,
                converged,
            });
            if !converged || !err.is_finite() {
                continue;
            }
            if err < FLOOR_FACTOR * floors[e][p] {
                floored += 1;
                continue;
            }
            sums[p][e].0 += err;
            sums[p][e].1 += 1;
        }
    }
    if diverged == cells.len() {
        return Err(Error::Diverged(format!("all {} sweep cells failed to converge", cells.len())));
    }
    let means = sums
        .into_iter()
        .map(|per_eps| per_eps.into_iter().map(|(s, c)| (c > 0).then(|| s / c as f64)).collect())
        .collect();
    Ok(Sweep {
        rows,
        means,
        floored,
        diverged,
    })
}

fn fitted_points(plan: &SweepPlan, means: &[Option<f64>]) -> Vec<(f64, f64)> {
    plan.epsilons
        .iter()
        .zip(means)
        .filter_map(|(&e, m)| m.map(|m| (e, m)))
        .collect()
}

fn non_increasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

fn fit(plan: &SweepPlan, a: f64, p: usize, means: &[Option<f64>]) -> Option<SlopeFit> {
    let pts = fitted_points(plan, means);
    let x = plan.probe_x[p];
    log_log_slope(&pts).map(|slope| SlopeFit {
        x,
        slope,
        points: pts.len(),
        theoretical: [plan.m * (1.0 - x / a), 1.0 - plan.m * x / a],
    })
}

fn finish(report: &mut StudyReport, sweep: &Sweep, start: Instant) {
    report.rows = sweep.rows.clone();
    report.sort_rows();
    report.metric("floored_rows", sweep.floored as f64);
    report.metric("diverged_cells", sweep.diverged as f64);
    report.runtime_ms = elapsed_ms(start);
}

fn loglaw_verdict(report: &mut StudyReport, plan: &SweepPlan, p: usize, means: &[Option<f64>]) {
    let pts = fitted_points(plan, means);
    let errors: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let decreasing = errors.len() >= 2 && strictly_decreasing(&errors);
    let slope = report.slope_at(plan.probe_x[p]);
    let shallow = slope.is_some_and(|s| s <= LOGLAW_MAX_SLOPE);
    report.metric("loglaw_decreasing", f64::from(u8::from(decreasing)));
    report.metric("loglaw_shallow", f64::from(u8::from(shallow)));
    report.verdicts.insert("loglaw_ok".into(), decreasing && shallow);
}

/// Noisy sweep over `plan.epsilons x plan.seeds`, with rate verdicts at
/// `0 <= x < a`, a monotonicity verdict at every probe, and the logarithmic
/// law when `a` is among the probes.
pub fn run_convergence_study(
    problem: &Manufactured,
    plan: &SweepPlan,
    disc: &Discretization,
    exec: Execution,
) -> Result<StudyReport> {
    let start = Instant::now();
    if plan.epsilons.len() < 2 {
        return Err(Error::Study("a rate fit needs at least two noise levels".into()));
    }
    let a = problem.spec.constants.a;
    let sweep = run_sweep(problem, plan, disc, exec, true)?;
    let mut report = StudyReport::new("convergence");
    for (p, means) in sweep.means.iter().enumerate() {
        let fitted = fit(plan, a, p, means);
        let x = plan.probe_x[p];
        let pts = fitted_points(plan, means);
        let errors: Vec<f64> = pts.iter().map(|p| p.1).collect();
        report
            .verdicts
            .insert(format!("monotone(x={x})"), errors.len() >= 2 && non_increasing(&errors, MONOTONE_TOLERANCE));
        if x < a {
            let tol = if x == 0.0 { BOUNDARY_RATE_TOLERANCE } else { INTERIOR_RATE_TOLERANCE };
            let ok = fitted
                .as_ref()
                .is_some_and(|f| (f.slope - f.theoretical[0]).abs() <= tol);
            report.verdicts.insert(format!("rate_ok(x={x})"), ok);
        }
        if let Some(f) = fitted {
            report.fitted_slopes.push(f);
        }
        if x == a {
            loglaw_verdict(&mut report, plan, p, means);
        }
    }
    finish(&mut report, &sweep, start);
    Ok(report)
}

/// Noise-free control: the same sweep with exact data, checking that the
/// regularization bias shrinks with beta.
pub fn run_bias_control(
    problem: &Manufactured,
    plan: &SweepPlan,
    disc: &Discretization,
    exec: Execution,
) -> Result<StudyReport> {
    let start = Instant::now();
    let a = problem.spec.constants.a;
    let sweep = run_sweep(problem, plan, disc, exec, false)?;
    let mut report = StudyReport::new("bias");
    for (p, means) in sweep.means.iter().enumerate() {
        let x = plan.probe_x[p];
        let errors: Vec<f64> = fitted_points(plan, means).iter().map(|p| p.1).collect();
        report
            .verdicts
            .insert(format!("bias_monotone(x={x})"), !errors.is_empty() && non_increasing(&errors, MONOTONE_TOLERANCE));
        if let Some(f) = fit(plan, a, p, means) {
            report.fitted_slopes.push(f);
        }
    }
    finish(&mut report, &sweep, start);
    Ok(report)
}

/// The boundary study on its own: `probe_x` must be exactly `[a]`.
pub fn run_loglaw_check(
    problem: &Manufactured,
    plan: &SweepPlan,
    disc: &Discretization,
    exec: Execution,
) -> Result<StudyReport> {
    let start = Instant::now();
    let a = problem.spec.constants.a;
    if plan.probe_x != [a] {
        return Err(Error::Config(format!("the boundary study probes x = {a} only")));
    }
    if plan.epsilons.len() < 2 {
        return Err(Error::Study("the boundary fit needs at least two noise levels".into()));
    }
    let sweep = run_sweep(problem, plan, disc, exec, true)?;
    let mut report = StudyReport::new("loglaw");
    if let Some(f) = fit(plan, a, 0, &sweep.means[0]) {
        report.fitted_slopes.push(f);
    }
    loglaw_verdict(&mut report, plan, 0, &sweep.means[0]);
    finish(&mut report, &sweep, start);
    Ok(report)
}
