//! Two noisy samples, two solves, and the explicit stability bound on their
//! squared distance.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::exec::{map_ordered, Execution};
use crate::kernel::{stability_growth, KernelParams};
use crate::model::{lipschitz_constants, make_noisy, CauchyData, ProblemSpec};
use crate::solver::{solve_regularized, Discretization, RegularizationConfig, SolveDiagnostics, Trajectory};
use crate::spectral_basis::eigenvalue;

use super::{elapsed_ms, ReportRow, StudyReport};

/// Relative slack on the bound for rounding in `d(x)` itself.
const BOUND_SLACK: f64 = 1e-12;

/// Solves from `data + noise(seeds.0)` and `data + noise(seeds.1)` at level
/// `reg.epsilon` and checks
/// `d(x) <= G(x) [D0 + 2 D1 / (alpha lambda_1)] exp(2 C x / (alpha lambda_1))`
/// at every node, where `G` is the growth factor of the filter bound. When
/// `G < 1` somewhere on `[0, a]` the bound's premise fails and the study is
/// reported as inapplicable instead.
pub fn run_stability_check(
    spec: &ProblemSpec,
    data: &CauchyData,
    reg: &RegularizationConfig,
    disc: &Discretization,
    seeds: (u64, u64),
    exec: Execution,
) -> Result<StudyReport> {
    let start = Instant::now();
    let c = &spec.constants;
    let a = c.a;
    reg.validate_theorem_mode(a)?;
    let beta = reg.beta();

    let pair = [seeds.0, seeds.1];
    let solved: Vec<Result<(CauchyData, Trajectory, SolveDiagnostics)>> = map_ordered(exec, &pair, |&seed| {
        let sample = make_noisy(data, reg.epsilon, seed)?;
        let (traj, diag) = solve_regularized(spec, &sample.data, reg, disc)?;
        if !diag.converged {
            return Err(Error::Diverged(format!("stability solve for seed {seed} did not converge")));
        }
        Ok((sample.data, traj, diag))
    });
    let mut solved = solved.into_iter();
    let (data_a, traj_a, diag_a) = solved.next().expect("two solves")?;
    let (data_b, traj_b, diag_b) = solved.next().expect("two solves")?;

    let (d0, d1) = data_a.squared_differences(&data_b);
    let alpha = c.alpha_min();
    let lambda1 = eigenvalue(1, &disc.basis)?;
    let scale = alpha * lambda1;
    let lip = lipschitz_constants(c).c;
    let growth_params = KernelParams::new(alpha, a, reg.k, beta)?;

    let mut report = StudyReport::new("stability");
    let xs = &traj_a.x_nodes;
    let growth: Vec<f64> = xs
        .iter()
        .map(|&x| stability_growth(&growth_params, x))
        .collect::<Result<_>>()?;
    let applicable = growth.iter().all(|&g| g >= 1.0);

    let mut max_ratio = 0.0_f64;
    let mut violations = 0usize;
    for (j, &x) in xs.iter().enumerate() {
        let du = traj_a.u[j].distance(&traj_b.u[j]);
        let dv = traj_a.v[j].distance(&traj_b.v[j]);
        let d = du * du + dv * dv;
        let bound = growth[j] * (d0 + 2.0 / scale * d1) * (2.0 * lip * x / scale).exp();
        if bound > 0.0 {
            max_ratio = max_ratio.max(d / bound);
        }
        if d > bound * (1.0 + BOUND_SLACK) {
            violations += 1;
        }
        report.rows.push(ReportRow {
            epsilon: reg.epsilon,
            seed: seeds.0,
            x,
            error: d,
            beta,
            iterations: diag_a.iterations.max(diag_b.iterations),
            converged: true,
        });
    }

    report.metric("seed_a", seeds.0 as f64);
    report.metric("seed_b", seeds.1 as f64);
    report.metric("delta0", d0);
    report.metric("delta1", d1);
    report.metric("lipschitz_c", lip);
    report.metric("growth_at_a", growth[growth.len() - 1]);
    report.metric("max_ratio", max_ratio);
    report.metric("violations", violations as f64);
    report.metric("applicable", f64::from(u8::from(applicable)));
    if applicable {
        report.verdicts.insert("theorem3_ok".into(), violations == 0);
    } else {
        report
            .notes
            .push(format!("inapplicable: growth factor below 1 on [0, {a}] for beta = {beta}"));
    }
    report.sort_rows();
    report.runtime_ms = elapsed_ms(start);
    Ok(report)
}
