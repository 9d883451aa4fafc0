mod common;

use std::f64::consts::PI;

use sgreg::model::{make_noisy, CauchyData, Constants, ProblemSpec};
use sgreg::solver::{
    evaluate_exact_mild, manufactured_problem, regularized_rhs, solve_regularized, Discretization,
    RegularizationConfig,
};

use common::{default_disc, disc, linear_oracle, nonlinear_constants, sup_gap};

fn linear_constants() -> Constants {
    let mut c = Constants::linear(1.0, PI, [1.0, 2.0]);
    c.sigma = [[0.5, 0.25], [-0.3, 0.1]];
    c
}

#[test]
fn converged_solution_is_a_fixed_point() {
    let d = default_disc();
    let p = manufactured_problem("smooth", nonlinear_constants(), &d).unwrap();
    let noisy = make_noisy(&p.data, 1e-3, 4).unwrap();
    let reg = RegularizationConfig::new(1e-3, 1.0, 1.0);
    let (traj, diag) = solve_regularized(&p.spec, &noisy.data, &reg, &d).unwrap();
    assert!(diag.converged);
    assert!(diag.residual <= 1e-9, "residual {}", diag.residual);
    let again = regularized_rhs(&p.spec, &noisy.data, &reg, &d, &traj).unwrap();
    assert!(again.sup_distance(&traj) <= 1e-9);
}

#[test]
fn solves_are_bit_reproducible() {
    let d = disc(8, 32, 51);
    let p = manufactured_problem("smooth", nonlinear_constants(), &d).unwrap();
    let reg = RegularizationConfig::new(1e-2, 0.8, 2.0);
    let noisy = make_noisy(&p.data, 1e-2, 9).unwrap();
    let first = solve_regularized(&p.spec, &noisy.data, &reg, &d).unwrap();
    let second = solve_regularized(&p.spec, &noisy.data, &reg, &d).unwrap();
    assert_eq!(first, second);
}

#[test]
fn zero_problem_stops_after_one_iteration() {
    let d = disc(6, 24, 21);
    let spec = ProblemSpec::unforced(nonlinear_constants(), 21, 6).unwrap();
    let reg = RegularizationConfig::new(1e-2, 1.0, 1.0);
    let (traj, diag) = solve_regularized(&spec, &CauchyData::zeros(6), &reg, &d).unwrap();
    assert!(diag.converged);
    assert_eq!(diag.iterations, 1);
    assert!(traj.u.iter().chain(&traj.v).all(|f| f.coeffs().iter().all(|&c| c == 0.0)));
}

#[test]
fn broken_contraction_is_reported_not_raised() {
    let mut c = nonlinear_constants();
    c.gamma = [1e4, 1e4];
    let d = Discretization {
        picard_max_iters: 30,
        ..disc(8, 32, 51)
    };
    let p = manufactured_problem("zero", c, &d).unwrap();
    let noisy = make_noisy(&p.data, 1e-2, 1).unwrap();
    let (traj, diag) = solve_regularized(&p.spec, &noisy.data, &RegularizationConfig::new(1e-2, 1.0, 1.0), &d).unwrap();
    assert!(!diag.converged);
    assert_eq!(diag.iterations, 30);
    assert_eq!(traj.x_nodes.len(), 51);
}

#[test]
fn linear_oracle_agrees_across_parameters() {
    let d = disc(4, 16, 61);
    let p = manufactured_problem("smooth", linear_constants(), &d).unwrap();
    for (eps, m, k, seed) in [(1e-1, 1.0, 1.0, 1), (1e-3, 0.5, 2.0, 2), (1e-5, 1.0, 3.0, 3)] {
        let noisy = make_noisy(&p.data, eps, seed).unwrap();
        let reg = RegularizationConfig::new(eps, m, k);
        let (traj, diag) = solve_regularized(&p.spec, &noisy.data, &reg, &d).unwrap();
        assert!(diag.converged);
        let gap = sup_gap(&traj, &linear_oracle(&p.spec, &noisy.data, &reg, &d));
        assert!(gap <= 1e-9, "eps {eps}, m {m}, k {k}: gap {gap:e}");
    }
}

#[test]
fn undamped_solve_equals_the_mild_evaluator() {
    // with beta = 0 the regularized map is the unregularized one
    let d = disc(4, 16, 101);
    let p = manufactured_problem("smooth", linear_constants(), &d).unwrap();
    let reg = RegularizationConfig::new(1e-2, 1.0, 1.0).with_beta(0.0);
    let (traj, diag) = solve_regularized(&p.spec, &p.data, &reg, &d).unwrap();
    assert!(diag.converged);
    let mild = evaluate_exact_mild(&p.spec, &p.data, &traj, &d).unwrap();
    assert!(!mild.is_saturated());
    let gap = mild.trajectory.sup_distance(&traj);
    assert!(gap <= 1e-10, "gap {gap:e}");
}

#[test]
fn mild_evaluator_reproduces_exact_solution() {
    let d = disc(4, 16, 401);
    let p = manufactured_problem("smooth", nonlinear_constants(), &d).unwrap();
    let mild = evaluate_exact_mild(&p.spec, &p.data, &p.truth, &d).unwrap();
    let err = mild.trajectory.sup_distance(&p.truth);
    assert!(err <= 1e-6, "error {err:e}");
}

#[test]
fn mild_evaluator_saturates_on_high_modes() {
    let mut c = nonlinear_constants();
    c.b = 0.5;
    let d = Discretization::new(sgreg::spectral_basis::BasisConfig::new(0.5, 200, 800).unwrap(), 21).unwrap();
    let p = manufactured_problem("smooth", c, &d).unwrap();
    let noisy = make_noisy(&p.data, 1e-3, 1).unwrap();
    let mild = evaluate_exact_mild(&p.spec, &noisy.data, &p.truth, &d).unwrap();
    assert!(mild.is_saturated());
    assert!(mild.trajectory.u.last().unwrap().coeffs().iter().any(|c| c.is_infinite()));
}
