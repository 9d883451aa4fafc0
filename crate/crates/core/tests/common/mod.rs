#![allow(dead_code)]

use std::f64::consts::PI;

use sgreg::model::{CauchyData, Constants, Equation, ProblemSpec};
use sgreg::solver::{Discretization, RegularizationConfig, Trajectory};
use sgreg::spectral_basis::BasisConfig;
use twofloat::TwoFloat;

/// The coupled problem used throughout: unit alphas, unit sine strength,
/// `delta = [[1, 0.5], [0.5, 1]]`, no linear coupling, on `(0, 1) x (0, pi)`.
pub fn nonlinear_constants() -> Constants {
    let mut c = Constants::linear(1.0, PI, [1.0, 1.0]);
    c.gamma = [1.0, 1.0];
    c.delta = [[1.0, 0.5], [0.5, 1.0]];
    c
}

pub fn disc(n_modes: usize, n_quad: usize, n_x: usize) -> Discretization {
    Discretization::new(BasisConfig::new(PI, n_modes, n_quad).unwrap(), n_x).unwrap()
}

pub fn default_disc() -> Discretization {
    disc(32, 128, 101)
}

/// Picard iteration of the linear (`gamma = 0`) discrete map in double-double
/// arithmetic, mode by mode. Returns `[u, v][j][n]`.
pub fn linear_oracle(
    spec: &ProblemSpec,
    data: &CauchyData,
    reg: &RegularizationConfig,
    disc: &Discretization,
) -> [Vec<Vec<f64>>; 2] {
    let c = &spec.constants;
    assert!(c.gamma == [0.0, 0.0], "oracle covers the linear case only");
    assert!(reg.k.fract() == 0.0, "oracle uses integer kernel orders");
    let m = disc.n_x;
    let n_modes = disc.basis.n_modes;
    let a = TwoFloat::from(c.a);
    let h = a / (m as f64 - 1.0);
    let beta = TwoFloat::from(reg.beta());
    let half = TwoFloat::from(0.5);

    let mut out = [vec![vec![0.0; n_modes]; m], vec![vec![0.0; n_modes]; m]];
    for n in 0..n_modes {
        let omega = TwoFloat::from((n + 1) as f64) * TwoFloat::from(PI) / TwoFloat::from(c.b);
        let lambda = omega * omega;
        // per equation: data term at each node and kernel at each offset
        let mut data_term = [vec![TwoFloat::from(0.0); m], vec![TwoFloat::from(0.0); m]];
        let mut kernel = [vec![TwoFloat::from(0.0); m], vec![TwoFloat::from(0.0); m]];
        for eq in Equation::BOTH {
            let i = eq.index();
            let s = (TwoFloat::from(c.alpha[i]) * lambda).sqrt();
            let (w0, w1) = match eq {
                Equation::U => (data.u0.coeffs()[n], data.u1.coeffs()[n]),
                Equation::V => (data.v0.coeffs()[n], data.v1.coeffs()[n]),
            };
            let (w0, w1) = (TwoFloat::from(w0), TwoFloat::from(w1));
            for j in 0..m {
                let x = h * j as f64;
                let damping = if reg.beta() == 0.0 {
                    TwoFloat::from(0.0)
                } else {
                    TwoFloat::from(2.0) * beta * s.powi(reg.k as i32) * (s * (a - x)).exp()
                };
                let psi = (damping + TwoFloat::from(2.0) * (-s * x).exp()).recip();
                let e = half * (-s * x).exp();
                data_term[i][j] = (psi + e) * w0 + (psi - e) / s * w1;
                kernel[i][j] = (psi - e) / s;
            }
        }
        let forcing = |i: usize, j: usize| TwoFloat::from(spec.forcing(Equation::BOTH[i])[j].coeffs()[n]);
        let mut w = [data_term[0].clone(), data_term[1].clone()];
        for _ in 0..1000 {
            let f: [Vec<TwoFloat>; 2] = std::array::from_fn(|i| {
                (0..m)
                    .map(|l| forcing(i, l) - TwoFloat::from(c.sigma[i][0]) * w[0][l] - TwoFloat::from(c.sigma[i][1]) * w[1][l])
                    .collect()
            });
            let mut change = 0.0_f64;
            let mut next = data_term.clone();
            for i in 0..2 {
                for j in 1..m {
                    let mut acc = half * (kernel[i][j] * f[i][0] + kernel[i][0] * f[i][j]);
                    for l in 1..j {
                        acc += kernel[i][j - l] * f[i][l];
                    }
                    next[i][j] += h * acc;
                    change = change.max((next[i][j] - w[i][j]).abs().hi());
                }
            }
            w = next;
            if change < 1e-28 {
                break;
            }
        }
        for (component, values) in out.iter_mut().zip(&w) {
            for (row, value) in component.iter_mut().zip(values) {
                row[n] = value.hi();
            }
        }
    }
    out
}

/// Largest coefficient gap between a trajectory and `[u, v][j][n]` values.
pub fn sup_gap(traj: &Trajectory, reference: &[Vec<Vec<f64>>; 2]) -> f64 {
    let mut worst = 0.0_f64;
    for (j, (u, v)) in traj.u.iter().zip(&traj.v).enumerate() {
        let gaps = u.coeffs().iter().zip(&reference[0][j]).chain(v.coeffs().iter().zip(&reference[1][j]));
        for (x, y) in gaps {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}
