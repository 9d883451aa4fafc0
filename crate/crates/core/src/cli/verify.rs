//! Self-checks run by `sgreg verify`: basis, filter degeneracy, model
//! properties and the filter-bound sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exec::Execution;
use crate::experiments::{run_lemma_sweep, LemmaGrid, StudyReport};
use crate::kernel::{filter_value, KernelParams};
use crate::model::{lipschitz_constants, make_noisy, nonlinearity_f, CauchyData, Constants, Equation, ProblemSpec};
use crate::spectral_basis::{SpectralBasis, SpectralField};
use crate::solver::Discretization;

const SEED: u64 = 0x5eed;

fn random_field(rng: &mut ChaCha8Rng, n: usize) -> SpectralField {
    SpectralField::from_coeffs((0..n).map(|i| rng.random_range(-1.0..1.0) / (1 + i) as f64).collect())
}

fn orthonormality_error(basis: &SpectralBasis) -> f64 {
    let n = basis.n_modes();
    let modes: Vec<Vec<f64>> = (1..=n)
        .map(|i| basis.synthesize_on_nodes(&SpectralField::mode(n, i, 1.0)).into_values())
        .collect();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let prod: Vec<f64> = modes[i].iter().zip(&modes[j]).map(|(x, y)| x * y).collect();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((basis.integrate(&prod) - target).abs());
        }
    }
    worst
}

fn parseval_error(basis: &SpectralBasis, rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let f = random_field(rng, basis.n_modes());
        let g = basis.synthesize_on_nodes(&f);
        let sq: Vec<f64> = g.values().iter().map(|v| v * v).collect();
        let back = basis.analyze_values(g.values());
        worst = worst
            .max((basis.integrate(&sq).sqrt() - f.l2_norm()).abs())
            .max(back.distance(&f));
    }
    worst
}

fn degeneracy_error(c: &Constants, basis: &SpectralBasis) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &alpha in &c.alpha {
        let p = KernelParams::new(alpha, c.a, 1.0, 0.0)?;
        for &lambda in basis.eigenvalues().iter().take(50) {
            let s = (alpha * lambda).sqrt();
            for j in 0..=20 {
                let x = c.a * j as f64 / 20.0;
                let exact = 0.5 * (s * x).exp();
                worst = worst.max(((filter_value(&p, lambda, x)? - exact) / exact).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest excess of `|F(u) - F(U)|` over the row bound, in L², on random pairs.
fn lipschitz_excess(c: &Constants, basis: &SpectralBasis, rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = basis.n_modes();
    let spec = ProblemSpec::unforced(*c, 1, n)?;
    let l2 = |v: &[f64]| basis.integrate(&v.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let [u, v, uu, vv] = std::array::from_fn(|_| basis.synthesize_on_nodes(&random_field(rng, n)));
        let du: Vec<f64> = u.values().iter().zip(uu.values()).map(|(x, y)| x - y).collect();
        let dv: Vec<f64> = v.values().iter().zip(vv.values()).map(|(x, y)| x - y).collect();
        for eq in Equation::BOTH {
            let (lu, lv) = c.lipschitz_row(eq);
            let f = nonlinearity_f(eq, &spec, basis, 0, &u, &v)?;
            let g = nonlinearity_f(eq, &spec, basis, 0, &uu, &vv)?;
            let df: Vec<f64> = f.values().iter().zip(g.values()).map(|(x, y)| x - y).collect();
            worst = worst.max(l2(&df) - (lu * l2(&du) + lv * l2(&dv)));
        }
    }
    Ok(worst)
}

fn noise_calibration_error(n: usize) -> Result<f64> {
    let data = CauchyData::zeros(n);
    let mut worst = 0.0_f64;
    for seed in 0..50 {
        let eps = 10f64.powi(-((seed % 7) as i32));
        let s = make_noisy(&data, eps, seed)?;
        for f in s.noise.fields() {
            worst = worst.max((f.l2_norm() - eps).abs() / eps);
        }
    }
    Ok(worst)
}

pub fn run_verify(constants: &Constants, disc: &Discretization, exec: Execution) -> Result<StudyReport> {
    let basis = SpectralBasis::new(disc.basis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let grid = LemmaGrid::standard(constants.a, constants.b, vec![0.5, 1.0, 2.0]);
    let mut report = run_lemma_sweep(&grid, exec)?;
    report.kind = "verify".into();

    let checks = [
        ("basis_orthonormal", orthonormality_error(&basis), 1e-10),
        ("basis_parseval", parseval_error(&basis, &mut rng), 1e-10),
        ("kernel_degenerate", degeneracy_error(constants, &basis)?, 1e-13),
        ("model_lipschitz", lipschitz_excess(constants, &basis, &mut rng)?, 1e-12),
        ("model_noise_norm", noise_calibration_error(basis.n_modes())?, 4.0 * f64::EPSILON),
    ];
    for (name, value, tol) in checks {
        report.metric(name, value);
        report.verdicts.insert(name.to_string(), value <= tol);
    }
    report.metric("lipschitz_c", lipschitz_constants(constants).c);
    Ok(report)
}
