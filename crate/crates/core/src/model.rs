//! Problem data: constants, forcing, Cauchy data, the sine nonlinearity and
//! the calibrated measurement-noise model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_basis::{BasisConfig, GridFunction, SpectralBasis, SpectralField};

/// Which equation of the coupled system. The first governs `u`, the second `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Equation {
    U,
    V,
}

impl Equation {
    pub const BOTH: [Equation; 2] = [Equation::U, Equation::V];

    pub fn index(self) -> usize {
        match self {
            Equation::U => 0,
            Equation::V => 1,
        }
    }
}

/// Domain extents and physical constants of
/// `w_xx + alpha_i w_yy + gamma_i sin(delta_i1 u + delta_i2 v) + sigma_i1 u + sigma_i2 v = f_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub a: f64,
    pub b: f64,
    pub alpha: [f64; 2],
    pub gamma: [f64; 2],
    pub delta: [[f64; 2]; 2],
    pub sigma: [[f64; 2]; 2],
}

impl Constants {
    /// Linear, uncoupled constants: `gamma = sigma = delta = 0`.
    pub fn linear(a: f64, b: f64, alpha: [f64; 2]) -> Self {
        Self {
            a,
            b,
            alpha,
            gamma: [0.0; 2],
            delta: [[0.0; 2]; 2],
            sigma: [[0.0; 2]; 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite() && self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::Config(format!(
                "domain extents must be positive, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if !self.alpha.iter().all(|&al| al > 0.0 && al.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {:?}", self.alpha)));
        }
        let all = self
            .gamma
            .iter()
            .chain(self.delta.iter().flatten())
            .chain(self.sigma.iter().flatten());
        if !all.into_iter().all(|v| v.is_finite()) {
            return Err(Error::Config("gamma, delta and sigma must be finite".into()));
        }
        Ok(())
    }

    /// `min(alpha_1, alpha_2)`.
    pub fn alpha_min(&self) -> f64 {
        self.alpha[0].min(self.alpha[1])
    }

    /// Pointwise Lipschitz coefficients of `F_i` in `u` and in `v`:
    /// `(|gamma_i||delta_i1| + |sigma_i1|, |gamma_i||delta_i2| + |sigma_i2|)`.
    pub fn lipschitz_row(&self, eq: Equation) -> (f64, f64) {
        let i = eq.index();
        let g = self.gamma[i].abs();
        (
            g * self.delta[i][0].abs() + self.sigma[i][0].abs(),
            g * self.delta[i][1].abs() + self.sigma[i][1].abs(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzConstants {
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
}

pub fn lipschitz_constants(constants: &Constants) -> LipschitzConstants {
    let (l11, l12) = constants.lipschitz_row(Equation::U);
    let (l21, l22) = constants.lipschitz_row(Equation::V);
    let c1 = l11 * l11 + l12 * l12;
    let c2 = l21 * l21 + l22 * l22;
    LipschitzConstants { c1, c2, c: c1 + c2 }
}

/// Constants plus forcing sampled on the solver's x-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub constants: Constants,
    pub f1: Vec<SpectralField>,
    pub f2: Vec<SpectralField>,
}

impl ProblemSpec {
    pub fn new(constants: Constants, f1: Vec<SpectralField>, f2: Vec<SpectralField>) -> Result<Self> {
        let spec = Self { constants, f1, f2 };
        spec.validate()?;
        Ok(spec)
    }

    /// Zero forcing on `n_x` nodes.
    pub fn unforced(constants: Constants, n_x: usize, n_modes: usize) -> Result<Self> {
        let zero = vec![SpectralField::zeros(n_modes); n_x];
        Self::new(constants, zero.clone(), zero)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if self.f1.len() != self.f2.len() {
            return Err(Error::IncompatibleGrid(format!(
                "forcing grids differ: {} vs {} nodes",
                self.f1.len(),
                self.f2.len()
            )));
        }
        if let Some(first) = self.f1.first() {
            let n = first.n_modes();
            if self.f1.iter().chain(&self.f2).any(|f| f.n_modes() != n) {
                return Err(Error::IncompatibleGrid("forcing fields use different bases".into()));
            }
        }
        Ok(())
    }

    pub fn n_x(&self) -> usize {
        self.f1.len()
    }

    pub fn forcing(&self, eq: Equation) -> &[SpectralField] {
        match eq {
            Equation::U => &self.f1,
            Equation::V => &self.f2,
        }
    }
}

/// Values and x-derivatives of `u` and `v` at `x = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    pub u0: SpectralField,
    pub u1: SpectralField,
    pub v0: SpectralField,
    pub v1: SpectralField,
}

impl CauchyData {
    pub fn zeros(n_modes: usize) -> Self {
        let z = SpectralField::zeros(n_modes);
        Self {
            u0: z.clone(),
            u1: z.clone(),
            v0: z.clone(),
            v1: z,
        }
    }

    pub fn validate(&self, n_modes: usize) -> Result<()> {
        if self.fields().iter().any(|f| f.n_modes() != n_modes) {
            return Err(Error::IncompatibleGrid(format!(
                "Cauchy data must have {n_modes} modes in every field"
            )));
        }
        Ok(())
    }

    pub fn fields(&self) -> [&SpectralField; 4] {
        [&self.u0, &self.u1, &self.v0, &self.v1]
    }

    fn fields_mut(&mut self) -> [&mut SpectralField; 4] {
        [&mut self.u0, &mut self.u1, &mut self.v0, &mut self.v1]
    }

    /// `(|u0 - U0|² + |v0 - V0|², |u1 - U1|² + |v1 - V1|²)`.
    pub fn squared_differences(&self, other: &CauchyData) -> (f64, f64) {
        (
            self.u0.distance(&other.u0).powi(2) + self.v0.distance(&other.v0).powi(2),
            self.u1.distance(&other.u1).powi(2) + self.v1.distance(&other.v1).powi(2),
        )
    }
}

/// `F_i(u, v) = f_i - gamma_i sin(delta_i1 u + delta_i2 v) - sigma_i1 u - sigma_i2 v`
/// evaluated pointwise on the nodes of `u` and `v`.
pub fn nonlinearity_f(
    eq: Equation,
    spec: &ProblemSpec,
    basis: &SpectralBasis,
    x_index: usize,
    u: &GridFunction,
    v: &GridFunction,
) -> Result<GridFunction> {
    if !u.same_nodes(v) {
        return Err(Error::IncompatibleGrid("u and v sampled on different nodes".into()));
    }
    let forcing = spec.forcing(eq).get(x_index).ok_or_else(|| {
        Error::IncompatibleGrid(format!(
            "x index {x_index} outside forcing grid of {} nodes",
            spec.n_x()
        ))
    })?;
    let f = basis.synthesize(forcing, u.nodes())?;
    let i = eq.index();
    let c = &spec.constants;
    let values = f
        .values()
        .iter()
        .zip(u.values().iter().zip(v.values()))
        .map(|(&fi, (&uu, &vv))| {
            fi - c.gamma[i] * (c.delta[i][0] * uu + c.delta[i][1] * vv).sin()
                - c.sigma[i][0] * uu
                - c.sigma[i][1] * vv
        })
        .collect();
    GridFunction::new(u.nodes().to_vec(), values)
}

/// Gevrey class order `s` and index `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub s: f64,
    pub nu: f64,
}

/// `sqrt(sum_n lambda_n^s exp(2 nu lambda_n) |c_n|²)`.
///
/// Returns `f64::INFINITY` when the weighted sum exceeds the representable
/// range. `nu = 0` is accepted and, with `s = 0`, gives the plain L² norm.
pub fn gevrey_norm(f: &SpectralField, p: GevreyParams, cfg: &BasisConfig) -> Result<f64> {
    if !(p.nu >= 0.0) {
        return Err(Error::Config(format!("Gevrey index nu must be >= 0, got {}", p.nu)));
    }
    if f.n_modes() != cfg.n_modes {
        return Err(Error::IncompatibleGrid(format!(
            "field has {} modes, basis has {}",
            f.n_modes(),
            cfg.n_modes
        )));
    }
    let lambdas: Vec<f64> = (1..=cfg.n_modes)
        .map(|n| crate::spectral_basis::eigenvalue(n, cfg))
        .collect::<Result<_>>()?;

    let direct: f64 = f
        .coeffs()
        .iter()
        .zip(&lambdas)
        .map(|(&c, &l)| l.powf(p.s) * (2.0 * p.nu * l).exp() * c * c)
        .sum();
    if direct.is_finite() {
        return Ok(direct.sqrt());
    }

    // log-domain fallback; zero coefficients contribute nothing
    let logs: Vec<f64> = f
        .coeffs()
        .iter()
        .zip(&lambdas)
        .filter(|(c, _)| **c != 0.0)
        .map(|(&c, &l)| p.s * l.ln() + 2.0 * p.nu * l + 2.0 * c.abs().ln())
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|t| (t - m).exp()).sum();
    Ok((0.5 * (m + sum.ln())).exp())
}

/// Cauchy data perturbed by noise of prescribed level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisySample {
    pub data: CauchyData,
    pub epsilon: f64,
    pub seed: u64,
    /// The perturbation that was added, field by field.
    pub noise: CauchyData,
}

/// Adds to each of `u0, u1, v0, v1` an independent Gaussian coefficient
/// perturbation rescaled to Euclidean norm exactly `epsilon`.
pub fn make_noisy(data: &CauchyData, epsilon: f64, seed: u64) -> Result<NoisySample> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("noise level must be positive, got {epsilon}")));
    }
    let n = data.u0.n_modes();
    data.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = CauchyData::zeros(n);
    for field in noise.fields_mut() {
        let draw: Vec<f64> = loop {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            if v.iter().any(|&x| x != 0.0) {
                break v;
            }
        };
        let norm = draw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = epsilon / norm;
        *field = SpectralField::from_coeffs(draw.into_iter().map(|x| x * scale).collect());
    }
    let noisy = CauchyData {
        u0: data.u0.add(&noise.u0),
        u1: data.u1.add(&noise.u1),
        v0: data.v0.add(&noise.v0),
        v1: data.v1.add(&noise.v1),
    };
    Ok(NoisySample {
        data: noisy,
        epsilon,
        seed,
        noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_basis::l2_norm;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn basis() -> SpectralBasis {
        SpectralBasis::new(BasisConfig::new(PI, 6, 32).unwrap()).unwrap()
    }

    fn constants() -> Constants {
        Constants::linear(1.0, PI, [1.0, 1.0])
    }

    fn grid(basis: &SpectralBasis, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::sample(basis.nodes(), f).unwrap()
    }

    #[test]
    fn nonlinearity_examples() {
        let basis = basis();
        let f1 = vec![SpectralField::from_coeffs(vec![0.3, -0.2, 0.0, 0.1, 0.0, 0.0])];
        let spec = ProblemSpec::new(constants(), f1.clone(), f1.clone()).unwrap();
        let u = grid(&basis, |y| y.cos());
        let v = grid(&basis, |y| y.sin());
        let out = nonlinearity_f(Equation::U, &spec, &basis, 0, &u, &v).unwrap();
        let forcing = basis.synthesize_on_nodes(&f1[0]);
        for (a, b) in out.values().iter().zip(forcing.values()) {
            assert!((a - b).abs() < 1e-14);
        }

        let zero_spec = ProblemSpec::unforced(constants(), 1, 6).unwrap();
        let z = grid(&basis, |_| 0.0);
        assert!(nonlinearity_f(Equation::U, &zero_spec, &basis, 0, &z, &z)
            .unwrap()
            .values()
            .iter()
            .all(|&x| x == 0.0));

        let mut c = constants();
        c.gamma[0] = 1.0;
        c.delta[0] = [1.0, 0.0];
        let spec = ProblemSpec::unforced(c, 1, 6).unwrap();
        let u = grid(&basis, |_| FRAC_PI_2);
        let out = nonlinearity_f(Equation::U, &spec, &basis, 0, &u, &z).unwrap();
        assert!(out.values().iter().all(|&x| (x + 1.0).abs() < 1e-15));
    }

    #[test]
    fn nonlinearity_rejects_bad_grids() {
        let basis = basis();
        let spec = ProblemSpec::unforced(constants(), 2, 6).unwrap();
        let u = grid(&basis, |_| 0.0);
        let w = GridFunction::sample(&[0.0, 1.0], |_| 0.0).unwrap();
        assert!(matches!(
            nonlinearity_f(Equation::U, &spec, &basis, 0, &u, &w),
            Err(Error::IncompatibleGrid(_))
        ));
        assert!(matches!(
            nonlinearity_f(Equation::V, &spec, &basis, 5, &u, &u),
            Err(Error::IncompatibleGrid(_))
        ));
    }

    #[test]
    fn lipschitz_examples() {
        let c = constants();
        assert_eq!(lipschitz_constants(&c), LipschitzConstants { c1: 0.0, c2: 0.0, c: 0.0 });
        let mut c = constants();
        c.gamma = [1.0, 1.0];
        c.delta = [[1.0, 1.0], [1.0, 1.0]];
        assert_eq!(lipschitz_constants(&c), LipschitzConstants { c1: 2.0, c2: 2.0, c: 4.0 });
        let mut c = constants();
        c.gamma[0] = 2.0;
        c.delta[0][0] = 0.5;
        c.sigma[0][0] = 1.0;
        let l = lipschitz_constants(&c);
        assert_eq!((l.c1, l.c), (4.0, 4.0));
    }

    #[test]
    fn gevrey_examples() {
        let cfg = BasisConfig::new(PI, 2, 8).unwrap();
        let f = SpectralField::from_coeffs(vec![-1.5, 0.0]);
        let p = GevreyParams { s: 2.0, nu: 0.3 };
        // lambda_1 = 1 when b = pi
        assert!((gevrey_norm(&f, p, &cfg).unwrap() - 1.5 * (0.3f64).exp()).abs() < 1e-14);
        let f = SpectralField::from_coeffs(vec![1.0, 1.0]);
        let g = gevrey_norm(&f, GevreyParams { s: 1.0, nu: 0.1 }, &cfg).unwrap();
        assert!((g - 3.181_755_250_192_893).abs() < 1e-14);
        let f = SpectralField::from_coeffs(vec![0.4, -2.0]);
        assert_eq!(gevrey_norm(&f, GevreyParams { s: 0.0, nu: 0.0 }, &cfg).unwrap(), l2_norm(&f));
    }

    #[test]
    fn gevrey_overflow_is_infinite() {
        let cfg = BasisConfig::new(PI, 40, 160).unwrap();
        let f = SpectralField::mode(40, 40, 1.0);
        // lambda_40 = 1600, exp(2 * 1 * 1600) is far beyond f64
        assert_eq!(gevrey_norm(&f, GevreyParams { s: 1.0, nu: 1.0 }, &cfg).unwrap(), f64::INFINITY);
        // a large weight multiplied by a tiny coefficient stays finite
        let f = SpectralField::mode(40, 20, 1e-200);
        let g = gevrey_norm(&f, GevreyParams { s: 0.0, nu: 0.3 }, &cfg).unwrap();
        let expected = (0.3 * 400.0 + (1e-200f64).ln()).exp();
        assert!(((g - expected) / expected).abs() < 1e-12);
    }

    fn sample_data(n: usize) -> CauchyData {
        let f = |k: f64| SpectralField::from_coeffs((0..n).map(|i| k / (1.0 + i as f64)).collect());
        CauchyData {
            u0: f(1.0),
            u1: f(-0.5),
            v0: f(0.25),
            v1: f(2.0),
        }
    }

    #[test]
    fn noise_is_calibrated_and_deterministic() {
        let data = sample_data(16);
        let s = make_noisy(&data, 1e-3, 7).unwrap();
        for (noisy, clean) in s.data.fields().iter().zip(data.fields()) {
            let d = noisy.distance(clean);
            assert!((d - 1e-3).abs() < 1e-15, "{d}");
        }
        for n in s.noise.fields() {
            assert!((l2_norm(n) - 1e-3).abs() <= 4.0 * f64::EPSILON * 1e-3);
        }
        assert_eq!(make_noisy(&data, 1e-3, 7).unwrap(), s);
        let t = make_noisy(&data, 1e-3, 8).unwrap();
        assert_ne!(t.noise, s.noise);
        assert!(t.noise.fields().iter().all(|n| (l2_norm(n) - 1e-3).abs() <= 4.0 * f64::EPSILON * 1e-3));
        assert!(make_noisy(&data, 0.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn noise_norm_within_four_ulps(eps_exp in -10.0f64..0.0, seed in any::<u64>(), n in 1usize..40) {
            let eps = 10f64.powf(eps_exp);
            let s = make_noisy(&CauchyData::zeros(n), eps, seed).unwrap();
            for f in s.noise.fields() {
                prop_assert!((l2_norm(f) - eps).abs() <= 4.0 * f64::EPSILON * eps);
            }
        }

        #[test]
        fn lipschitz_bound_is_realized(
            gamma in proptest::array::uniform2(-2.0f64..2.0),
            delta in proptest::array::uniform4(-1.5f64..1.5),
            sigma in proptest::array::uniform4(-1.0f64..1.0),
            coeffs in proptest::collection::vec(-1.0f64..1.0, 24),
        ) {
            let basis = basis();
            let c = Constants {
                gamma,
                delta: [[delta[0], delta[1]], [delta[2], delta[3]]],
                sigma: [[sigma[0], sigma[1]], [sigma[2], sigma[3]]],
                ..constants()
            };
            let spec = ProblemSpec::unforced(c, 1, 6).unwrap();
            let field = |i: usize| basis.synthesize_on_nodes(&SpectralField::from_coeffs(coeffs[6 * i..6 * i + 6].to_vec()));
            let (u, v, uu, vv) = (field(0), field(1), field(2), field(3));
            for eq in Equation::BOTH {
                let (lu, lv) = c.lipschitz_row(eq);
                let a = nonlinearity_f(eq, &spec, &basis, 0, &u, &v).unwrap();
                let b = nonlinearity_f(eq, &spec, &basis, 0, &uu, &vv).unwrap();
                let mut diff = Vec::new();
                for j in 0..basis.nodes().len() {
                    let lhs = (a.values()[j] - b.values()[j]).abs();
                    let du = (u.values()[j] - uu.values()[j]).abs();
                    let dv = (v.values()[j] - vv.values()[j]).abs();
                    prop_assert!(lhs <= lu * du + lv * dv + 1e-13);
                    diff.push(lhs * lhs);
                }
                let sq = |g: &GridFunction, h: &GridFunction| {
                    let d: Vec<f64> = g.values().iter().zip(h.values()).map(|(x, y)| (x - y).powi(2)).collect();
                    basis.integrate(&d).sqrt()
                };
                prop_assert!(basis.integrate(&diff).sqrt() <= lu * sq(&u, &uu) + lv * sq(&v, &vv) + 1e-12);
            }
        }

        #[test]
        fn sine_part_is_odd(
            gamma in proptest::array::uniform2(-2.0f64..2.0),
            delta in proptest::array::uniform4(-1.5f64..1.5),
            coeffs in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let basis = basis();
            let c = Constants { gamma, delta: [[delta[0], delta[1]], [delta[2], delta[3]]], ..constants() };
            let spec = ProblemSpec::unforced(c, 1, 6).unwrap();
            let u = basis.synthesize_on_nodes(&SpectralField::from_coeffs(coeffs[..6].to_vec()));
            let v = basis.synthesize_on_nodes(&SpectralField::from_coeffs(coeffs[6..].to_vec()));
            let neg = |g: &GridFunction| GridFunction::new(g.nodes().to_vec(), g.values().iter().map(|x| -x).collect()).unwrap();
            for eq in Equation::BOTH {
                let p = nonlinearity_f(eq, &spec, &basis, 0, &u, &v).unwrap();
                let m = nonlinearity_f(eq, &spec, &basis, 0, &neg(&u), &neg(&v)).unwrap();
                for (x, y) in p.values().iter().zip(m.values()) {
                    prop_assert!((x + y).abs() < 1e-14);
                }
            }
        }
    }
}
