//! Regularized and exact mild-solution solvers on a uniform x-grid.
//!
//! Both solvers work mode by mode in the cosine basis. The x-integrals run
//! over grid nodes with the composite trapezoid rule, and the sine
//! nonlinearity is evaluated pseudo-spectrally (synthesize, apply, project).

mod manufactured;
mod mild;
mod regularized;

pub use manufactured::{manufactured_from_ansatz, manufactured_problem, recipe, recipe_names, Ansatz, AnsatzTerm, Manufactured, Profile};
pub use mild::{evaluate_exact_mild, MildEvaluation};
pub use regularized::{regularized_rhs, solve_regularized};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::model::{CauchyData, Constants, Equation, ProblemSpec};
use crate::spectral_basis::{BasisConfig, SpectralBasis, SpectralField};

pub const DEFAULT_PICARD_TOL: f64 = 1e-10;
pub const DEFAULT_PICARD_MAX_ITERS: usize = 200;

/// Grid and iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub basis: BasisConfig,
    /// Number of uniform x-nodes on `[0, a]`, endpoints included.
    pub n_x: usize,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
}

impl Discretization {
    pub fn new(basis: BasisConfig, n_x: usize) -> Result<Self> {
        let d = Self {
            basis,
            n_x,
            picard_tol: DEFAULT_PICARD_TOL,
            picard_max_iters: DEFAULT_PICARD_MAX_ITERS,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        self.basis.validate()?;
        if self.n_x < 2 {
            return Err(Error::Config(format!("n_x must be at least 2, got {}", self.n_x)));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::Config(format!("picard_tol must be positive, got {}", self.picard_tol)));
        }
        if self.picard_max_iters == 0 {
            return Err(Error::Config("picard_max_iters must be at least 1".into()));
        }
        Ok(())
    }

    pub fn step(&self, a: f64) -> f64 {
        a / (self.n_x - 1) as f64
    }

    pub fn x_nodes(&self, a: f64) -> Vec<f64> {
        let h = self.step(a);
        let mut xs: Vec<f64> = (0..self.n_x).map(|j| j as f64 * h).collect();
        xs[self.n_x - 1] = a;
        xs
    }

    /// Index of the grid node at `x`, which must coincide with a node.
    pub fn node_index(&self, a: f64, x: f64) -> Result<usize> {
        let h = self.step(a);
        let j = (x / h).round();
        if !(0.0..=(self.n_x - 1) as f64).contains(&j) || (j * h - x).abs() > 1e-9 * h.max(a) {
            return Err(Error::Config(format!("x = {x} is not a node of the {}-point grid on [0, {a}]", self.n_x)));
        }
        Ok(j as usize)
    }
}

/// Noise level, coupling exponent `m`, kernel order `k`, and the derived
/// regularization parameter `beta = epsilon^m` unless overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationConfig {
    pub epsilon: f64,
    pub m: f64,
    pub k: f64,
    pub beta_override: Option<f64>,
}

impl RegularizationConfig {
    pub fn new(epsilon: f64, m: f64, k: f64) -> Self {
        Self {
            epsilon,
            m,
            k,
            beta_override: None,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta_override = Some(beta);
        self
    }

    pub fn beta(&self) -> f64 {
        self.beta_override.unwrap_or_else(|| self.epsilon.powf(self.m))
    }

    /// Parameter ranges plus the kernel hypothesis whenever `beta > 0`.
    /// `beta = 0` (e.g. `epsilon = 0`) is accepted and yields the
    /// unregularized propagators.
    pub fn validate(&self, a: f64) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        if !(self.m > 0.0 && self.m <= 1.0) {
            return Err(Error::Config(format!("m must lie in (0, 1], got {}", self.m)));
        }
        let beta = self.beta();
        let p = KernelParams::new(1.0, a, self.k, beta)?;
        if beta > 0.0 && !p.hypothesis_ok() {
            return Err(Error::Hypothesis { a, k: self.k, beta });
        }
        Ok(())
    }

    /// Stricter check used by the theorem studies: `0 < beta < 1` and the
    /// kernel hypothesis.
    pub fn validate_theorem_mode(&self, a: f64) -> Result<()> {
        self.validate(a)?;
        let beta = self.beta();
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Config(format!("theorem mode needs 0 < beta < 1, got {beta}")));
        }
        Ok(())
    }

    pub fn kernel(&self, constants: &Constants, eq: Equation) -> KernelParams {
        KernelParams {
            alpha: constants.alpha[eq.index()],
            a: constants.a,
            k: self.k,
            beta: self.beta(),
        }
    }
}

/// `(u, v)` coefficients at every x-node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub x_nodes: Vec<f64>,
    pub u: Vec<SpectralField>,
    pub v: Vec<SpectralField>,
}

impl Trajectory {
    pub fn zeros(x_nodes: Vec<f64>, n_modes: usize) -> Self {
        let m = x_nodes.len();
        Self {
            x_nodes,
            u: vec![SpectralField::zeros(n_modes); m],
            v: vec![SpectralField::zeros(n_modes); m],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.u.first().map_or(0, |f| f.n_modes())
    }

    pub fn component(&self, eq: Equation) -> &[SpectralField] {
        match eq {
            Equation::U => &self.u,
            Equation::V => &self.v,
        }
    }

    pub(crate) fn component_mut(&mut self, eq: Equation) -> &mut [SpectralField] {
        match eq {
            Equation::U => &mut self.u,
            Equation::V => &mut self.v,
        }
    }

    fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        if self.x_nodes.len() != other.x_nodes.len()
            || self
                .x_nodes
                .iter()
                .zip(&other.x_nodes)
                .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(Error::IncompatibleGrid("trajectories use different x-grids".into()));
        }
        if self.n_modes() != other.n_modes() {
            return Err(Error::IncompatibleGrid(format!(
                "trajectories have {} and {} modes",
                self.n_modes(),
                other.n_modes()
            )));
        }
        Ok(())
    }

    /// `sup_x sqrt(|u - U|² + |v - V|²)`, the metric of the Picard iteration.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        self.pointwise_distance(other)
            .into_iter()
            .fold(0.0, |m, d| if d.is_nan() || d > m { d } else { m })
    }

    fn pointwise_distance(&self, other: &Trajectory) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.v)
            .zip(other.u.iter().zip(&other.v))
            .map(|((u, v), (uu, vv))| (u.distance(uu).powi(2) + v.distance(vv).powi(2)).sqrt())
            .collect()
    }

    fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.v)
            .all(|f| f.coeffs().iter().all(|c| c.is_finite()))
    }
}

/// Per x-node error `sqrt(|u_approx - u*|² + |v_approx - v*|²)`.
pub fn trajectory_error(approx: &Trajectory, exact: &Trajectory) -> Result<Vec<f64>> {
    approx.check_compatible(exact)?;
    Ok(approx.pointwise_distance(exact))
}

/// Witness of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// Sup-over-x distance between consecutive iterates, one per iteration.
    pub successive_diffs: Vec<f64>,
    pub converged: bool,
    /// Distance between the returned trajectory and its image under the map.
    pub residual: f64,
}

impl SolveDiagnostics {
    /// Ratios of consecutive successive differences.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.successive_diffs
            .windows(2)
            .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
            .collect()
    }
}

pub(crate) fn check_inputs(spec: &ProblemSpec, data: &CauchyData, disc: &Discretization) -> Result<SpectralBasis> {
    disc.validate()?;
    spec.validate()?;
    if (spec.constants.b - disc.basis.b).abs() > 1e-12 * spec.constants.b {
        return Err(Error::Config(format!(
            "problem uses b = {} but the basis uses b = {}",
            spec.constants.b, disc.basis.b
        )));
    }
    if spec.n_x() != disc.n_x {
        return Err(Error::IncompatibleGrid(format!(
            "forcing given on {} x-nodes, discretization has {}",
            spec.n_x(),
            disc.n_x
        )));
    }
    let n = disc.basis.n_modes;
    if spec.f1.iter().any(|f| f.n_modes() != n) {
        return Err(Error::IncompatibleGrid(format!("forcing must have {n} modes")));
    }
    data.validate(n)?;
    SpectralBasis::new(disc.basis)
}

/// Coefficients `<F_i(x_l, u, v), phi_n>` at every node, for both equations.
///
/// Forcing and the linear coupling act directly on coefficients; only the
/// sine term goes through the quadrature grid.
pub(crate) struct NonlinearProjector<'a> {
    spec: &'a ProblemSpec,
    basis: &'a SpectralBasis,
}

impl<'a> NonlinearProjector<'a> {
    pub(crate) fn new(spec: &'a ProblemSpec, basis: &'a SpectralBasis) -> Self {
        Self { spec, basis }
    }

    /// Fills `out[eq][l * N + (n - 1)]`.
    pub(crate) fn project(&self, traj: &Trajectory, out: &mut [Vec<f64>; 2]) {
        let c = &self.spec.constants;
        let n = self.basis.n_modes();
        let q = self.basis.nodes().len();
        let needs_grid = c.gamma.iter().any(|&g| g != 0.0);
        let mut ug = vec![0.0; q];
        let mut vg = vec![0.0; q];
        let mut sg = vec![0.0; q];
        let mut proj = vec![0.0; n];
        for (l, (u, v)) in traj.u.iter().zip(&traj.v).enumerate() {
            if needs_grid {
                self.basis.synthesize_into(u.coeffs(), &mut ug);
                self.basis.synthesize_into(v.coeffs(), &mut vg);
            }
            for eq in Equation::BOTH {
                let i = eq.index();
                let row = &mut out[i][l * n..(l + 1) * n];
                let f = self.spec.forcing(eq)[l].coeffs();
                for (idx, r) in row.iter_mut().enumerate() {
                    *r = f[idx] - c.sigma[i][0] * u.coeffs()[idx] - c.sigma[i][1] * v.coeffs()[idx];
                }
                if c.gamma[i] != 0.0 {
                    for ((s, &uu), &vv) in sg.iter_mut().zip(&ug).zip(&vg) {
                        *s = (c.delta[i][0] * uu + c.delta[i][1] * vv).sin();
                    }
                    self.basis.analyze_into(&sg, &mut proj);
                    for (r, p) in row.iter_mut().zip(&proj) {
                        *r -= c.gamma[i] * p;
                    }
                }
            }
        }
    }
}

/// Composite trapezoid convolution over nodes `0..=j`:
/// `h (½ K[j] F[0] + sum_{l=1}^{j-1} K[j-l] F[l] + ½ K[0] F[j])`.
#[inline]
pub(crate) fn trapezoid_convolution(h: f64, kernel: &[f64], values: impl Fn(usize) -> f64, j: usize) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let mut acc = 0.5 * (kernel[j] * values(0) + kernel[0] * values(j));
    for l in 1..j {
        acc += kernel[j - l] * values(l);
    }
    h * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{nonlinearity_f, Constants};
    use std::f64::consts::PI;

    #[test]
    fn node_lookup() {
        let d = Discretization::new(BasisConfig::with_modes(PI, 4).unwrap(), 101).unwrap();
        assert_eq!(d.node_index(1.0, 0.25).unwrap(), 25);
        assert_eq!(d.node_index(1.0, 1.0).unwrap(), 100);
        assert!(d.node_index(1.0, 0.255).is_err());
        assert!(d.node_index(1.0, 1.5).is_err());
        assert_eq!(*d.x_nodes(2.0).last().unwrap(), 2.0);
    }

    #[test]
    fn beta_derivation_and_validation() {
        let r = RegularizationConfig::new(1e-4, 0.5, 1.0);
        assert!((r.beta() - 1e-2).abs() < 1e-17);
        assert!(r.validate(1.0).is_ok());
        let bad = RegularizationConfig::new(1e-2, 1.0, 1.0).with_beta(2.0);
        assert!(matches!(bad.validate(1.0), Err(Error::Hypothesis { .. })));
        let zero = RegularizationConfig::new(1e-2, 1.0, 1.0).with_beta(0.0);
        assert!(zero.validate(1.0).is_ok());
        assert!(zero.validate_theorem_mode(1.0).is_err());
        assert!(RegularizationConfig::new(1e-2, 1.5, 1.0).validate(1.0).is_err());
        assert!(RegularizationConfig::new(-1.0, 1.0, 1.0).validate(1.0).is_err());
    }

    #[test]
    fn trajectory_error_examples() {
        let xs = vec![0.0, 0.5, 1.0];
        let mut a = Trajectory::zeros(xs.clone(), 3);
        let b = a.clone();
        assert_eq!(trajectory_error(&a, &b).unwrap(), vec![0.0; 3]);
        for f in &mut a.u {
            f.coeffs_mut()[0] += 1e-3;
        }
        assert!(trajectory_error(&a, &b).unwrap().iter().all(|&e| (e - 1e-3).abs() < 1e-18));
        let c = Trajectory::zeros(vec![0.0, 1.0], 3);
        assert!(matches!(trajectory_error(&a, &c), Err(Error::IncompatibleGrid(_))));
    }

    #[test]
    fn projector_matches_grid_nonlinearity() {
        let basis = SpectralBasis::new(BasisConfig::new(PI, 6, 30).unwrap()).unwrap();
        let constants = Constants {
            gamma: [0.8, -1.2],
            delta: [[1.0, -0.5], [0.3, 0.9]],
            sigma: [[0.2, -0.1], [0.05, 0.4]],
            ..Constants::linear(1.0, PI, [1.0, 2.0])
        };
        let field = |s: f64| SpectralField::from_coeffs((0..6).map(|i| s * ((i + 1) as f64).recip()).collect());
        let spec = ProblemSpec::new(constants, vec![field(0.3), field(-0.7)], vec![field(1.1), field(0.2)]).unwrap();
        let traj = Trajectory {
            x_nodes: vec![0.0, 1.0],
            u: vec![field(1.0), field(0.4)],
            v: vec![field(-0.6), field(2.0)],
        };
        let mut out = [vec![0.0; 12], vec![0.0; 12]];
        NonlinearProjector::new(&spec, &basis).project(&traj, &mut out);
        for l in 0..2 {
            let ug = basis.synthesize_on_nodes(&traj.u[l]);
            let vg = basis.synthesize_on_nodes(&traj.v[l]);
            for eq in Equation::BOTH {
                let g = nonlinearity_f(eq, &spec, &basis, l, &ug, &vg).unwrap();
                let c = basis.analyze(&g).unwrap();
                for n in 0..6 {
                    assert!((c.coeffs()[n] - out[eq.index()][l * 6 + n]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn trapezoid_convolution_integrates_polynomials() {
        // kernel 1, integrand xi on [0, x_j] -> x_j² / 2 exactly
        let h = 0.1;
        let k = vec![1.0; 11];
        for j in 0..11 {
            let x = j as f64 * h;
            let got = trapezoid_convolution(h, &k, |l| l as f64 * h, j);
            assert!((got - 0.5 * x * x).abs() < 1e-14);
        }
    }
}
