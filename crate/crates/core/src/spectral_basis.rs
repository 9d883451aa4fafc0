//! Neumann cosine eigenbasis of `-d²/dy²` on `(0, b)`.
//!
//! Modes are `phi_n(y) = sqrt(2/b) cos(n pi y / b)` with eigenvalue
//! `lambda_n = (n pi / b)²` for `n >= 1`. The constant Neumann mode (eigenvalue
//! zero) is not part of the basis, so every field is implicitly mean-zero.
//!
//! Projections use composite trapezoid quadrature on `Q` uniform nodes that
//! include both endpoints. For products of two cosines of order at most `N`
//! the rule is exact as long as `2N < 2(Q - 1)`; `Q >= 4N` is enforced.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MODES: usize = 32;

/// Truncation and quadrature settings for the y-direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisConfig {
    pub b: f64,
    pub n_modes: usize,
    pub n_quad: usize,
}

impl BasisConfig {
    pub fn new(b: f64, n_modes: usize, n_quad: usize) -> Result<Self> {
        let cfg = Self { b, n_modes, n_quad };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `N` modes with the minimal admissible quadrature `Q = 4N`.
    pub fn with_modes(b: f64, n_modes: usize) -> Result<Self> {
        Self::new(b, n_modes, 4 * n_modes)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::Config(format!("basis length b must be positive, got {}", self.b)));
        }
        if self.n_modes == 0 {
            return Err(Error::Config("n_modes must be at least 1".into()));
        }
        if self.n_quad < 4 * self.n_modes {
            return Err(Error::Config(format!(
                "n_quad = {} is below the anti-aliasing floor 4 * n_modes = {}",
                self.n_quad,
                4 * self.n_modes
            )));
        }
        Ok(())
    }

    /// Uniform quadrature nodes `y_j = j b / (Q - 1)`.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.b / (self.n_quad - 1) as f64;
        (0..self.n_quad).map(|j| j as f64 * h).collect()
    }
}

/// `lambda_n = (n pi / b)²`.
pub fn eigenvalue(n: usize, cfg: &BasisConfig) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidIndex(n));
    }
    let w = n as f64 * PI / cfg.b;
    Ok(w * w)
}

/// `phi_n(y) = sqrt(2/b) cos(n pi y / b)`.
pub fn eigenfunction_at(n: usize, y: f64, cfg: &BasisConfig) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidIndex(n));
    }
    check_y(y, cfg.b)?;
    Ok(mode_value(n, y, cfg.b))
}

#[inline]
fn mode_value(n: usize, y: f64, b: f64) -> f64 {
    (2.0 / b).sqrt() * (n as f64 * PI * y / b).cos()
}

fn check_y(y: f64, b: f64) -> Result<()> {
    if (0.0..=b).contains(&y) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "y",
            value: y,
            lo: 0.0,
            hi: b,
        })
    }
}

/// Coefficients `<u, phi_n>` for `n = 1..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(n_modes: usize) -> Self {
        Self {
            coeffs: vec![0.0; n_modes],
        }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Single mode `amplitude * phi_n`.
    pub fn mode(n_modes: usize, n: usize, amplitude: f64) -> Self {
        let mut f = Self::zeros(n_modes);
        f.coeffs[n - 1] = amplitude;
        f
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(self)
    }

    /// Euclidean distance between coefficient vectors.
    pub fn distance(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        SpectralField::from_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        SpectralField::from_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

/// L² norm via Parseval: the Euclidean norm of the coefficients.
pub fn l2_norm(f: &SpectralField) -> f64 {
    f.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Samples of a function of `y` on a set of nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::IncompatibleGrid(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::IncompatibleGrid("nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes, values })
    }

    /// Samples `f` on the given nodes.
    pub fn sample(nodes: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(nodes.to_vec(), nodes.iter().map(|&y| f(y)).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn same_nodes(&self, other: &GridFunction) -> bool {
        self.nodes == other.nodes
    }
}

/// Precomputed mode table and quadrature weights for one [`BasisConfig`].
///
/// Every method is a pure function of its inputs; the table is immutable.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    cfg: BasisConfig,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    eigenvalues: Vec<f64>,
    // row n-1 holds phi_n at every node
    table: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(cfg: BasisConfig) -> Result<Self> {
        cfg.validate()?;
        let nodes = cfg.nodes();
        let q = cfg.n_quad;
        let h = cfg.b / (q - 1) as f64;
        let mut weights = vec![h; q];
        weights[0] = 0.5 * h;
        weights[q - 1] = 0.5 * h;
        let eigenvalues = (1..=cfg.n_modes)
            .map(|n| eigenvalue(n, &cfg))
            .collect::<Result<Vec<_>>>()?;
        let mut table = Vec::with_capacity(cfg.n_modes * q);
        for n in 1..=cfg.n_modes {
            table.extend(nodes.iter().map(|&y| mode_value(n, y, cfg.b)));
        }
        Ok(Self {
            cfg,
            nodes,
            weights,
            eigenvalues,
            table,
        })
    }

    pub fn config(&self) -> &BasisConfig {
        &self.cfg
    }

    pub fn n_modes(&self) -> usize {
        self.cfg.n_modes
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `lambda_1..=lambda_N`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn row(&self, n: usize) -> &[f64] {
        let q = self.cfg.n_quad;
        &self.table[(n - 1) * q..n * q]
    }

    /// Trapezoid approximation of `∫_0^b g(y) dy` from samples on the nodes.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Projects samples onto `phi_1..=phi_N`.
    pub fn analyze(&self, g: &GridFunction) -> Result<SpectralField> {
        if g.nodes.len() != self.nodes.len()
            || g.nodes
                .iter()
                .zip(&self.nodes)
                .any(|(a, b)| (a - b).abs() > 1e-12 * self.cfg.b)
        {
            return Err(Error::IncompatibleGrid(format!(
                "expected the {} basis quadrature nodes on [0, {}]",
                self.nodes.len(),
                self.cfg.b
            )));
        }
        Ok(self.analyze_values(&g.values))
    }

    /// [`analyze`](Self::analyze) on raw samples already known to sit on the nodes.
    pub fn analyze_values(&self, values: &[f64]) -> SpectralField {
        let mut out = SpectralField::zeros(self.cfg.n_modes);
        self.analyze_into(values, out.coeffs_mut());
        out
    }

    pub(crate) fn analyze_into(&self, values: &[f64], out: &mut [f64]) {
        debug_assert_eq!(values.len(), self.nodes.len());
        let weighted: Vec<f64> = self.weights.iter().zip(values).map(|(w, v)| w * v).collect();
        for (n, c) in out.iter_mut().enumerate() {
            *c = self
                .row(n + 1)
                .iter()
                .zip(&weighted)
                .map(|(p, g)| p * g)
                .sum();
        }
    }

    /// Evaluates `sum_n coeffs[n] phi_n(y)` at arbitrary nodes in `[0, b]`.
    pub fn synthesize(&self, f: &SpectralField, nodes: &[f64]) -> Result<GridFunction> {
        self.check_field(f)?;
        for &y in nodes {
            check_y(y, self.cfg.b)?;
        }
        let values = nodes
            .iter()
            .map(|&y| {
                f.coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * mode_value(i + 1, y, self.cfg.b))
                    .sum()
            })
            .collect();
        GridFunction::new(nodes.to_vec(), values)
    }

    /// Synthesis on the quadrature nodes using the precomputed table.
    pub fn synthesize_on_nodes(&self, f: &SpectralField) -> GridFunction {
        let mut values = vec![0.0; self.nodes.len()];
        self.synthesize_into(f.coeffs(), &mut values);
        GridFunction {
            nodes: self.nodes.clone(),
            values,
        }
    }

    pub(crate) fn synthesize_into(&self, coeffs: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (n, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (v, p) in out.iter_mut().zip(self.row(n + 1)) {
                *v += c * p;
            }
        }
    }

    pub(crate) fn check_field(&self, f: &SpectralField) -> Result<()> {
        if f.n_modes() != self.cfg.n_modes {
            return Err(Error::IncompatibleGrid(format!(
                "field has {} modes, basis has {}",
                f.n_modes(),
                self.cfg.n_modes
            )));
        }
        Ok(())
    }
}
