//! Manufactured solutions: pick `(u*, v*)`, derive the forcing that makes
//! them exact, and read off Cauchy data and the reference trajectory.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CauchyData, Constants, Equation, ProblemSpec};
use crate::spectral_basis::{SpectralBasis, SpectralField};

use super::{Discretization, Trajectory};

/// x-profile of one ansatz term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// `exp(rate * x)`
    Exp { rate: f64 },
    /// `c0 + c1 x + c2 x² + ...`
    Poly(Vec<f64>),
}

impl Profile {
    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match self {
            Profile::Exp { rate } => {
                let e = (rate * x).exp();
                (e, rate * e, rate * rate * e)
            }
            Profile::Poly(c) => {
                let mut p = (0.0, 0.0, 0.0);
                // Horner for the value and both derivatives
                for &ci in c.iter().rev() {
                    p.2 = p.2 * x + 2.0 * p.1;
                    p.1 = p.1 * x + p.0;
                    p.0 = p.0 * x + ci;
                }
                p
            }
        }
    }
}

/// `amplitude * cos(mode pi y / b) * profile(x)`, contributing to `field`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzTerm {
    pub field: Equation,
    pub mode: usize,
    pub amplitude: f64,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Ansatz {
    pub terms: Vec<AnsatzTerm>,
}

impl Ansatz {
    pub fn max_mode(&self) -> usize {
        self.terms.iter().map(|t| t.mode).max().unwrap_or(0)
    }

    /// `(w, w_x, w_xx + alpha w_yy)` of one field at `(x, y)`.
    fn eval(&self, field: Equation, alpha: f64, b: f64, x: f64, y: f64) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for t in self.terms.iter().filter(|t| t.field == field) {
            let w = t.mode as f64 * PI / b;
            let c = t.amplitude * (w * y).cos();
            let (p, dp, ddp) = t.profile.eval(x);
            out.0 += c * p;
            out.1 += c * dp;
            out.2 += c * (ddp - alpha * w * w * p);
        }
        out
    }

    /// Exact coefficients of one field at `x`, using `cos(n pi y / b) = sqrt(b/2) phi_n`.
    fn coefficients(&self, field: Equation, n_modes: usize, b: f64, x: f64, derivative: bool) -> SpectralField {
        let scale = (b / 2.0).sqrt();
        let mut f = SpectralField::zeros(n_modes);
        for t in self.terms.iter().filter(|t| t.field == field) {
            let (p, dp, _) = t.profile.eval(x);
            f.coeffs_mut()[t.mode - 1] += t.amplitude * scale * if derivative { dp } else { p };
        }
        f
    }
}

const RECIPES: [&str; 3] = ["zero", "decaying-mode", "smooth"];

pub fn recipe_names() -> &'static [&'static str] {
    &RECIPES
}

/// Built-in ansatz by name.
///
/// * `zero`: `u* = v* = 0`.
/// * `decaying-mode`: `u* = cos(pi y / b) exp(-sqrt(alpha_1 lambda_1) x)`, `v* = 0`.
/// * `smooth`: two modes per field mixing decaying, growing and polynomial profiles.
pub fn recipe(name: &str, constants: &Constants) -> Result<Ansatz> {
    use Equation::{U, V};
    let term = |field, mode, amplitude, profile| AnsatzTerm {
        field,
        mode,
        amplitude,
        profile,
    };
    let terms = match name {
        "zero" => vec![],
        "decaying-mode" => {
            let s1 = constants.alpha[0].sqrt() * PI / constants.b;
            vec![term(U, 1, 1.0, Profile::Exp { rate: -s1 })]
        }
        "smooth" => vec![
            term(U, 1, 1.0, Profile::Exp { rate: -1.0 }),
            term(U, 2, 0.1, Profile::Exp { rate: -2.0 }),
            term(V, 1, 0.5, Profile::Poly(vec![1.0, -0.5, 0.25])),
            term(V, 2, 0.05, Profile::Exp { rate: 0.5 }),
        ],
        other => {
            return Err(Error::Config(format!(
                "unknown recipe '{other}', expected one of {}",
                RECIPES.join(", ")
            )))
        }
    };
    Ok(Ansatz { terms })
}

/// A problem with known solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Manufactured {
    pub spec: ProblemSpec,
    pub data: CauchyData,
    pub truth: Trajectory,
    pub ansatz: Ansatz,
}

pub fn manufactured_problem(name: &str, constants: Constants, disc: &Discretization) -> Result<Manufactured> {
    let ansatz = recipe(name, &constants)?;
    manufactured_from_ansatz(ansatz, constants, disc)
}

/// Forcing `f_i = w_xx + alpha_i w_yy + gamma_i sin(...) + sigma_i1 u + sigma_i2 v`
/// sampled on the y-quadrature nodes and projected onto the basis at each x-node.
pub fn manufactured_from_ansatz(ansatz: Ansatz, constants: Constants, disc: &Discretization) -> Result<Manufactured> {
    constants.validate()?;
    disc.validate()?;
    if (constants.b - disc.basis.b).abs() > 1e-12 * constants.b {
        return Err(Error::Config(format!(
            "problem uses b = {} but the basis uses b = {}",
            constants.b, disc.basis.b
        )));
    }
    let n_modes = disc.basis.n_modes;
    if ansatz.max_mode() > n_modes || ansatz.terms.iter().any(|t| t.mode == 0) {
        return Err(Error::Config(format!(
            "ansatz uses mode {} but the basis holds modes 1..={n_modes}",
            ansatz.max_mode()
        )));
    }
    let basis = SpectralBasis::new(disc.basis)?;
    let (a, b) = (constants.a, constants.b);
    let xs = disc.x_nodes(a);
    let c = &constants;

    let mut f1 = Vec::with_capacity(xs.len());
    let mut f2 = Vec::with_capacity(xs.len());
    let mut g1 = vec![0.0; basis.nodes().len()];
    let mut g2 = vec![0.0; basis.nodes().len()];
    for &x in &xs {
        for (q, &y) in basis.nodes().iter().enumerate() {
            let (u, _, lu) = ansatz.eval(Equation::U, c.alpha[0], b, x, y);
            let (v, _, lv) = ansatz.eval(Equation::V, c.alpha[1], b, x, y);
            g1[q] = lu + c.gamma[0] * (c.delta[0][0] * u + c.delta[0][1] * v).sin() + c.sigma[0][0] * u + c.sigma[0][1] * v;
            g2[q] = lv + c.gamma[1] * (c.delta[1][0] * u + c.delta[1][1] * v).sin() + c.sigma[1][0] * u + c.sigma[1][1] * v;
        }
        f1.push(basis.analyze_values(&g1));
        f2.push(basis.analyze_values(&g2));
    }

    let truth = Trajectory {
        u: xs.iter().map(|&x| ansatz.coefficients(Equation::U, n_modes, b, x, false)).collect(),
        v: xs.iter().map(|&x| ansatz.coefficients(Equation::V, n_modes, b, x, false)).collect(),
        x_nodes: xs,
    };
    let data = CauchyData {
        u0: ansatz.coefficients(Equation::U, n_modes, b, 0.0, false),
        u1: ansatz.coefficients(Equation::U, n_modes, b, 0.0, true),
        v0: ansatz.coefficients(Equation::V, n_modes, b, 0.0, false),
        v1: ansatz.coefficients(Equation::V, n_modes, b, 0.0, true),
    };
    Ok(Manufactured {
        spec: ProblemSpec::new(constants, f1, f2)?,
        data,
        truth,
        ansatz,
    })
}
