use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::experiments::SweepPlan;
use crate::model::Constants;
use crate::solver::{recipe_names, Discretization, RegularizationConfig, DEFAULT_PICARD_MAX_ITERS, DEFAULT_PICARD_TOL};
use crate::spectral_basis::BasisConfig;

use super::CliError;

/// The configuration shipped with the binary.
pub const DEFAULT_CONFIG: &str = include_str!("../../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub a: f64,
    pub b: f64,
    pub alpha: [f64; 2],
    pub gamma: [f64; 2],
    pub delta: [[f64; 2]; 2],
    pub sigma: [[f64; 2]; 2],
    pub recipe: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    pub n_modes: usize,
    /// Defaults to `4 * n_modes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_quad: Option<usize>,
    pub n_x: usize,
    #[serde(default = "default_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_iters")]
    pub picard_max_iters: usize,
}

fn default_tol() -> f64 {
    DEFAULT_PICARD_TOL
}

fn default_iters() -> usize {
    DEFAULT_PICARD_MAX_ITERS
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationSection {
    pub epsilon: f64,
    pub m: f64,
    pub k: f64,
    /// Overrides `beta = epsilon^m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub seed: u64,
    /// Second sample of the stability study; defaults to `seed + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner_seed: Option<u64>,
    /// Perturb the Cauchy data in `solve`.
    #[serde(default = "default_true")]
    pub noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    pub probe_x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub problem: ProblemSection,
    pub discretization: DiscretizationSection,
    pub regularization: RegularizationSection,
    pub plan: PlanSection,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    /// Parses and validates.
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn shipped() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG).expect("shipped config is valid")
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Re-checks every component, including the strict regularization range
    /// `0 < beta < 1` with `a^k > k beta`.
    pub fn validate(&self) -> Result<(), CliError> {
        let c = self.constants();
        c.validate()?;
        if !recipe_names().contains(&self.problem.recipe.as_str()) {
            return Err(CliError::Field {
                field: "problem.recipe",
                message: format!("unknown recipe {:?}; expected one of {:?}", self.problem.recipe, recipe_names()),
            });
        }
        self.discretization()?;
        self.regularization().validate_theorem_mode(c.a)?;
        self.plan().validate(c.a)?;
        Ok(())
    }

    pub fn constants(&self) -> Constants {
        let p = &self.problem;
        Constants {
            a: p.a,
            b: p.b,
            alpha: p.alpha,
            gamma: p.gamma,
            delta: p.delta,
            sigma: p.sigma,
        }
    }

    pub fn discretization(&self) -> Result<Discretization, CliError> {
        let d = &self.discretization;
        let basis = BasisConfig::new(self.problem.b, d.n_modes, d.n_quad.unwrap_or(4 * d.n_modes))?;
        let disc = Discretization {
            basis,
            n_x: d.n_x,
            picard_tol: d.picard_tol,
            picard_max_iters: d.picard_max_iters,
        };
        disc.validate()?;
        Ok(disc)
    }

    pub fn regularization(&self) -> RegularizationConfig {
        let r = &self.regularization;
        let reg = RegularizationConfig::new(r.epsilon, r.m, r.k);
        match r.beta {
            Some(beta) => reg.with_beta(beta),
            None => reg,
        }
    }

    pub fn seed_pair(&self) -> (u64, u64) {
        let r = &self.regularization;
        (r.seed, r.partner_seed.unwrap_or(r.seed.wrapping_add(1)))
    }

    pub fn plan(&self) -> SweepPlan {
        SweepPlan {
            epsilons: self.plan.epsilons.clone(),
            m: self.regularization.m,
            k: self.regularization.k,
            seeds: self.plan.seeds.clone(),
            probe_x: self.plan.probe_x.clone(),
        }
    }
}
