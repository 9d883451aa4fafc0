use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::unregularized_cosh_sinh;
use crate::model::{CauchyData, Equation, ProblemSpec};

use super::{check_inputs, trapezoid_convolution, Discretization, NonlinearProjector, Trajectory};

/// Output of the unregularized evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MildEvaluation {
    pub trajectory: Trajectory,
    /// `(equation, mode)` pairs whose propagators overflowed; their
    /// coefficients are set to `+inf` from the first overflowing node on.
    pub saturated: Vec<(Equation, usize)>,
}

impl MildEvaluation {
    pub fn is_saturated(&self) -> bool {
        !self.saturated.is_empty()
    }
}

/// Evaluates the cosh/sinh mild-solution formulas with `known` substituted
/// into the nonlinearity. This is an evaluator, not a solver: with exact data
/// and the exact solution it reproduces that solution, and with noisy data it
/// amplifies mode `n` by roughly `cosh(sqrt(alpha lambda_n) x)`.
pub fn evaluate_exact_mild(
    spec: &ProblemSpec,
    data: &CauchyData,
    known: &Trajectory,
    disc: &Discretization,
) -> Result<MildEvaluation> {
    let basis = check_inputs(spec, data, disc)?;
    if known.x_nodes.len() != disc.n_x || known.n_modes() != disc.basis.n_modes {
        return Err(Error::IncompatibleGrid("known trajectory does not match the discretization".into()));
    }
    let a = spec.constants.a;
    let xs = disc.x_nodes(a);
    let h = disc.step(a);
    let n_modes = basis.n_modes();
    let m = xs.len();

    let mut forcing = [vec![0.0; m * n_modes], vec![0.0; m * n_modes]];
    NonlinearProjector::new(spec, &basis).project(known, &mut forcing);

    let mut out = Trajectory::zeros(xs.clone(), n_modes);
    let mut saturated = Vec::new();
    for eq in Equation::BOTH {
        let i = eq.index();
        let alpha = spec.constants.alpha[i];
        let (w0, w1) = match eq {
            Equation::U => (&data.u0, &data.u1),
            Equation::V => (&data.v0, &data.v1),
        };
        for (n, &lambda) in basis.eigenvalues().iter().enumerate() {
            // first node index where the propagator overflows
            let mut overflow_at = m;
            let mut cosh = vec![0.0; m];
            let mut sinh_over_s = vec![0.0; m];
            for (j, &x) in xs.iter().enumerate() {
                match unregularized_cosh_sinh(alpha, lambda, x) {
                    Ok((c, s)) => {
                        cosh[j] = c;
                        sinh_over_s[j] = s;
                    }
                    Err(Error::Saturation { .. }) => {
                        overflow_at = j;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            let mut overflowed = overflow_at < m;
            let f = &forcing[i];
            for (j, field) in out.component_mut(eq).iter_mut().enumerate() {
                let value = if j >= overflow_at {
                    f64::INFINITY
                } else {
                    cosh[j] * w0.coeffs()[n]
                        + sinh_over_s[j] * w1.coeffs()[n]
                        + trapezoid_convolution(h, &sinh_over_s, |l| f[l * n_modes + n], j)
                };
                overflowed |= !value.is_finite();
                field.coeffs_mut()[n] = if value.is_finite() { value } else { f64::INFINITY };
            }
            if overflowed {
                saturated.push((eq, n + 1));
            }
        }
    }
    Ok(MildEvaluation {
        trajectory: out,
        saturated,
    })
}
