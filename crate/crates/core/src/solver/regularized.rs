use crate::error::Result;
use crate::kernel::{psi, rate};
use crate::model::{CauchyData, Equation, ProblemSpec};
use crate::spectral_basis::SpectralBasis;

use super::{
    check_inputs, trapezoid_convolution, Discretization, NonlinearProjector, RegularizationConfig, SolveDiagnostics,
    Trajectory,
};

/// The discrete fixed-point map of the regularized integral equations.
///
/// For mode `n` of equation `i` with rate `s = sqrt(alpha_i lambda_n)`:
///
/// ```text
/// w(x_j) = (psi(x_j) + e^{-s x_j}/2) w0 + (psi(x_j) - e^{-s x_j}/2) w1 / s
///        + trap_{l <= j} (psi(x_j - x_l) - e^{-s (x_j - x_l)}/2) / s * F_n(x_l)
/// ```
///
/// The kernel depends on `j - l` only, so one row per mode suffices.
struct RegularizedMap<'a> {
    x_nodes: Vec<f64>,
    n_modes: usize,
    h: f64,
    // [eq][j * N + n]
    data_terms: [Vec<f64>; 2],
    // [eq][n * M + d]
    kernel: [Vec<f64>; 2],
    projector: NonlinearProjector<'a>,
}

impl<'a> RegularizedMap<'a> {
    fn new(
        spec: &'a ProblemSpec,
        basis: &'a SpectralBasis,
        data: &CauchyData,
        reg: &RegularizationConfig,
        disc: &Discretization,
    ) -> Self {
        let a = spec.constants.a;
        let x_nodes = disc.x_nodes(a);
        let n_modes = basis.n_modes();
        let m = x_nodes.len();
        let mut data_terms = [vec![0.0; m * n_modes], vec![0.0; m * n_modes]];
        let mut kernel = [vec![0.0; m * n_modes], vec![0.0; m * n_modes]];
        for eq in Equation::BOTH {
            let i = eq.index();
            let p = reg.kernel(&spec.constants, eq);
            let (w0, w1) = match eq {
                Equation::U => (&data.u0, &data.u1),
                Equation::V => (&data.v0, &data.v1),
            };
            for (n, &lambda) in basis.eigenvalues().iter().enumerate() {
                let s = rate(p.alpha, lambda);
                for (j, &x) in x_nodes.iter().enumerate() {
                    let filt = psi(&p, s, x);
                    let half_decay = 0.5 * (-s * x).exp();
                    data_terms[i][j * n_modes + n] =
                        (filt + half_decay) * w0.coeffs()[n] + (filt - half_decay) / s * w1.coeffs()[n];
                    kernel[i][n * m + j] = (filt - half_decay) / s;
                }
            }
        }
        Self {
            h: disc.step(a),
            x_nodes,
            n_modes,
            data_terms,
            kernel,
            projector: NonlinearProjector::new(spec, basis),
        }
    }

    fn data_only(&self) -> Trajectory {
        let mut t = Trajectory::zeros(self.x_nodes.clone(), self.n_modes);
        for eq in Equation::BOTH {
            let terms = &self.data_terms[eq.index()];
            for (j, f) in t.component_mut(eq).iter_mut().enumerate() {
                f.coeffs_mut()
                    .copy_from_slice(&terms[j * self.n_modes..(j + 1) * self.n_modes]);
            }
        }
        t
    }

    fn apply(&self, traj: &Trajectory, forcing: &mut [Vec<f64>; 2]) -> Trajectory {
        self.projector.project(traj, forcing);
        let n_modes = self.n_modes;
        let m = self.x_nodes.len();
        let mut out = self.data_only();
        for eq in Equation::BOTH {
            let i = eq.index();
            let f = &forcing[i];
            for n in 0..n_modes {
                let kernel = &self.kernel[i][n * m..(n + 1) * m];
                for (j, field) in out.component_mut(eq).iter_mut().enumerate() {
                    field.coeffs_mut()[n] += trapezoid_convolution(self.h, kernel, |l| f[l * n_modes + n], j);
                }
            }
        }
        out
    }

    fn forcing_buffer(&self) -> [Vec<f64>; 2] {
        let len = self.x_nodes.len() * self.n_modes;
        [vec![0.0; len], vec![0.0; len]]
    }
}

/// Picard iteration for the regularized pair, started from the data-only
/// terms. Non-convergence is reported through the diagnostics, with the last
/// iterate returned.
pub fn solve_regularized(
    spec: &ProblemSpec,
    data: &CauchyData,
    reg: &RegularizationConfig,
    disc: &Discretization,
) -> Result<(Trajectory, SolveDiagnostics)> {
    let basis = check_inputs(spec, data, disc)?;
    reg.validate(spec.constants.a)?;
    let map = RegularizedMap::new(spec, &basis, data, reg, disc);
    let mut forcing = map.forcing_buffer();

    let mut current = map.data_only();
    let mut diffs = Vec::new();
    let mut converged = false;
    for _ in 0..disc.picard_max_iters {
        let next = map.apply(&current, &mut forcing);
        let diff = next.sup_distance(&current);
        diffs.push(diff);
        let finite = next.is_finite();
        current = next;
        if !finite || !diff.is_finite() {
            break;
        }
        if diff <= disc.picard_tol {
            converged = true;
            break;
        }
    }
    let residual = if current.is_finite() {
        map.apply(&current, &mut forcing).sup_distance(&current)
    } else {
        f64::INFINITY
    };
    let diagnostics = SolveDiagnostics {
        iterations: diffs.len(),
        successive_diffs: diffs,
        converged,
        residual,
    };
    Ok((current, diagnostics))
}

/// One application of the regularized map to an arbitrary trajectory.
pub fn regularized_rhs(
    spec: &ProblemSpec,
    data: &CauchyData,
    reg: &RegularizationConfig,
    disc: &Discretization,
    traj: &Trajectory,
) -> Result<Trajectory> {
    let basis = check_inputs(spec, data, disc)?;
    reg.validate(spec.constants.a)?;
    if traj.x_nodes.len() != disc.n_x || traj.n_modes() != disc.basis.n_modes {
        return Err(crate::error::Error::IncompatibleGrid(
            "trajectory does not match the discretization".into(),
        ));
    }
    let map = RegularizedMap::new(spec, &basis, data, reg, disc);
    let mut forcing = map.forcing_buffer();
    Ok(map.apply(traj, &mut forcing))
}
