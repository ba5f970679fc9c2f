//! Lyapunov-Schmidt construction of the periodic orbits filling a torus.

pub mod kernel;
pub mod loop_traj;
pub mod normalize;
pub mod operator;
pub mod range;
pub mod theta;
pub mod torus;

use serde::{Deserialize, Serialize};

pub use kernel::{
    averaged_combination, averaged_nonlinearity, solve_a_star, solve_kernel, AStar, AveragedForm,
    KernelSolution,
};
pub use loop_traj::{LoopTrajectory, TimeGrid};
pub use normalize::{normalize_n, unimodular_completion, NormalizedSystem};
pub use operator::{apply_loop_operator, invert_loop_operator, project_kernel, project_range, KernelElement};
pub use range::{solve_range, RangeSolution};
pub use theta::{build_tilde_frequencies, theta_map};
pub use torus::{assemble_torus, solve_for_initial_angle, PsiSolution, TorusResult};

/// Iteration controls. Residual tolerances are relative to `|mu|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub range_rtol: f64,
    pub range_max_iter: usize,
    pub kernel_rtol: f64,
    pub kernel_max_iter: usize,
    /// Largest accepted `|beta|` at a solution.
    pub beta_tol: f64,
    /// Trapezoidal nodes for the averaged nonlinearity.
    pub quad_points: usize,
    /// Mean angles per torus direction.
    pub psi_grid: usize,
    /// Refinement factor of the interpolated distance grid.
    pub refine: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            range_rtol: 1e-11,
            range_max_iter: 200,
            kernel_rtol: 1e-12,
            kernel_max_iter: 50,
            beta_tol: 1e-8,
            quad_points: 64,
            psi_grid: 8,
            refine: 4,
        }
    }
}
