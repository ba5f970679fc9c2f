//! Range equation `L_eps w = P Theta(w + kernel)` by fixed-point iteration.

use serde::{Deserialize, Serialize};

use super::loop_traj::{LoopTrajectory, TimeGrid};
use super::operator::{apply_loop_operator, invert_loop_operator, project_range, KernelElement};
use super::theta::{build_tilde_frequencies, theta_map};
use crate::error::{Error, Result};
use crate::model::CommutingSystem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeSolution {
    pub w: LoopTrajectory,
    pub iterations: usize,
    /// Last step size `|w_{n+1} - w_n|`.
    pub step: f64,
    /// `|L w - P Theta(w + kernel)|`.
    pub residual: f64,
}

/// Iterates `w <- L^{-1} P Theta(w + kernel, eps, 0, mu)` from `w0` (zero if
/// `None`) until the step drops below `tol` in the loop norm.
#[allow(clippy::too_many_arguments)]
pub fn solve_range(
    sys: &CommutingSystem,
    grid: &TimeGrid,
    eps: &[f64],
    kernel: &KernelElement,
    w0: Option<&LoopTrajectory>,
    tol: f64,
    max_iter: usize,
) -> Result<RangeSolution> {
    let (r, nt, k_max) = (sys.r(), sys.n_tail(), grid.k_max);
    let tr = &sys.trunc;
    let omega = build_tilde_frequencies(sys, eps)?;
    let zero_beta = vec![0.0; r];
    let mut w = w0.cloned().unwrap_or_else(|| LoopTrajectory::zeros(r, nt, k_max));
    let mut prev_step = f64::INFINITY;
    let mut growth = 0;
    for it in 1..=max_iter {
        let th = theta_map(sys, grid, eps, &zero_beta, &w, kernel)?;
        let next = invert_loop_operator(&omega, &sys.tail, &project_range(&th), tr.gamma, tr.tau)?;
        let step = next.sub(&w).norm(&sys.tail, tr.s, tr.sigma);
        w = next;
        if !step.is_finite() {
            return Err(Error::NoContraction { ratio: f64::INFINITY, iteration: it });
        }
        if step <= tol {
            let residual = range_residual(sys, grid, eps, kernel, &w)?;
            return Ok(RangeSolution { w, iterations: it, step, residual });
        }
        let ratio = step / prev_step;
        if ratio > 1.0 {
            growth += 1;
            if growth >= 3 {
                return Err(Error::NoContraction { ratio, iteration: it });
            }
        } else {
            growth = 0;
        }
        prev_step = step;
    }
    Err(Error::NonConvergence {
        what: "range iteration",
        iterations: max_iter,
        residual: prev_step,
    })
}

/// `|L_eps w - P Theta(w + kernel, eps, 0, mu)|` in the loop norm.
pub fn range_residual(
    sys: &CommutingSystem,
    grid: &TimeGrid,
    eps: &[f64],
    kernel: &KernelElement,
    w: &LoopTrajectory,
) -> Result<f64> {
    let omega = build_tilde_frequencies(sys, eps)?;
    let th = theta_map(sys, grid, eps, &vec![0.0; sys.r()], w, kernel)?;
    let lw = apply_loop_operator(&omega, w);
    let tr = &sys.trunc;
    Ok(lw.sub(&project_range(&th)).norm(&sys.tail, tr.s, tr.sigma))
}
