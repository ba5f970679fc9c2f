//! Kernel equations: the averaged nonlinearity, the amplitude `a*` and the
//! Newton solve for the mean actions at fixed mean angles.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::loop_traj::{LoopTrajectory, TimeGrid};
use super::operator::KernelElement;
use super::range::{solve_range, RangeSolution};
use super::theta::{theta_map, tilde_coefficients};
use super::SolverParams;
use crate::error::{Error, Result};
use crate::model::{CommutingSystem, PhasePoint};

/// Value, action gradient and action Hessian of an averaged nonlinearity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedForm {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
}

impl AveragedForm {
    pub fn hess_matrix(&self) -> DMatrix<f64> {
        let r = self.grad.len();
        DMatrix::from_fn(r, r, |i, j| self.hess[i][j])
    }
}

/// Average of `sum_l coeffs_l F^(l)` over `t -> (a, n t + psi, 0, 0)`,
/// `t in [0, 2 pi)`, by the trapezoidal rule with `quad_points` nodes.
pub fn averaged_combination(
    sys: &CommutingSystem,
    coeffs: &[f64],
    a: &[f64],
    psi: &[f64],
    quad_points: usize,
) -> Result<AveragedForm> {
    let r = sys.r();
    let nl = &sys.nonlinearity;
    let mut value = 0.0;
    let mut grad = vec![0.0; r];
    let mut hess = DMatrix::zeros(r, r);
    let mut z = sys.zero_point();
    z.action = a.to_vec();
    for i in 0..quad_points {
        let t = 2.0 * PI * i as f64 / quad_points as f64;
        for l in 0..r {
            z.angle[l] = sys.n_vec[l] as f64 * t + psi[l];
        }
        value += nl.combined_value(coeffs, &z, 0.0)?;
        let g = nl.combined_gradient(coeffs, &z, 0.0)?;
        for l in 0..r {
            grad[l] += g.action[l];
        }
        let h = nl.combined_action_hessian(coeffs, &z, 0.0)?.ok_or_else(|| {
            Error::InvalidConfig("model provides no action Hessian for the kernel solve".into())
        })?;
        hess += h;
    }
    let w = 1.0 / quad_points as f64;
    Ok(AveragedForm {
        value: value * w,
        grad: grad.iter().map(|g| g * w).collect(),
        hess: (0..r).map(|i| (0..r).map(|j| hess[(i, j)] * w).collect()).collect(),
    })
}

/// `<F_n>(a, psi)` with `F_n = sum_l n_l F^(l)`.
pub fn averaged_nonlinearity(
    sys: &CommutingSystem,
    a: &[f64],
    psi: &[f64],
    quad_points: usize,
) -> Result<AveragedForm> {
    let n: Vec<f64> = sys.n_vec.iter().map(|&x| x as f64).collect();
    averaged_combination(sys, &n, a, psi, quad_points)
}

fn checked_solve(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let det = h.determinant();
    let scale = h.amax().max(f64::MIN_POSITIVE).powi(h.nrows() as i32);
    if !(det.abs() > 1e-13 * scale) {
        return Err(Error::SingularHessian { det });
    }
    h.clone()
        .lu()
        .solve(rhs)
        .ok_or(Error::SingularHessian { det })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AStar {
    pub a: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// All components strictly positive (inside the action domain).
    pub interior: bool,
}

/// Newton solve of `eps/mu = -grad <F_n>(a)`.
pub fn solve_a_star(
    sys: &CommutingSystem,
    eps_over_mu: &[f64],
    a_guess: &[f64],
    quad_points: usize,
) -> Result<AStar> {
    const MAX_ITER: usize = 60;
    let mut a = a_guess.to_vec();
    let psi = vec![0.0; sys.r()];
    let mut res = f64::INFINITY;
    for it in 0..=MAX_ITER {
        let f = averaged_nonlinearity(sys, &a, &psi, quad_points)?;
        let r: DVector<f64> =
            DVector::from_iterator(a.len(), f.grad.iter().zip(eps_over_mu).map(|(g, e)| g + e));
        res = r.amax();
        if res <= 1e-12 {
            let interior = a.iter().all(|x| *x > 0.0);
            return Ok(AStar { a, residual: res, iterations: it, interior });
        }
        if it == MAX_ITER {
            break;
        }
        let hess = f.hess_matrix();
        let step = checked_solve(&hess, &r)?;
        for (x, d) in a.iter_mut().zip(step.iter()) {
            *x -= d;
            // Rounding can push a boundary solution just below zero.
            if *x < 0.0 && *x > -1e-12 {
                *x = 0.0;
            }
        }
        if a.iter().all(|x| x.is_finite()) && a.iter().any(|x| *x <= 0.0) {
            // The chart is singular on the boundary; report the linearized residual.
            let res = (r - &hess * &step).amax();
            return Ok(AStar { a, residual: res, iterations: it + 1, interior: false });
        }
        if a.iter().any(|x| !x.is_finite()) {
            break;
        }
    }
    Err(Error::NonConvergence { what: "a* Newton", iterations: MAX_ITER, residual: res })
}

/// Solution of the kernel and range equations at one mean angle `psi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSolution {
    pub a: Vec<f64>,
    pub psi: Vec<f64>,
    /// `beta_j = mu <dF~/dphi_j>`; vanishes on true solutions.
    pub beta: Vec<f64>,
    pub range: RangeSolution,
    pub newton_iterations: usize,
    /// Max-norm of `eps + mu <dF~/dI>`.
    pub kernel_residual: f64,
}

impl KernelSolution {
    pub fn w(&self) -> &LoopTrajectory {
        &self.range.w
    }

    /// `z(t) = (a + J(t), e_1 t + psi + theta(t), p(t), q(t))`.
    pub fn point_at(&self, t: f64) -> PhasePoint {
        let mut z = self.range.w.eval(t);
        for l in 0..z.r() {
            z.action[l] += self.a[l];
            z.angle[l] += self.psi[l];
        }
        z.angle[0] += t;
        z
    }
}

/// Chord-Newton on `a` for `0 = eps + mu <dF~/dI (w(a) + (a, e_1 t + psi))>`,
/// re-solving the range equation at every iterate. The system must be
/// normalized to `n = e_1`.
pub fn solve_kernel(
    sys: &CommutingSystem,
    grid: &TimeGrid,
    eps: &[f64],
    psi: &[f64],
    a_start: &[f64],
    params: &SolverParams,
) -> Result<KernelSolution> {
    let r = sys.r();
    let mu = sys.mu;
    let range_tol = params.range_rtol * mu.abs().max(f64::MIN_POSITIVE);
    let kernel_tol = params.kernel_rtol * mu.abs().max(f64::MIN_POSITIVE);
    let coeffs = tilde_coefficients(eps);
    let mut a = a_start.to_vec();
    let mut w_prev: Option<LoopTrajectory> = None;
    let mut jac: Option<DMatrix<f64>> = None;
    let mut residual = f64::INFINITY;
    for it in 0..=params.kernel_max_iter {
        let kernel = KernelElement { a: a.clone(), psi: psi.to_vec() };
        let range = solve_range(sys, grid, eps, &kernel, w_prev.as_ref(), range_tol, params.range_max_iter)?;
        let th = theta_map(sys, grid, eps, &vec![0.0; r], &range.w, &kernel)?;
        let res: Vec<f64> = (0..r).map(|l| th.get(r + l, 0).re).collect();
        residual = res.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if residual <= kernel_tol || mu == 0.0 {
            if mu == 0.0 && residual > kernel_tol {
                return Err(Error::InvalidConfig(
                    "mu = 0 requires eps = 0 (eps must lie in the ball of radius |mu|)".into(),
                ));
            }
            let beta: Vec<f64> = (0..r).map(|l| -th.get(l, 0).re).collect();
            let beta_max = beta.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if beta_max > params.beta_tol {
                return Err(Error::BetaNotSmall { beta: beta_max, tol: params.beta_tol });
            }
            return Ok(KernelSolution {
                a,
                psi: psi.to_vec(),
                beta,
                range,
                newton_iterations: it,
                kernel_residual: residual,
            });
        }
        if it == params.kernel_max_iter {
            break;
        }
        if jac.is_none() {
            let f = averaged_combination(sys, &coeffs, &a, psi, params.quad_points)?;
            jac = Some(f.hess_matrix() * mu);
        }
        let step = checked_solve(jac.as_ref().unwrap(), &DVector::from_vec(res))?;
        for (x, d) in a.iter_mut().zip(step.iter()) {
            *x -= d;
        }
        w_prev = Some(range.w);
    }
    Err(Error::NonConvergence {
        what: "kernel Newton",
        iterations: params.kernel_max_iter,
        residual,
    })
}
