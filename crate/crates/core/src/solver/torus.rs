//! Assembly of the torus from the periodic orbits at every mean angle `psi`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{solve_a_star, solve_kernel, KernelSolution};
use super::loop_traj::{LoopTrajectory, TimeGrid};
use super::normalize::NormalizedSystem;
use super::SolverParams;
use crate::error::{Error, Result};
use crate::model::{wrap_angle, PhasePoint};
use crate::resonance::diophantine_check;

/// Periodic orbit through one point of the torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiSolution {
    /// Mean angles in normalized variables.
    pub psi: Vec<f64>,
    /// Mean actions in normalized variables.
    pub a: Vec<f64>,
    /// `(a - a*) / mu` in original variables.
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub kernel_residual: f64,
    pub range_residual: f64,
    pub range_iterations: usize,
    pub newton_iterations: usize,
    pub w_norm: f64,
    /// Range part of the loop, normalized variables.
    pub w: LoopTrajectory,
    /// `z(0)` in original variables.
    pub z0: PhasePoint,
}

impl PsiSolution {
    fn from_kernel(
        ks: KernelSolution,
        norm: &NormalizedSystem,
        a_star: &[f64],
        mu: f64,
    ) -> Self {
        let tr = &norm.system.trunc;
        let a_orig = norm.actions_to_original(&ks.a);
        let alpha = if mu != 0.0 {
            a_orig.iter().zip(a_star).map(|(a, s)| (a - s) / mu).collect()
        } else {
            vec![0.0; a_orig.len()]
        };
        let z0 = norm.to_original(&ks.point_at(0.0));
        Self {
            w_norm: ks.range.w.norm(&norm.system.tail, tr.s, tr.sigma),
            psi: ks.psi,
            a: ks.a,
            alpha,
            beta: ks.beta,
            kernel_residual: ks.kernel_residual,
            range_residual: ks.range.residual,
            range_iterations: ks.range.iterations,
            newton_iterations: ks.newton_iterations,
            w: ks.range.w,
            z0,
        }
    }

    /// `z(t)` in normalized variables.
    pub fn point_at_normalized(&self, t: f64) -> PhasePoint {
        let mut z = self.w.eval(t);
        for l in 0..z.r() {
            z.action[l] += self.a[l];
            z.angle[l] += self.psi[l];
        }
        z.angle[0] += t;
        z
    }
}

/// The solved torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusResult {
    /// Frequency shift in original variables.
    pub eps: Vec<f64>,
    pub mu: f64,
    /// Unperturbed amplitude in original variables.
    pub a_star: Vec<f64>,
    pub psi_grid: usize,
    pub k_max: usize,
    /// Diophantine margin of `eps` over the truncation window.
    pub gamma_eff: f64,
    pub solutions: Vec<PsiSolution>,
    pub beta_residual: f64,
    pub range_residual: f64,
    pub kernel_residual: f64,
    pub max_w_norm: f64,
    pub max_alpha: f64,
    /// Distance to the unperturbed torus, maximized over the refined grid.
    pub distance: f64,
    /// Same, maximized over the solved grid points only.
    pub distance_raw: f64,
    /// Closed-form flow frequencies when the model provides them.
    pub frequencies: Option<Vec<f64>>,
}

/// Equispaced grid of `n^r` mean angles, last index fastest.
pub fn psi_grid(r: usize, n: usize) -> Vec<Vec<f64>> {
    let total = n.pow(r as u32);
    (0..total)
        .map(|mut idx| {
            let mut psi = vec![0.0; r];
            for l in (0..r).rev() {
                psi[l] = 2.0 * PI * (idx % n) as f64 / n as f64;
                idx /= n;
            }
            psi
        })
        .collect()
}

/// Weights of the trigonometric interpolant on `n` equispaced nodes at `x`.
pub fn trig_weights(n: usize, x: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let d = x - 2.0 * PI * i as f64 / n as f64;
            let half = n / 2;
            let mut s = 1.0;
            let top = if n % 2 == 0 { half - 1 } else { half };
            for k in 1..=top {
                s += 2.0 * (k as f64 * d).cos();
            }
            if n % 2 == 0 {
                s += (half as f64 * d).cos();
            }
            s / n as f64
        })
        .collect()
}

/// Interpolates values on an `n^r` grid (last index fastest) to `m^r` points.
pub fn trig_refine(values: &[Vec<f64>], r: usize, n: usize, m: usize) -> Vec<Vec<f64>> {
    let w: Vec<Vec<f64>> = (0..m)
        .map(|i| trig_weights(n, 2.0 * PI * i as f64 / m as f64))
        .collect();
    let comps = values.first().map_or(0, |v| v.len());
    // Refine one axis at a time; `cur` has shape (m^a n^(r-a)) x comps.
    let mut cur: Vec<Vec<f64>> = values.to_vec();
    for axis in 0..r {
        let before = m.pow(axis as u32);
        let after = n.pow((r - axis - 1) as u32);
        let mut next = vec![vec![0.0; comps]; before * m * after];
        for b in 0..before {
            for i in 0..m {
                for a in 0..after {
                    let out = &mut next[(b * m + i) * after + a];
                    for (j, wj) in w[i].iter().enumerate() {
                        let src = &cur[(b * n + j) * after + a];
                        for c in 0..comps {
                            out[c] += wj * src[c];
                        }
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Offset `(I - a*, p, q)` of a point from the unperturbed torus, flattened.
fn offset(z: &PhasePoint, a_star: &[f64]) -> Vec<f64> {
    z.action
        .iter()
        .zip(a_star)
        .map(|(i, a)| i - a)
        .chain(z.p.iter().copied())
        .chain(z.q.iter().copied())
        .collect()
}

/// Distance implied by a flattened offset.
fn offset_norm(v: &[f64], r: usize, norm: &NormalizedSystem) -> f64 {
    let tr = &norm.system.trunc;
    let nt = norm.system.n_tail();
    let mut acc: f64 = v[..r].iter().map(|x| x * x).sum();
    for (i, t) in norm.system.tail.iter().enumerate() {
        let w = crate::model::tail_weight(t.weight_index(), tr.s, tr.sigma);
        acc += w * (v[r + i].powi(2) + v[r + nt + i].powi(2));
    }
    acc.sqrt()
}

/// Amplitude `a*` of the unperturbed torus selected by `eps` (original
/// variables). At `mu = 0` the guess is returned and `eps` must vanish.
pub fn amplitude(
    norm: &NormalizedSystem,
    eps: &[f64],
    a_guess: &[f64],
    params: &SolverParams,
) -> Result<Vec<f64>> {
    let mu = norm.original.mu;
    if mu == 0.0 {
        if eps.iter().any(|e| *e != 0.0) {
            return Err(Error::InvalidConfig("mu = 0 requires eps = 0".into()));
        }
        return Ok(a_guess.to_vec());
    }
    let rho: Vec<f64> = eps.iter().map(|e| e / mu).collect();
    let s = solve_a_star(&norm.original, &rho, a_guess, params.quad_points)?;
    if !s.interior {
        return Err(Error::InvalidConfig(format!(
            "a* = {:?} leaves the action domain; eps/mu is outside the gradient image",
            s.a
        )));
    }
    Ok(s.a)
}

/// Solves kernel and range equations on the `psi` grid and assembles the
/// torus. `eps` and `a_guess` are in original variables.
pub fn assemble_torus(
    norm: &NormalizedSystem,
    eps: &[f64],
    a_guess: &[f64],
    params: &SolverParams,
) -> Result<TorusResult> {
    let sys = &norm.system;
    let r = sys.r();
    let mu = sys.mu;
    let k_max = sys.trunc.k_max;
    let grid = TimeGrid::for_k_max(k_max);
    let a_star = amplitude(norm, eps, a_guess, params)?;
    let a_hat = norm.actions_to_normalized(&a_star);
    let eps_hat = norm.eps_to_normalized(eps);
    let dio = diophantine_check(&norm.original, eps, sys.trunc.gamma, sys.trunc.tau, usize::MAX, k_max);
    let psis = psi_grid(r, params.psi_grid);
    let solutions: Vec<PsiSolution> = psis
        .par_iter()
        .map(|psi| {
            solve_kernel(sys, &grid, &eps_hat, psi, &a_hat, params)
                .map(|ks| PsiSolution::from_kernel(ks, norm, &a_star, mu))
        })
        .collect::<Result<_>>()?;
    let offsets: Vec<Vec<f64>> = solutions.iter().map(|s| offset(&s.z0, &a_star)).collect();
    let distance_raw = offsets.iter().map(|v| offset_norm(v, r, norm)).fold(0.0, f64::max);
    let distance = trig_refine(&offsets, r, params.psi_grid, params.refine * params.psi_grid)
        .iter()
        .map(|v| offset_norm(v, r, norm))
        .fold(distance_raw, f64::max);
    let fold = |f: &dyn Fn(&PsiSolution) -> f64| solutions.iter().map(f).fold(0.0, f64::max);
    let abs_max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(TorusResult {
        eps: eps.to_vec(),
        mu,
        a_star,
        psi_grid: params.psi_grid,
        k_max,
        gamma_eff: dio.margin,
        beta_residual: fold(&|s| abs_max(&s.beta)),
        range_residual: fold(&|s| s.range_residual),
        kernel_residual: fold(&|s| s.kernel_residual),
        max_w_norm: fold(&|s| s.w_norm),
        max_alpha: fold(&|s| abs_max(&s.alpha)),
        distance,
        distance_raw,
        frequencies: None,
        solutions,
    })
}

/// Periodic orbit whose initial angle (normalized variables) is `phi0`:
/// iterates `psi <- phi0 - theta(0; psi)`.
pub fn solve_for_initial_angle(
    norm: &NormalizedSystem,
    eps: &[f64],
    a_star: &[f64],
    phi0: &[f64],
    psi_start: Option<&[f64]>,
    params: &SolverParams,
) -> Result<PsiSolution> {
    let sys = &norm.system;
    let grid = TimeGrid::for_k_max(sys.trunc.k_max);
    let a_hat = norm.actions_to_normalized(a_star);
    let eps_hat = norm.eps_to_normalized(eps);
    let r = sys.r();
    let mut psi: Vec<f64> = psi_start.map_or_else(|| phi0.to_vec(), |p| p.to_vec());
    let mut a_start = a_hat.clone();
    for _ in 0..60 {
        let ks = solve_kernel(sys, &grid, &eps_hat, &psi, &a_start, params)?;
        let theta0 = ks.range.w.eval(0.0).angle;
        let next: Vec<f64> = (0..r).map(|l| phi0[l] - theta0[l]).collect();
        let change = (0..r).fold(0.0f64, |m, l| m.max(wrap_angle(next[l] - psi[l]).abs()));
        if change <= 1e-13 {
            return Ok(PsiSolution::from_kernel(ks, norm, a_star, sys.mu));
        }
        a_start = ks.a.clone();
        psi = next;
    }
    Err(Error::NonConvergence {
        what: "initial-angle reparameterization",
        iterations: 60,
        residual: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let g = psi_grid(2, 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[1], vec![0.0, 2.0 * PI / 3.0]);
        assert_eq!(g[3], vec![2.0 * PI / 3.0, 0.0]);
    }

    #[test]
    fn trig_interpolation_is_exact_for_band_limited_data() {
        for n in [7usize, 8] {
            let f = |x: f64, y: f64| (x).cos() + 0.3 * (2.0 * y + x).sin() - 0.1 * (3.0 * y).cos();
            let vals: Vec<Vec<f64>> = psi_grid(2, n).iter().map(|p| vec![f(p[0], p[1])]).collect();
            let fine = trig_refine(&vals, 2, n, 3 * n);
            for (p, v) in psi_grid(2, 3 * n).iter().zip(&fine) {
                assert!((v[0] - f(p[0], p[1])).abs() < 1e-12, "n={n}");
            }
        }
    }
}
