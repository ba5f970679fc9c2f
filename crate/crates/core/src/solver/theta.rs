//! The nonlinear operator `Theta` of the periodic-orbit equation
//! `L_eps zeta = Theta(zeta)`, evaluated by collocation in time.

use super::loop_traj::{LoopTrajectory, TimeGrid};
use super::operator::KernelElement;
use crate::error::{Error, Result};
use crate::model::{CommutingSystem, PhasePoint, WeightedSeq};

/// Combination coefficients `(1 + eps_1, eps_2, ..., eps_r)` of `F~`.
pub fn tilde_coefficients(eps: &[f64]) -> Vec<f64> {
    let mut c = eps.to_vec();
    c[0] += 1.0;
    c
}

/// `Omega~_j = (1 + eps_1) Omega^(1)_j + sum_{l >= 2} eps_l Omega^(l)_j` for a
/// system with `n = e_1`.
pub fn build_tilde_frequencies(sys: &CommutingSystem, eps: &[f64]) -> Result<Vec<f64>> {
    if sys.n_vec.iter().enumerate().any(|(l, &n)| n != i64::from(l == 0)) {
        return Err(Error::InvalidConfig(
            "tilde frequencies need a system normalized to n = e_1".into(),
        ));
    }
    Ok(sys.combined_omega(&tilde_coefficients(eps)))
}

/// Phase point `(a + J(t), e_1 t + psi + theta(t), p(t), q(t))` from the
/// sampled loop.
pub(crate) fn point_on_grid(
    samples: &[Vec<f64>],
    n: usize,
    t: f64,
    kernel: &KernelElement,
    r: usize,
    n_tail: usize,
) -> PhasePoint {
    let action = (0..r).map(|l| kernel.a[l] + samples[l][n]).collect();
    let angle = (0..r)
        .map(|l| kernel.psi[l] + samples[r + l][n] + if l == 0 { t } else { 0.0 })
        .collect();
    PhasePoint {
        action,
        angle,
        p: WeightedSeq((0..n_tail).map(|i| samples[2 * r + i][n]).collect()),
        q: WeightedSeq((0..n_tail).map(|i| samples[2 * r + n_tail + i][n]).collect()),
    }
}

/// `Theta(w + kernel, eps, beta, mu)`:
///
/// ```text
/// I'   = -mu dF~/dphi + beta,     phi' = eps + mu dF~/dI,
/// p'   = -mu dF~/dq,              q'   =  mu dF~/dp,
/// ```
///
/// evaluated along `(a, e_1 t + psi, 0, 0) + w(t)`. The system must be
/// normalized to `n = e_1`.
pub fn theta_map(
    sys: &CommutingSystem,
    grid: &TimeGrid,
    eps: &[f64],
    beta: &[f64],
    w: &LoopTrajectory,
    kernel: &KernelElement,
) -> Result<LoopTrajectory> {
    let (r, nt) = (sys.r(), sys.n_tail());
    let mu = sys.mu;
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; grid.n_t]; 2 * r + 2 * nt];
    for l in 0..r {
        out[l].iter_mut().for_each(|x| *x = beta[l]);
        out[r + l].iter_mut().for_each(|x| *x = eps[l]);
    }
    if mu != 0.0 {
        let c = tilde_coefficients(eps);
        let samples = grid.synthesize(w);
        for (n, t) in grid.times().into_iter().enumerate() {
            let z = point_on_grid(&samples, n, t, kernel, r, nt);
            let g = sys.nonlinearity.combined_gradient(&c, &z, mu)?;
            if !g.is_finite() {
                return Err(Error::Oracle(format!("non-finite gradient at t = {t}")));
            }
            for l in 0..r {
                out[l][n] -= mu * g.angle[l];
                out[r + l][n] += mu * g.action[l];
            }
            for i in 0..nt {
                out[2 * r + i][n] = -mu * g.q[i];
                out[2 * r + nt + i][n] = mu * g.p[i];
            }
        }
    }
    Ok(grid.analyze(&out, r, nt))
}
