//! The loop operator `L_eps`, its inverse on the range, and the kernel/range
//! projectors.
//!
//! `L_eps (J, theta, p, q) = (J', theta', p' + W q, q' - W p)` with
//! `W = Omega~_j`, block diagonal in the time index `k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::loop_traj::{Block, LoopTrajectory};
use crate::error::{Error, Result};
use crate::model::{bracket_index, TailMode};

/// Mean actions `a` and mean angles `psi` of a loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelElement {
    pub a: Vec<f64>,
    pub psi: Vec<f64>,
}

/// Splits a loop into its kernel part (means of `I` and `phi`) and its range
/// part (everything else).
pub fn project_kernel(lp: &LoopTrajectory) -> (KernelElement, LoopTrajectory) {
    let r = lp.r;
    let a = (0..r).map(|c| lp.get(c, 0).re).collect();
    let psi = (0..r).map(|c| lp.get(r + c, 0).re).collect();
    let mut range = lp.clone();
    for c in 0..2 * r {
        range.set(c, 0, Complex64::new(0.0, 0.0));
    }
    (KernelElement { a, psi }, range)
}

/// `P zeta`.
pub fn project_range(lp: &LoopTrajectory) -> LoopTrajectory {
    project_kernel(lp).1
}

/// `L_eps zeta` by Fourier multiplication.
pub fn apply_loop_operator(tilde_omega: &[f64], lp: &LoopTrajectory) -> LoopTrajectory {
    let km = lp.k_max as i64;
    let (r, n) = (lp.r, lp.n_tail);
    let mut out = LoopTrajectory::zeros(r, n, lp.k_max);
    for k in -km..=km {
        let ik = Complex64::new(0.0, k as f64);
        for c in 0..2 * r {
            out.set(c, k, ik * lp.get(c, k));
        }
        for (j, &w) in tilde_omega.iter().enumerate() {
            let (p, q) = (lp.get(2 * r + j, k), lp.get(2 * r + n + j, k));
            out.set(2 * r + j, k, ik * p + q * w);
            out.set(2 * r + n + j, k, ik * q - p * w);
        }
    }
    out
}

/// Solves `L_eps w' = w` for `w` in the range.
///
/// Every denominator is checked against the certificate
/// `|k +- Omega~_j| >= gamma / [j]^tau`; a violation means the Diophantine
/// window that certified `eps` does not cover this loop.
pub fn invert_loop_operator(
    tilde_omega: &[f64],
    tail: &[TailMode],
    w: &LoopTrajectory,
    gamma: f64,
    tau: f64,
) -> Result<LoopTrajectory> {
    let km = w.k_max as i64;
    let (r, n) = (w.r, w.n_tail);
    let mut out = LoopTrajectory::zeros(r, n, w.k_max);
    for c in 0..2 * r {
        debug_assert!(matches!(w.block(c), Block::Action(_) | Block::Angle(_)));
        for k in -km..=km {
            if k != 0 {
                out.set(c, k, w.get(c, k) / Complex64::new(0.0, k as f64));
            }
        }
    }
    for (j, &om) in tilde_omega.iter().enumerate() {
        let bound = gamma / bracket_index(tail[j].weight_index()).powf(tau);
        for k in -km..=km {
            let kf = k as f64;
            let small = (kf - om).abs().min((kf + om).abs());
            if small < bound {
                return Err(Error::SmallDenominator {
                    j,
                    weight: tail[j].weight_index(),
                    k,
                    distance: small,
                    bound,
                });
            }
            let ik = Complex64::new(0.0, kf);
            let det = om * om - kf * kf;
            let (p, q) = (w.get(2 * r + j, k), w.get(2 * r + n + j, k));
            out.set(2 * r + j, k, (ik * p - q * om) / det);
            out.set(2 * r + n + j, k, (p * om + ik * q) / det);
        }
    }
    Ok(out)
}
