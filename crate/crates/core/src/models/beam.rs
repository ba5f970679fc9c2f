//! Two-direction beam `u_tt + u_xxxx + m u = -(u^2+v^2) u` (same for `v`) on
//! the circle, with the polarization-1 modes `j = 1, 2, 3` excited.
//!
//! Three commuting quantities are the energy `K1`, the momentum `K2` and the
//! rotation generator `K3`; in rotated coordinates they read
//! `K1 = sum omega_j (A_{1,j} + A_{2,j}) + F`, `K2 = sum j (A_{1,j} + A_{2,j})`,
//! `K3 = sum (A_{1,j} - A_{2,j})` with `A = (p^2 + q^2)/2`, and
//! `H = C K / D` with `D = omega_3 - 2 omega_2 + omega_1` puts them in normal
//! form.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::field::{Contribution, Density, FieldNonlinearity, ModeMap};
use crate::error::{Error, Result};
use crate::model::{CommutingSystem, PhasePoint, TailMode, TruncationParams};

/// `omega_j = sqrt(j^4 + m)`.
pub fn omega_beam(j: i64, m: f64) -> f64 {
    ((j as f64).powi(4) + m).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub m: f64,
    pub mu: f64,
    pub trunc: TruncationParams,
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > -1.0 && self.m < 4.0) {
            return Err(Error::InvalidConfig(format!(
                "beam mass must lie in (-1, 4), got {}",
                self.m
            )));
        }
        if self.trunc.r != 3 {
            return Err(Error::InvalidConfig("beam has r = 3 torus modes".into()));
        }
        if self.trunc.j_max < 3 {
            return Err(Error::InvalidConfig("beam needs j_max >= 3".into()));
        }
        Ok(())
    }
}

/// Excited modes: polarization 1, `j = 1, 2, 3`.
pub const BEAM_TORUS_MODES: [i64; 3] = [1, 2, 3];

/// `D = omega_3 - 2 omega_2 + omega_1`.
pub fn beam_denominator(m: f64) -> f64 {
    omega_beam(3, m) - 2.0 * omega_beam(2, m) + omega_beam(1, m)
}

/// Rows `C_l` with `H^(l) = (C_l1 K1 + C_l2 K2 + C_l3 K3) / D`.
pub fn beam_combination(m: f64) -> Result<([[f64; 3]; 3], f64)> {
    let (w1, w2, w3) = (omega_beam(1, m), omega_beam(2, m), omega_beam(3, m));
    let d = w3 - 2.0 * w2 + w1;
    if d.abs() < 1e-12 {
        return Err(Error::DegenerateDenominator { what: "omega_3 - 2 omega_2 + omega_1", value: d });
    }
    Ok((
        [
            [1.0, w2 - w3, 2.0 * w3 - 3.0 * w2],
            [-2.0, w3 - w1, 3.0 * w1 - w3],
            [1.0, w1 - w2, w2 - 2.0 * w1],
        ],
        d,
    ))
}

/// Rows `R_i` with `K_i = sum_l R_il H^(l)`.
pub fn beam_k_coefficients(m: f64) -> Result<[[f64; 3]; 3]> {
    let (c, d) = beam_combination(m)?;
    let cm = Matrix3::from_fn(|i, j| c[i][j] / d);
    let inv = cm
        .try_inverse()
        .ok_or(Error::DegenerateDenominator { what: "beam combination matrix", value: 0.0 })?;
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)])))
}

/// Tail: polarization 1 without `j = 1, 2, 3`, polarization 2 complete,
/// ordered by `|j|`, then sign, then polarization.
pub fn beam_tail(j_max: usize) -> Vec<TailMode> {
    let mut tail = Vec::new();
    for a in 0..=j_max as i64 {
        let signs: &[i64] = if a == 0 { &[0] } else { &[a, -a] };
        for &j in signs {
            for pol in [1u8, 2] {
                if pol == 1 && BEAM_TORUS_MODES.contains(&j) {
                    continue;
                }
                tail.push(TailMode { pol, j });
            }
        }
    }
    tail
}

fn pol_sign(pol: u8) -> f64 {
    if pol == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `Omega^(l)_{pol, j} = (C_l1 omega_j + C_l2 j + C_l3 s_pol) / D`.
pub fn beam_frequencies(tail: &[TailMode], m: f64) -> Result<Vec<Vec<f64>>> {
    let (c, d) = beam_combination(m)?;
    Ok(c.iter()
        .map(|row| {
            tail.iter()
                .map(|t| {
                    (row[0] * omega_beam(t.j, m) + row[1] * t.j as f64 + row[2] * pol_sign(t.pol)) / d
                })
                .collect()
        })
        .collect())
}

/// Contributions of `(p_{pol,j}, q_{pol,j})` to the coefficients of `u`
/// (field 0) and `v` (field 1).
fn mode_map(pol: u8, j: i64, m: f64) -> ModeMap {
    let a = 1.0 / omega_beam(j, m).sqrt();
    let c = |field: usize, j: i64, coef: f64| Contribution { field, j, coef: coef * a };
    if j == 0 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        return match pol {
            1 => ModeMap { p: vec![c(0, 0, s)], q: vec![c(1, 0, s)] },
            _ => ModeMap { p: vec![c(1, 0, s)], q: vec![c(0, 0, s)] },
        };
    }
    match pol {
        1 => ModeMap {
            p: vec![c(1, j, 0.5), c(0, -j, 0.5)],
            q: vec![c(0, j, -0.5), c(1, -j, 0.5)],
        },
        _ => ModeMap {
            p: vec![c(0, j, 0.5), c(1, -j, 0.5)],
            q: vec![c(1, j, -0.5), c(0, -j, 0.5)],
        },
    }
}

/// The `r = 3` commuting system of the beam.
pub fn build_beam(cfg: &BeamConfig) -> Result<CommutingSystem> {
    cfg.validate()?;
    let m = cfg.m;
    let (_, d) = beam_combination(m)?;
    let tail = beam_tail(cfg.trunc.j_max);
    let omega = beam_frequencies(&tail, m)?;
    let nl = FieldNonlinearity::new(
        Density::CoupledQuartic,
        vec![1.0 / d, -2.0 / d, 1.0 / d],
        2.0,
        cfg.trunc.j_max,
        BEAM_TORUS_MODES.iter().map(|&j| mode_map(1, j, m)).collect(),
        tail.iter().map(|t| mode_map(t.pol, t.j, m)).collect(),
    )?;
    CommutingSystem::new(cfg.trunc.clone(), tail, omega, vec![1, 0, 0], cfg.mu, Arc::new(nl))
}

/// `K3 = sum (A_{1,j} - A_{2,j})` including the torus actions.
pub fn beam_k3(tail: &[TailMode], z: &PhasePoint) -> f64 {
    let torus: f64 = z.action.iter().sum();
    let rest: f64 = tail
        .iter()
        .zip(z.p.iter().zip(z.q.iter()))
        .map(|(t, (p, q))| pol_sign(t.pol) * (p * p + q * q) / 2.0)
        .sum();
    torus + rest
}

/// Averaged nonlinearity `<F_n>(a)` for `n = e_1`:
/// `(sum b_j^2 + 4 sum_{i<j} b_i b_j) / (8 pi D)` with `b_j = a_j / omega_j`.
pub fn beam_averaged_form(a: [f64; 3], m: f64) -> Result<f64> {
    let (_, d) = beam_combination(m)?;
    let b: Vec<f64> = (0..3).map(|i| a[i] / omega_beam(BEAM_TORUS_MODES[i], m)).collect();
    let quad = b.iter().map(|x| x * x).sum::<f64>()
        + 4.0 * (b[0] * b[1] + b[1] * b[2] + b[0] * b[2]);
    Ok(quad / (8.0 * PI * d))
}

/// Frequencies of the `K1` flow on the torus with shift `eps`, expressed in
/// the basis of the `H~`, translation and rotation flows.
pub fn torus_frequencies_beam(eps: [f64; 3], m: f64) -> Result<[f64; 3]> {
    let (w1, w2, w3) = (omega_beam(1, m), omega_beam(2, m), omega_beam(3, m));
    let d = w3 - 2.0 * w2 + w1;
    let den = 1.0 + eps[0] - 2.0 * eps[1] + eps[2];
    if den.abs() < 1e-14 {
        return Err(Error::DegenerateDenominator { what: "1 + eps_1 - 2 eps_2 + eps_3", value: den });
    }
    let e1 = 1.0 + eps[0];
    let c2 = e1 * (w2 - w3) + eps[1] * (w3 - w1) + eps[2] * (w1 - w2);
    let c3 = e1 * (2.0 * w3 - 3.0 * w2) + eps[1] * (3.0 * w1 - w3) + eps[2] * (w2 - 2.0 * w1);
    Ok([d / den, -c2 / den, -c3 / den])
}

/// Converts the rates of the three excited angles into the frequencies of
/// [`torus_frequencies_beam`].
pub fn beam_mode_rates_to_frequencies(nu: [f64; 3]) -> [f64; 3] {
    [nu[0] - 2.0 * nu[1] + nu[2], nu[2] - nu[1], 3.0 * nu[1] - 2.0 * nu[2]]
}

/// Rotated Fourier coefficients `(u_j, U_j, v_j, V_j)` indexed by `j + J`;
/// the physical fields are `u(x) = sum u_j e_j(x) / sqrt(omega_j)` and
/// `U(x) = sum sqrt(omega_j) U_j e_j(x)` (same for `v`, `V`).
#[derive(Clone, Debug, PartialEq)]
pub struct BeamFields {
    pub j_max: usize,
    pub u: Vec<f64>,
    pub big_u: Vec<f64>,
    pub v: Vec<f64>,
    pub big_v: Vec<f64>,
}

/// Coordinate map from a phase point (torus modes in action-angle form).
pub fn beam_to_fields(z: &PhasePoint, tail: &[TailMode], j_max: usize) -> BeamFields {
    let n = 2 * j_max + 1;
    let off = j_max as i64;
    // pq[pol - 1][j + J] = (p, q)
    let mut pq = [vec![(0.0, 0.0); n], vec![(0.0, 0.0); n]];
    for (l, &j) in BEAM_TORUS_MODES.iter().enumerate() {
        let rho = (2.0 * z.action[l].max(0.0)).sqrt();
        pq[0][(j + off) as usize] = (rho * z.angle[l].cos(), rho * z.angle[l].sin());
    }
    for (i, t) in tail.iter().enumerate() {
        pq[(t.pol - 1) as usize][(t.j + off) as usize] = (z.p[i], z.q[i]);
    }
    let mut f = BeamFields {
        j_max,
        u: vec![0.0; n],
        big_u: vec![0.0; n],
        v: vec![0.0; n],
        big_v: vec![0.0; n],
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in -off..=off {
        let i = (j + off) as usize;
        let im = (-j + off) as usize;
        let ((p1, q1), (p2, q2)) = (pq[0][i], pq[1][i]);
        if j == 0 {
            f.u[i] = (p1 + q2) * s;
            f.big_u[i] = (p2 - q1) * s;
            f.v[i] = (p2 + q1) * s;
            f.big_v[i] = (p1 - q2) * s;
        } else {
            let ((p1m, q1m), (p2m, q2m)) = (pq[0][im], pq[1][im]);
            f.u[i] = (p2 - q1 + p1m + q2m) / 2.0;
            f.big_u[i] = (p2m - q1m - p1 - q2) / 2.0;
            f.v[i] = (p1 - q2 + p2m + q1m) / 2.0;
            f.big_v[i] = (p1m - q2m - p2 - q1) / 2.0;
        }
    }
    f
}
