//! Nonlinear wave equation `u_tt - u_xx + m u = -u^3` on the circle, with the
//! modes `+1` and `-1` excited.
//!
//! The two commuting Hamiltonians are the energy `K1` and the momentum `K2`
//! (generator of translations in `x`). In complex-rotated coordinates
//! `u_j = (p_j + q_{-j})/sqrt(2)`, `U_j = (p_{-j} - q_j)/sqrt(2)` (with
//! `u(x) = sum u_j e_j(x) / sqrt(omega_j)`, `U(x) = sum sqrt(omega_j) U_j e_j(x)`)
//! both are diagonal, and
//!
//! ```text
//! H1 = (K1 + omega_1 K2) / (2 omega_1),   H2 = (K1 - omega_1 K2) / (2 omega_1)
//! ```
//!
//! are in normal form with actions on the modes `+1` and `-1`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::{basis_fn, Contribution, Density, FieldNonlinearity, ModeMap};
use crate::error::{Error, Result};
use crate::model::{CommutingSystem, PhasePoint, TailMode, TruncationParams, WeightedSeq};

/// `omega_j = sqrt(j^2 + m)`.
pub fn omega_nlw(j: i64, m: f64) -> f64 {
    ((j * j) as f64 + m).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlwConfig {
    pub m: f64,
    pub mu: f64,
    pub trunc: TruncationParams,
}

impl NlwConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m < 4.0 / 3.0) {
            return Err(Error::InvalidConfig(format!(
                "NLW mass must lie in (0, 4/3), got {}",
                self.m
            )));
        }
        if self.trunc.r != 2 {
            return Err(Error::InvalidConfig("NLW has r = 2 torus modes".into()));
        }
        if self.trunc.j_max < 2 {
            return Err(Error::InvalidConfig("NLW needs j_max >= 2".into()));
        }
        if !self.mu.is_finite() {
            return Err(Error::InvalidConfig("mu must be finite".into()));
        }
        Ok(())
    }
}

/// Tail order `(0, +2, -2, +3, -3, ..., +J, -J)`.
pub fn nlw_tail(j_max: usize) -> Vec<TailMode> {
    let mut tail = vec![TailMode { pol: 0, j: 0 }];
    for j in 2..=j_max as i64 {
        tail.push(TailMode { pol: 0, j });
        tail.push(TailMode { pol: 0, j: -j });
    }
    tail
}

/// Physical mode of the torus action `l` (zero-based): `+1`, then `-1`.
pub const NLW_TORUS_MODES: [i64; 2] = [1, -1];

/// Contributions of `(p_j, q_j)` to the Fourier coefficients of `u`.
fn mode_map(j: i64, m: f64) -> ModeMap {
    let w = omega_nlw(j, m);
    if j == 0 {
        return ModeMap {
            p: vec![],
            q: vec![Contribution { field: 0, j: 0, coef: 1.0 / w.sqrt() }],
        };
    }
    let c = 1.0 / (2.0 * w).sqrt();
    ModeMap {
        p: vec![Contribution { field: 0, j, coef: c }],
        q: vec![Contribution { field: 0, j: -j, coef: c }],
    }
}

/// Tail frequencies `Omega^(1)_j = (omega_j + j omega_1)/(2 omega_1)` and
/// `Omega^(2)_j = (omega_j - j omega_1)/(2 omega_1)` for signed `j`.
pub fn nlw_frequencies(tail: &[TailMode], m: f64) -> Vec<Vec<f64>> {
    let w1 = omega_nlw(1, m);
    let row = |sign: f64| {
        tail.iter()
            .map(|t| (omega_nlw(t.j, m) + sign * t.j as f64 * w1) / (2.0 * w1))
            .collect()
    };
    vec![row(1.0), row(-1.0)]
}

/// The `r = 2` commuting system of the wave equation.
pub fn build_nlw(cfg: &NlwConfig) -> Result<CommutingSystem> {
    cfg.validate()?;
    let m = cfg.m;
    let tail = nlw_tail(cfg.trunc.j_max);
    let omega = nlw_frequencies(&tail, m);
    let w1 = omega_nlw(1, m);
    let nl = FieldNonlinearity::new(
        Density::Quartic,
        vec![1.0 / (2.0 * w1); 2],
        1.0,
        cfg.trunc.j_max,
        NLW_TORUS_MODES.iter().map(|&j| mode_map(j, m)).collect(),
        tail.iter().map(|t| mode_map(t.j, m)).collect(),
    )?;
    CommutingSystem::new(cfg.trunc.clone(), tail, omega, vec![1, 1], cfg.mu, Arc::new(nl))
}

/// Coefficients of `K1` and `K2` as combinations of `(H1, H2)`.
pub fn nlw_k_coefficients(m: f64) -> [[f64; 2]; 2] {
    let w1 = omega_nlw(1, m);
    [[w1, w1], [1.0, -1.0]]
}

/// `c` in `<F_n>(a) = c (a_1^2 + 4 a_1 a_{-1} + a_{-1}^2)` for `n = (1, 1)`.
pub fn nlw_averaged_constant(m: f64) -> f64 {
    3.0 / (16.0 * PI * omega_nlw(1, m).powi(3))
}

/// Closed-form averaged nonlinearity along the unperturbed torus.
pub fn nlw_averaged_form(a1: f64, a_neg1: f64, m: f64) -> f64 {
    nlw_averaged_constant(m) * (a1 * a1 + 4.0 * a1 * a_neg1 + a_neg1 * a_neg1)
}

/// Frequencies of the `K1` flow on the torus with shift `eps`:
/// `(omega_1 / (1 + e+), -omega_1 e- / (1 + e+))`, `e± = (eps_1 ± eps_2)/2`.
pub fn torus_frequencies_nlw(eps: [f64; 2], m: f64) -> Result<[f64; 2]> {
    let w1 = omega_nlw(1, m);
    let plus = (eps[0] + eps[1]) / 2.0;
    let minus = (eps[0] - eps[1]) / 2.0;
    let den = 1.0 + plus;
    if den.abs() < 1e-14 {
        return Err(Error::DegenerateDenominator { what: "1 + eps_plus", value: den });
    }
    Ok([w1 / den, -w1 * minus / den])
}

/// Converts the rates of the `+1` and `-1` angles into the torus frequencies
/// of [`torus_frequencies_nlw`].
pub fn nlw_mode_rates_to_frequencies(rates: [f64; 2]) -> [f64; 2] {
    [(rates[0] + rates[1]) / 2.0, (rates[0] - rates[1]) / 2.0]
}

/// Field coefficients `(u_j, U_j)` indexed by `j + J`.
#[derive(Clone, Debug, PartialEq)]
pub struct NlwFields {
    pub j_max: usize,
    pub u: Vec<f64>,
    pub big_u: Vec<f64>,
}

impl NlwFields {
    fn idx(&self, j: i64) -> usize {
        (j + self.j_max as i64) as usize
    }

    /// Displacement `u(x)`.
    pub fn displacement(&self, x: f64, m: f64) -> f64 {
        let jm = self.j_max as i64;
        (-jm..=jm)
            .map(|j| self.u[self.idx(j)] / omega_nlw(j, m).sqrt() * basis_fn(j, x))
            .sum()
    }

    /// Momentum `U(x) = u_t`.
    pub fn momentum(&self, x: f64, m: f64) -> f64 {
        let jm = self.j_max as i64;
        (-jm..=jm)
            .map(|j| self.big_u[self.idx(j)] * omega_nlw(j, m).sqrt() * basis_fn(j, x))
            .sum()
    }
}

/// Complex-rotated coordinates of a phase point (torus modes in action-angle).
pub fn nlw_to_fields(z: &PhasePoint, tail: &[TailMode], j_max: usize) -> NlwFields {
    let n = 2 * j_max + 1;
    let mut pq = vec![(0.0, 0.0); n];
    let off = j_max as i64;
    for (l, &j) in NLW_TORUS_MODES.iter().enumerate() {
        let rho = (2.0 * z.action[l].max(0.0)).sqrt();
        pq[(j + off) as usize] = (rho * z.angle[l].cos(), rho * z.angle[l].sin());
    }
    for (i, t) in tail.iter().enumerate() {
        pq[(t.j + off) as usize] = (z.p[i], z.q[i]);
    }
    let mut f = NlwFields { j_max, u: vec![0.0; n], big_u: vec![0.0; n] };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in -off..=off {
        let i = (j + off) as usize;
        let im = (-j + off) as usize;
        if j == 0 {
            f.u[i] = pq[i].1;
            f.big_u[i] = pq[i].0;
        } else {
            f.u[i] = (pq[i].0 + pq[im].1) * s;
            f.big_u[i] = (pq[im].0 - pq[i].1) * s;
        }
    }
    f
}

/// Inverse of [`nlw_to_fields`]; the torus modes are returned in action-angle
/// form with angles in `(-pi, pi]`.
pub fn nlw_from_fields(f: &NlwFields, tail: &[TailMode]) -> PhasePoint {
    let off = f.j_max as i64;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let pq = |j: i64| -> (f64, f64) {
        let i = (j + off) as usize;
        let im = (-j + off) as usize;
        if j == 0 {
            (f.big_u[i], f.u[i])
        } else {
            ((f.u[i] + f.big_u[im]) * s, (f.u[im] - f.big_u[i]) * s)
        }
    };
    let mut z = PhasePoint::zeros(2, tail.len());
    for (l, &j) in NLW_TORUS_MODES.iter().enumerate() {
        let (p, q) = pq(j);
        z.action[l] = (p * p + q * q) / 2.0;
        z.angle[l] = q.atan2(p);
    }
    z.p = WeightedSeq(tail.iter().map(|t| pq(t.j).0).collect());
    z.q = WeightedSeq(tail.iter().map(|t| pq(t.j).1).collect());
    z
}

/// Samples `u` and `U` on `n` uniform points of `(-pi, pi)` and recovers the
/// Fourier coefficients by trapezoidal projection onto `e_j`.
pub fn nlw_fields_round_trip(f: &NlwFields, m: f64, n: usize) -> NlwFields {
    let xs: Vec<f64> = (0..n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect();
    let u: Vec<f64> = xs.iter().map(|&x| f.displacement(x, m)).collect();
    let uu: Vec<f64> = xs.iter().map(|&x| f.momentum(x, m)).collect();
    let w = 2.0 * PI / n as f64;
    let off = f.j_max as i64;
    let project = |vals: &[f64], j: i64| -> f64 {
        w * vals.iter().zip(&xs).map(|(v, &x)| v * basis_fn(j, x)).sum::<f64>()
    };
    NlwFields {
        j_max: f.j_max,
        u: (-off..=off).map(|j| project(&u, j) * omega_nlw(j, m).sqrt()).collect(),
        big_u: (-off..=off).map(|j| project(&uu, j) / omega_nlw(j, m).sqrt()).collect(),
    }
}
