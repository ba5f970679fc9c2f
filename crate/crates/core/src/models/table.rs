//! Custom-table model: user-supplied tail frequencies and an integrable
//! nonlinearity depending on actions only,
//!
//! ```text
//! F^(l) = kappa_l ( I^T G I / 2 + sum_j h_j A_j^2 / 2 ),   A_j = (p_j^2 + q_j^2)/2.
//! ```
//!
//! All `F^(l)` Poisson-commute, and every torus `{I = a, p = q = 0}` is
//! invariant, which makes the model a clean end-to-end test case.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    CartesianSplit, CommutingSystem, Nonlinearity, PhasePoint, TailMode, TruncationParams,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableConfig {
    pub mu: f64,
    pub trunc: TruncationParams,
    /// `omega[l][i]` for tail modes `j = j_min + i`.
    pub omega: Vec<Vec<f64>>,
    /// Row-major `r x r` symmetric coupling of the actions.
    pub g: Vec<Vec<f64>>,
    /// Self-coupling of the tail oscillators.
    pub h: Vec<f64>,
    pub kappa: Vec<f64>,
    pub n: Vec<i64>,
    /// Declared smoothing order `d`.
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
}

fn default_smoothing() -> f64 {
    1.0
}

pub struct ActionCoupling {
    g: DMatrix<f64>,
    h: Vec<f64>,
    kappa: Vec<f64>,
    smoothing: f64,
}

impl ActionCoupling {
    pub fn new(g: DMatrix<f64>, h: Vec<f64>, kappa: Vec<f64>, smoothing: f64) -> Result<Self> {
        let r = kappa.len();
        if g.nrows() != r || g.ncols() != r {
            return Err(Error::InvalidConfig(format!("G must be {r} x {r}")));
        }
        if (&g - g.transpose()).amax() > 1e-14 * g.amax().max(1.0) {
            return Err(Error::InvalidConfig("G must be symmetric".into()));
        }
        Ok(Self { g, h, kappa, smoothing })
    }

    fn kappa_eff(&self, coeffs: &[f64]) -> f64 {
        coeffs.iter().zip(&self.kappa).map(|(c, k)| c * k).sum()
    }

    fn base_value(&self, z: &PhasePoint) -> f64 {
        let i = nalgebra::DVector::from_column_slice(&z.action);
        let tail: f64 = self
            .h
            .iter()
            .zip(z.p.iter().zip(z.q.iter()))
            .map(|(h, (p, q))| {
                let a = (p * p + q * q) / 2.0;
                h * a * a / 2.0
            })
            .sum();
        0.5 * i.dot(&(&self.g * &i)) + tail
    }
}

impl Nonlinearity for ActionCoupling {
    fn count(&self) -> usize {
        self.kappa.len()
    }

    fn smoothing_order(&self) -> f64 {
        self.smoothing
    }

    fn value(&self, l: usize, z: &PhasePoint, _mu: f64) -> Result<f64> {
        let k = self
            .kappa
            .get(l)
            .ok_or(Error::IndexOutOfRange { index: l, len: self.count() })?;
        Ok(k * self.base_value(z))
    }

    fn gradient(&self, l: usize, z: &PhasePoint, mu: f64) -> Result<PhasePoint> {
        let mut c = vec![0.0; self.count()];
        *c.get_mut(l).ok_or(Error::IndexOutOfRange { index: l, len: self.count() })? = 1.0;
        self.combined_gradient(&c, z, mu)
    }

    fn combined_value(&self, coeffs: &[f64], z: &PhasePoint, _mu: f64) -> Result<f64> {
        Ok(self.kappa_eff(coeffs) * self.base_value(z))
    }

    fn combined_gradient(&self, coeffs: &[f64], z: &PhasePoint, _mu: f64) -> Result<PhasePoint> {
        let k = self.kappa_eff(coeffs);
        let i = nalgebra::DVector::from_column_slice(&z.action);
        let gi = &self.g * i;
        let mut out = PhasePoint::zeros(z.r(), z.n_tail());
        for a in 0..z.r() {
            out.action[a] = k * gi[a];
        }
        for j in 0..z.n_tail() {
            let amp = (z.p[j] * z.p[j] + z.q[j] * z.q[j]) / 2.0;
            out.p[j] = k * self.h[j] * amp * z.p[j];
            out.q[j] = k * self.h[j] * amp * z.q[j];
        }
        Ok(out)
    }

    fn combined_action_hessian(
        &self,
        coeffs: &[f64],
        _z: &PhasePoint,
        _mu: f64,
    ) -> Result<Option<DMatrix<f64>>> {
        Ok(Some(&self.g * self.kappa_eff(coeffs)))
    }

    fn cartesian(&self) -> Option<&dyn CartesianSplit> {
        Some(self)
    }
}

impl CartesianSplit for ActionCoupling {
    fn kick(&self, coeffs: &[f64], mu: f64, x: &mut [f64], dt: f64) {
        // Functions of the actions only: every oscillator rotates rigidly with
        // the frozen rate dF/dA.
        let k = mu * self.kappa_eff(coeffs);
        let r = self.kappa.len();
        let amp = |x: &[f64], m: usize| (x[2 * m] * x[2 * m] + x[2 * m + 1] * x[2 * m + 1]) / 2.0;
        let actions: Vec<f64> = (0..r).map(|a| amp(x, a)).collect();
        let gi = &self.g * nalgebra::DVector::from_vec(actions);
        let modes = x.len() / 2;
        for m in 0..modes {
            let rate = if m < r { k * gi[m] } else { k * self.h[m - r] * amp(x, m) };
            let (s, c) = (rate * dt).sin_cos();
            let (p, q) = (x[2 * m], x[2 * m + 1]);
            x[2 * m] = p * c - q * s;
            x[2 * m + 1] = p * s + q * c;
        }
    }
}

/// System built from explicit tables.
pub fn build_table(cfg: &TableConfig) -> Result<CommutingSystem> {
    let r = cfg.trunc.r;
    let n_tail = cfg.h.len();
    if cfg.g.len() != r || cfg.g.iter().any(|row| row.len() != r) {
        return Err(Error::InvalidConfig(format!("g must be {r} x {r}")));
    }
    let g = DMatrix::from_fn(r, r, |i, j| cfg.g[i][j]);
    let nl = ActionCoupling::new(g, cfg.h.clone(), cfg.kappa.clone(), cfg.smoothing)?;
    let tail = (0..n_tail)
        .map(|i| TailMode { pol: 0, j: (cfg.trunc.j_min + i) as i64 })
        .collect();
    CommutingSystem::new(
        cfg.trunc.clone(),
        tail,
        cfg.omega.clone(),
        cfg.n.clone(),
        cfg.mu,
        Arc::new(nl),
    )
}
