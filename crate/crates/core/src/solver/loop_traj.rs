//! Periodic loops `zeta(t) = sum_k zeta_k e^{ikt}` with `|k| <= K`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::model::{tail_weight, PhasePoint, TailMode, WeightedSeq};

/// Time-Fourier coefficients of every real component of a loop.
///
/// Components are ordered `I_1..I_r, phi_1..phi_r, p_1..p_n, q_1..q_n`;
/// `coeffs[c][k + K]` is the coefficient of `e^{ikt}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopTrajectory {
    pub r: usize,
    pub n_tail: usize,
    pub k_max: usize,
    pub coeffs: Vec<Vec<Complex64>>,
}

/// Which block a component index belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    Action(usize),
    Angle(usize),
    P(usize),
    Q(usize),
}

impl LoopTrajectory {
    pub fn zeros(r: usize, n_tail: usize, k_max: usize) -> Self {
        Self {
            r,
            n_tail,
            k_max,
            coeffs: vec![vec![Complex64::new(0.0, 0.0); 2 * k_max + 1]; 2 * r + 2 * n_tail],
        }
    }

    pub fn n_components(&self) -> usize {
        2 * self.r + 2 * self.n_tail
    }

    pub fn block(&self, c: usize) -> Block {
        let (r, n) = (self.r, self.n_tail);
        if c < r {
            Block::Action(c)
        } else if c < 2 * r {
            Block::Angle(c - r)
        } else if c < 2 * r + n {
            Block::P(c - 2 * r)
        } else {
            Block::Q(c - 2 * r - n)
        }
    }

    /// Coefficient of `e^{ikt}` in component `c`.
    pub fn get(&self, c: usize, k: i64) -> Complex64 {
        self.coeffs[c][(k + self.k_max as i64) as usize]
    }

    pub fn set(&mut self, c: usize, k: i64, v: Complex64) {
        let km = self.k_max as i64;
        self.coeffs[c][(k + km) as usize] = v;
    }

    /// Sets the `k` coefficient and its conjugate partner at `-k`.
    pub fn set_real_pair(&mut self, c: usize, k: i64, v: Complex64) {
        if k == 0 {
            self.set(c, 0, Complex64::new(v.re, 0.0));
        } else {
            self.set(c, k, v);
            self.set(c, -k, v.conj());
        }
    }

    /// Largest violation of `zeta_{-k} = conj(zeta_k)`.
    pub fn reality_defect(&self) -> f64 {
        let km = self.k_max as i64;
        let mut worst = 0.0f64;
        for c in 0..self.n_components() {
            for k in 0..=km {
                worst = worst.max((self.get(c, -k) - self.get(c, k).conj()).norm());
            }
        }
        worst
    }

    /// Loop norm squared: `2 pi sum_k (1 + k^2) [ |J_k|^2 + |theta_k|^2 +
    /// [j]^{2s} e^{2 sigma |k|} (|p_k|^2 + |q_k|^2) ]`, the Fourier form of
    /// `int |zeta|^2 + |zeta'|^2 dt`.
    pub fn norm_sq(&self, tail: &[TailMode], s: f64, sigma: f64) -> f64 {
        let km = self.k_max as i64;
        let mut acc = 0.0;
        for c in 0..self.n_components() {
            let w_space = match self.block(c) {
                Block::Action(_) | Block::Angle(_) => None,
                Block::P(i) | Block::Q(i) => Some(tail_weight(tail[i].weight_index(), s, 0.0)),
            };
            for k in -km..=km {
                let mut w = 1.0 + (k * k) as f64;
                if let Some(ws) = w_space {
                    w *= ws * (2.0 * sigma * k.abs() as f64).exp();
                }
                acc += w * self.get(c, k).norm_sqr();
            }
        }
        2.0 * PI * acc
    }

    pub fn norm(&self, tail: &[TailMode], s: f64, sigma: f64) -> f64 {
        self.norm_sq(tail, s, sigma).sqrt()
    }

    pub fn axpy(&mut self, alpha: f64, other: &LoopTrajectory) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * alpha;
            }
        }
    }

    pub fn sub(&self, other: &LoopTrajectory) -> LoopTrajectory {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Component values at time `t` (no reference drift added).
    pub fn eval(&self, t: f64) -> PhasePoint {
        let km = self.k_max as i64;
        let phases: Vec<Complex64> = (-km..=km).map(|k| Complex64::from_polar(1.0, k as f64 * t)).collect();
        let vals: Vec<f64> = self
            .coeffs
            .iter()
            .map(|row| row.iter().zip(&phases).map(|(c, e)| (c * e).re).sum())
            .collect();
        self.unpack(&vals)
    }

    fn unpack(&self, vals: &[f64]) -> PhasePoint {
        let (r, n) = (self.r, self.n_tail);
        PhasePoint {
            action: vals[..r].to_vec(),
            angle: vals[r..2 * r].to_vec(),
            p: WeightedSeq(vals[2 * r..2 * r + n].to_vec()),
            q: WeightedSeq(vals[2 * r + n..].to_vec()),
        }
    }

    /// Time shift `zeta(t) -> zeta(t + delta)`.
    pub fn shifted(&self, delta: f64) -> LoopTrajectory {
        let mut out = self.clone();
        let km = self.k_max as i64;
        for row in out.coeffs.iter_mut() {
            for k in -km..=km {
                row[(k + km) as usize] *= Complex64::from_polar(1.0, k as f64 * delta);
            }
        }
        out
    }

    /// Largest coefficient magnitude at `|k| = K`, a cheap truncation gauge.
    pub fn edge_magnitude(&self) -> f64 {
        let km = self.k_max as i64;
        (0..self.n_components())
            .map(|c| self.get(c, km).norm().max(self.get(c, -km).norm()))
            .fold(0.0, f64::max)
    }
}

/// FFT plans for a collocation grid of `n_t` points `t_n = 2 pi n / n_t`.
#[derive(Clone)]
pub struct TimeGrid {
    pub n_t: usize,
    pub k_max: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TimeGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TimeGrid(n_t = {}, k_max = {})", self.n_t, self.k_max)
    }
}

impl TimeGrid {
    /// Grid with `4 K + 1` points, enough to resolve quartic products of
    /// degree-`K` loops without aliasing into `|k| <= K`.
    pub fn for_k_max(k_max: usize) -> Self {
        Self::new(4 * k_max + 1, k_max)
    }

    pub fn new(n_t: usize, k_max: usize) -> Self {
        assert!(n_t > 2 * k_max, "collocation grid too coarse");
        let mut planner = FftPlanner::new();
        Self {
            n_t,
            k_max,
            fwd: planner.plan_fft_forward(n_t),
            inv: planner.plan_fft_inverse(n_t),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_t).map(|n| 2.0 * PI * n as f64 / self.n_t as f64).collect()
    }

    /// Samples of every component, `out[c][n]`.
    pub fn synthesize(&self, lp: &LoopTrajectory) -> Vec<Vec<f64>> {
        let km = lp.k_max as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n_t];
        lp.coeffs
            .iter()
            .map(|row| {
                buf.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
                for k in -km..=km {
                    let idx = k.rem_euclid(self.n_t as i64) as usize;
                    buf[idx] += row[(k + km) as usize];
                }
                self.inv.process(&mut buf);
                buf.iter().map(|x| x.re).collect()
            })
            .collect()
    }

    /// Fourier coefficients `|k| <= K` of real samples `samples[c][n]`.
    pub fn analyze(&self, samples: &[Vec<f64>], r: usize, n_tail: usize) -> LoopTrajectory {
        let mut lp = LoopTrajectory::zeros(r, n_tail, self.k_max);
        let km = self.k_max as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n_t];
        let scale = 1.0 / self.n_t as f64;
        for (c, s) in samples.iter().enumerate() {
            for (b, x) in buf.iter_mut().zip(s) {
                *b = Complex64::new(*x, 0.0);
            }
            self.fwd.process(&mut buf);
            for k in 0..=km {
                let v = buf[k as usize] * scale;
                lp.set_real_pair(c, k, v);
            }
        }
        lp
    }
}
