//! Phase-space types, weighted norms and the Poisson structure for systems of
//! `r` Hamiltonians of the form
//!
//! ```text
//! H^(l) = I_l + sum_j Omega_j^(l) (p_j^2 + q_j^2) / 2 + mu F^(l)(z),   l = 1..r
//! ```
//!
//! on `z = (I, phi, p, q)`: `r` actions, `r` angles and a finite tail of
//! harmonic oscillators. Angles are stored as plain reals (covering space);
//! every model shipped with this crate uses `2*pi`-periodic angles.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation and weight parameters shared by every stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationParams {
    /// Number of torus modes.
    pub r: usize,
    /// First abstract tail index (tables only; field models enumerate their own tail).
    pub j_min: usize,
    /// Galerkin cutoff. For field models this is the largest physical wave number.
    pub j_max: usize,
    /// Time-Fourier cutoff.
    pub k_max: usize,
    pub s: f64,
    pub sigma: f64,
    pub tau: f64,
    pub gamma: f64,
}

impl TruncationParams {
    pub fn validate(&self, smoothing_order: f64) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidConfig("r must be >= 1".into()));
        }
        if self.j_min < 1 || self.j_max < self.j_min {
            return Err(Error::InvalidConfig(format!(
                "need j_max >= j_min >= 1, got j_min={} j_max={}",
                self.j_min, self.j_max
            )));
        }
        if self.k_max < 1 {
            return Err(Error::InvalidConfig("k_max must be >= 1".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidConfig("gamma must be > 0".into()));
        }
        if self.sigma < 0.0 {
            return Err(Error::InvalidConfig("sigma must be >= 0".into()));
        }
        if self.tau > smoothing_order {
            return Err(Error::InvalidConfig(format!(
                "tau = {} exceeds the smoothing order d = {}",
                self.tau, smoothing_order
            )));
        }
        Ok(())
    }
}

/// `[j] = max(1, |j|)`.
pub fn bracket_index(j: f64) -> f64 {
    j.abs().max(1.0)
}

/// Weight `[j]^{2s} e^{2 sigma j}` of the `l^2_{s,sigma}` norm.
pub fn tail_weight(j: f64, s: f64, sigma: f64) -> f64 {
    let b = bracket_index(j);
    b.powf(2.0 * s) * (2.0 * sigma * j.abs()).exp()
}

/// Label of one tail oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailMode {
    /// Polarization (0 for scalar fields and abstract tables).
    pub pol: u8,
    /// Physical (signed) wave number, or abstract index for tables.
    pub j: i64,
}

impl TailMode {
    /// Index entering the weights `[j]`.
    pub fn weight_index(&self) -> f64 {
        self.j.unsigned_abs() as f64
    }
}

impl fmt::Display for TailMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {:+})", self.pol, self.j)
    }
}

/// A truncated `l^2_{s,sigma}` sequence (one half, `p` or `q`, of the tail).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedSeq(pub Vec<f64>);

impl WeightedSeq {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum_j [j]^{2s} e^{2 sigma j} x_j^2`.
    pub fn norm_sq(&self, tail: &[TailMode], s: f64, sigma: f64) -> f64 {
        self.0
            .iter()
            .zip(tail)
            .map(|(x, m)| tail_weight(m.weight_index(), s, sigma) * x * x)
            .sum()
    }
}

impl std::ops::Deref for WeightedSeq {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::DerefMut for WeightedSeq {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// `z = (I, phi, p, q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub action: Vec<f64>,
    pub angle: Vec<f64>,
    pub p: WeightedSeq,
    pub q: WeightedSeq,
}

impl PhasePoint {
    pub fn zeros(r: usize, n_tail: usize) -> Self {
        Self {
            action: vec![0.0; r],
            angle: vec![0.0; r],
            p: WeightedSeq::zeros(n_tail),
            q: WeightedSeq::zeros(n_tail),
        }
    }

    pub fn r(&self) -> usize {
        self.action.len()
    }

    pub fn n_tail(&self) -> usize {
        self.p.len()
    }

    /// Weak scalar product `sum (I I' + phi phi') + sum (p p' + q q')`.
    pub fn dot(&self, other: &PhasePoint) -> f64 {
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        d(&self.action, &other.action)
            + d(&self.angle, &other.angle)
            + d(&self.p, &other.p)
            + d(&self.q, &other.q)
    }

    /// `|I|^2 + |phi|^2 + |p|_{s,sigma}^2 + |q|_{s,sigma}^2` (tangent-space norm).
    pub fn norm_sq(&self, tail: &[TailMode], s: f64, sigma: f64) -> f64 {
        let e = |a: &[f64]| a.iter().map(|x| x * x).sum::<f64>();
        e(&self.action)
            + e(&self.angle)
            + self.p.norm_sq(tail, s, sigma)
            + self.q.norm_sq(tail, s, sigma)
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &PhasePoint) {
        let ax = |a: &mut [f64], b: &[f64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += alpha * y);
        ax(&mut self.action, &other.action);
        ax(&mut self.angle, &other.angle);
        ax(&mut self.p, &other.p);
        ax(&mut self.q, &other.q);
    }

    pub fn scale(&mut self, alpha: f64) {
        self.action.iter_mut().for_each(|x| *x *= alpha);
        self.angle.iter_mut().for_each(|x| *x *= alpha);
        self.p.iter_mut().for_each(|x| *x *= alpha);
        self.q.iter_mut().for_each(|x| *x *= alpha);
    }

    pub fn sub(&self, other: &PhasePoint) -> PhasePoint {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Difference with the angle components wrapped into `(-pi, pi]`.
    pub fn torus_difference(&self, other: &PhasePoint) -> PhasePoint {
        let mut d = self.sub(other);
        for a in d.angle.iter_mut() {
            *a = wrap_angle(*a);
        }
        d
    }

    pub fn is_finite(&self) -> bool {
        self.action
            .iter()
            .chain(&self.angle)
            .chain(self.p.iter())
            .chain(self.q.iter())
            .all(|x| x.is_finite())
    }
}

/// Wrap an angle difference into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Poisson tensor `J(I, phi, p, q) = (-phi, I, -q, p)`.
pub fn poisson_tensor_apply(z: &PhasePoint) -> PhasePoint {
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    PhasePoint {
        action: neg(&z.angle),
        angle: z.action.clone(),
        p: WeightedSeq(neg(&z.q)),
        q: z.p.clone(),
    }
}

/// Exact sub-flows used by the splitting integrator.
///
/// The Cartesian layout is `[p_1, q_1, ..., p_r, q_r, p_{tail}, q_{tail}...]`
/// interleaved per mode: torus modes first through `p = sqrt(2I) cos(phi)`,
/// `q = sqrt(2I) sin(phi)`, then the tail in system order.
pub trait CartesianSplit: Send + Sync {
    /// Advance `x` by the exact time-`dt` flow of `mu * sum_l c_l F^(l)`.
    fn kick(&self, coeffs: &[f64], mu: f64, x: &mut [f64], dt: f64);
}

/// Gradient oracles for the nonlinearities `F^(l)`.
///
/// Gradients are taken with respect to the weak scalar product, i.e. they are
/// plain partial derivatives in `(I, phi, p, q)`.
pub trait Nonlinearity: Send + Sync {
    /// Number of Hamiltonians `r`.
    fn count(&self) -> usize;

    /// Declared smoothing order `d` of the nonlinear vector field.
    fn smoothing_order(&self) -> f64;

    fn value(&self, l: usize, z: &PhasePoint, mu: f64) -> Result<f64>;

    fn gradient(&self, l: usize, z: &PhasePoint, mu: f64) -> Result<PhasePoint>;

    /// Value of `sum_l c_l F^(l)`.
    fn combined_value(&self, coeffs: &[f64], z: &PhasePoint, mu: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (l, c) in coeffs.iter().enumerate() {
            if *c != 0.0 {
                acc += c * self.value(l, z, mu)?;
            }
        }
        Ok(acc)
    }

    /// Gradient of `sum_l c_l F^(l)`.
    fn combined_gradient(&self, coeffs: &[f64], z: &PhasePoint, mu: f64) -> Result<PhasePoint> {
        let mut acc = PhasePoint::zeros(z.r(), z.n_tail());
        for (l, c) in coeffs.iter().enumerate() {
            if *c != 0.0 {
                acc.axpy(*c, &self.gradient(l, z, mu)?);
            }
        }
        Ok(acc)
    }

    /// Second derivatives of `sum_l c_l F^(l)` with respect to the actions.
    fn combined_action_hessian(
        &self,
        _coeffs: &[f64],
        _z: &PhasePoint,
        _mu: f64,
    ) -> Result<Option<DMatrix<f64>>> {
        Ok(None)
    }

    /// Exact kick flow, when the model has one.
    fn cartesian(&self) -> Option<&dyn CartesianSplit> {
        None
    }
}

/// `r` Hamiltonians in the normal form above.
#[derive(Clone)]
pub struct CommutingSystem {
    pub trunc: TruncationParams,
    pub tail: Vec<TailMode>,
    /// `omega[l][i]`: frequency of tail mode `i` in `H^(l)`.
    pub omega: Vec<Vec<f64>>,
    pub n_vec: Vec<i64>,
    pub mu: f64,
    pub nonlinearity: Arc<dyn Nonlinearity>,
}

impl fmt::Debug for CommutingSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CommutingSystem")
            .field("r", &self.r())
            .field("n_tail", &self.n_tail())
            .field("n_vec", &self.n_vec)
            .field("mu", &self.mu)
            .finish()
    }
}

impl CommutingSystem {
    pub fn new(
        trunc: TruncationParams,
        tail: Vec<TailMode>,
        omega: Vec<Vec<f64>>,
        n_vec: Vec<i64>,
        mu: f64,
        nonlinearity: Arc<dyn Nonlinearity>,
    ) -> Result<Self> {
        trunc.validate(nonlinearity.smoothing_order())?;
        let r = trunc.r;
        if omega.len() != r || nonlinearity.count() != r || n_vec.len() != r {
            return Err(Error::InvalidConfig(format!(
                "dimension mismatch: r={r}, omega rows={}, oracles={}, n={}",
                omega.len(),
                nonlinearity.count(),
                n_vec.len()
            )));
        }
        if omega.iter().any(|row| row.len() != tail.len()) {
            return Err(Error::InvalidConfig("omega rows must match the tail length".into()));
        }
        if n_vec.iter().all(|n| *n == 0) {
            return Err(Error::InvalidConfig("n must be nonzero".into()));
        }
        Ok(Self {
            trunc,
            tail,
            omega,
            n_vec,
            mu,
            nonlinearity,
        })
    }

    pub fn r(&self) -> usize {
        self.trunc.r
    }

    pub fn n_tail(&self) -> usize {
        self.tail.len()
    }

    pub fn zero_point(&self) -> PhasePoint {
        PhasePoint::zeros(self.r(), self.n_tail())
    }

    /// Tail frequencies `sum_l c_l Omega_j^(l)`.
    pub fn combined_omega(&self, coeffs: &[f64]) -> Vec<f64> {
        (0..self.n_tail())
            .map(|i| coeffs.iter().zip(&self.omega).map(|(c, row)| c * row[i]).sum())
            .collect()
    }

    fn check_index(&self, l: usize) -> Result<()> {
        if l >= self.r() {
            Err(Error::IndexOutOfRange { index: l, len: self.r() })
        } else {
            Ok(())
        }
    }

    /// `H^(l)(z)` (zero-based `l`).
    pub fn hamiltonian_value(&self, l: usize, z: &PhasePoint) -> Result<f64> {
        self.check_index(l)?;
        let quad: f64 = self.omega[l]
            .iter()
            .zip(z.p.iter().zip(z.q.iter()))
            .map(|(w, (p, q))| w * (p * p + q * q) / 2.0)
            .sum();
        let nl = if self.mu != 0.0 {
            self.mu * self.nonlinearity.value(l, z, self.mu)?
        } else {
            0.0
        };
        Ok(z.action[l] + quad + nl)
    }

    /// `sum_l c_l H^(l)(z)`.
    pub fn combined_value(&self, coeffs: &[f64], z: &PhasePoint) -> Result<f64> {
        let mut acc = 0.0;
        for (l, c) in coeffs.iter().enumerate() {
            acc += c * self.hamiltonian_value(l, z)?;
        }
        Ok(acc)
    }

    /// Gradient of `sum_l c_l H^(l)` with respect to the weak scalar product.
    pub fn combined_gradient(&self, coeffs: &[f64], z: &PhasePoint) -> Result<PhasePoint> {
        let mut g = if self.mu != 0.0 {
            let mut g = self.nonlinearity.combined_gradient(coeffs, z, self.mu)?;
            g.scale(self.mu);
            g
        } else {
            self.zero_point()
        };
        for (l, c) in coeffs.iter().enumerate() {
            g.action[l] += c;
        }
        let w = self.combined_omega(coeffs);
        for i in 0..self.n_tail() {
            g.p[i] += w[i] * z.p[i];
            g.q[i] += w[i] * z.q[i];
        }
        Ok(g)
    }

    pub fn hamiltonian_gradient(&self, l: usize, z: &PhasePoint) -> Result<PhasePoint> {
        self.check_index(l)?;
        let mut c = vec![0.0; self.r()];
        c[l] = 1.0;
        self.combined_gradient(&c, z)
    }

    /// Hamiltonian vector field `J grad(sum_l c_l H^(l))`.
    pub fn vector_field(&self, coeffs: &[f64], z: &PhasePoint) -> Result<PhasePoint> {
        Ok(poisson_tensor_apply(&self.combined_gradient(coeffs, z)?))
    }

    /// `{H^(l1), H^(l2)}(z) = <grad H^(l1), J grad H^(l2)>`.
    pub fn poisson_bracket(&self, l1: usize, l2: usize, z: &PhasePoint) -> Result<f64> {
        if l1 == l2 {
            self.check_index(l1)?;
            return Ok(0.0);
        }
        let g1 = self.hamiltonian_gradient(l1, z)?;
        let g2 = self.hamiltonian_gradient(l2, z)?;
        Ok(g1.dot(&poisson_tensor_apply(&g2)))
    }

    /// Same system with a different coupling.
    pub fn with_mu(&self, mu: f64) -> Self {
        let mut s = self.clone();
        s.mu = mu;
        s
    }
}
