//! Change of basis putting the resonance vector `n` into the first slot.
//!
//! With an integer unimodular `M` whose first row is `n`, the Hamiltonians
//! `H^_l = sum_k M_lk H^(k)` are again in normal form in the actions
//! `I^ = M I` and angles `phi^ = M^{-T} phi` (a symplectic, lattice-preserving
//! change of variables), and `H^_1 = sum n_l H^(l)`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{CommutingSystem, Nonlinearity, PhasePoint};

/// Unimodular `M` with first row `n`, and its inverse.
pub fn unimodular_completion(n: &[i64]) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let r = n.len();
    if r == 0 || n.iter().all(|x| *x == 0) {
        return Err(Error::NoUnimodularCompletion(n.to_vec()));
    }
    let id = |r: usize| -> Vec<Vec<i64>> {
        (0..r).map(|i| (0..r).map(|j| i64::from(i == j)).collect()).collect()
    };
    // Column operations on the row vector v = n U are mirrored as row
    // operations on U^{-1}; at the end v = e_1 and M = U^{-1}.
    let mut v = n.to_vec();
    let mut u = id(r);
    let mut u_inv = id(r);
    loop {
        let nonzero: Vec<usize> = (0..r).filter(|&i| v[i] != 0).collect();
        if nonzero.len() == 1 {
            break;
        }
        let i = *nonzero.iter().min_by_key(|&&i| v[i].abs()).unwrap();
        for &j in &nonzero {
            if j == i {
                continue;
            }
            let q = v[j] / v[i];
            v[j] -= q * v[i];
            for row in u.iter_mut() {
                row[j] -= q * row[i];
            }
            for c in 0..r {
                let add = q * u_inv[j][c];
                u_inv[i][c] += add;
            }
        }
    }
    let i = (0..r).find(|&i| v[i] != 0).unwrap();
    if v[i].abs() != 1 {
        return Err(Error::NoUnimodularCompletion(n.to_vec()));
    }
    if i != 0 {
        v.swap(0, i);
        for row in u.iter_mut() {
            row.swap(0, i);
        }
        u_inv.swap(0, i);
    }
    if v[0] == -1 {
        for row in u.iter_mut() {
            row[0] = -row[0];
        }
        for c in 0..r {
            u_inv[0][c] = -u_inv[0][c];
        }
    }
    debug_assert_eq!(u_inv[0], n.to_vec());
    Ok((u_inv, u))
}

fn to_f64(m: &[Vec<i64>]) -> DMatrix<f64> {
    let r = m.len();
    DMatrix::from_fn(r, r, |i, j| m[i][j] as f64)
}

/// Nonlinearities `F^_l = sum_k M_lk F^(k)` in the new variables.
struct Transformed {
    inner: Arc<dyn Nonlinearity>,
    m: DMatrix<f64>,
    m_inv: DMatrix<f64>,
}

impl Transformed {
    fn pull_back(&self, z: &PhasePoint) -> PhasePoint {
        let i = &self.m_inv * nalgebra::DVector::from_column_slice(&z.action);
        let phi = self.m.transpose() * nalgebra::DVector::from_column_slice(&z.angle);
        PhasePoint {
            action: i.iter().copied().collect(),
            angle: phi.iter().copied().collect(),
            p: z.p.clone(),
            q: z.q.clone(),
        }
    }

    fn inner_coeffs(&self, coeffs: &[f64]) -> Vec<f64> {
        (self.m.transpose() * nalgebra::DVector::from_column_slice(coeffs))
            .iter()
            .copied()
            .collect()
    }

    fn push_gradient(&self, g: PhasePoint) -> PhasePoint {
        let gi = self.m_inv.transpose() * nalgebra::DVector::from_column_slice(&g.action);
        let gphi = &self.m * nalgebra::DVector::from_column_slice(&g.angle);
        PhasePoint {
            action: gi.iter().copied().collect(),
            angle: gphi.iter().copied().collect(),
            p: g.p,
            q: g.q,
        }
    }
}

impl Nonlinearity for Transformed {
    fn count(&self) -> usize {
        self.inner.count()
    }

    fn smoothing_order(&self) -> f64 {
        self.inner.smoothing_order()
    }

    fn value(&self, l: usize, z: &PhasePoint, mu: f64) -> Result<f64> {
        let mut c = vec![0.0; self.count()];
        *c.get_mut(l).ok_or(Error::IndexOutOfRange { index: l, len: self.count() })? = 1.0;
        self.combined_value(&c, z, mu)
    }

    fn gradient(&self, l: usize, z: &PhasePoint, mu: f64) -> Result<PhasePoint> {
        let mut c = vec![0.0; self.count()];
        *c.get_mut(l).ok_or(Error::IndexOutOfRange { index: l, len: self.count() })? = 1.0;
        self.combined_gradient(&c, z, mu)
    }

    fn combined_value(&self, coeffs: &[f64], z: &PhasePoint, mu: f64) -> Result<f64> {
        self.inner.combined_value(&self.inner_coeffs(coeffs), &self.pull_back(z), mu)
    }

    fn combined_gradient(&self, coeffs: &[f64], z: &PhasePoint, mu: f64) -> Result<PhasePoint> {
        let g = self
            .inner
            .combined_gradient(&self.inner_coeffs(coeffs), &self.pull_back(z), mu)?;
        Ok(self.push_gradient(g))
    }

    fn combined_action_hessian(
        &self,
        coeffs: &[f64],
        z: &PhasePoint,
        mu: f64,
    ) -> Result<Option<DMatrix<f64>>> {
        Ok(self
            .inner
            .combined_action_hessian(&self.inner_coeffs(coeffs), &self.pull_back(z), mu)?
            .map(|h| self.m_inv.transpose() * h * &self.m_inv))
    }
}

/// A system together with its `n = e_1` normalization.
#[derive(Clone, Debug)]
pub struct NormalizedSystem {
    pub original: CommutingSystem,
    /// Equivalent system with `n = e_1`.
    pub system: CommutingSystem,
    pub m: DMatrix<f64>,
    pub m_inv: DMatrix<f64>,
}

impl NormalizedSystem {
    pub fn is_identity(&self) -> bool {
        self.m == DMatrix::identity(self.m.nrows(), self.m.ncols())
    }

    /// Point in the normalized variables from original variables.
    pub fn to_normalized(&self, z: &PhasePoint) -> PhasePoint {
        let i = &self.m * nalgebra::DVector::from_column_slice(&z.action);
        let phi = self.m_inv.transpose() * nalgebra::DVector::from_column_slice(&z.angle);
        PhasePoint {
            action: i.iter().copied().collect(),
            angle: phi.iter().copied().collect(),
            p: z.p.clone(),
            q: z.q.clone(),
        }
    }

    /// Point in the original variables.
    pub fn to_original(&self, z: &PhasePoint) -> PhasePoint {
        let i = &self.m_inv * nalgebra::DVector::from_column_slice(&z.action);
        let phi = self.m.transpose() * nalgebra::DVector::from_column_slice(&z.angle);
        PhasePoint {
            action: i.iter().copied().collect(),
            angle: phi.iter().copied().collect(),
            p: z.p.clone(),
            q: z.q.clone(),
        }
    }

    /// Actions only, normalized -> original.
    pub fn actions_to_original(&self, a: &[f64]) -> Vec<f64> {
        (&self.m_inv * nalgebra::DVector::from_column_slice(a)).iter().copied().collect()
    }

    /// Actions only, original -> normalized.
    pub fn actions_to_normalized(&self, a: &[f64]) -> Vec<f64> {
        (&self.m * nalgebra::DVector::from_column_slice(a)).iter().copied().collect()
    }

    /// `eps^ = M^{-T} eps`, so that `sum (n + eps)_l H^(l) = (e_1 + eps^) . H^`.
    pub fn eps_to_normalized(&self, eps: &[f64]) -> Vec<f64> {
        (self.m_inv.transpose() * nalgebra::DVector::from_column_slice(eps))
            .iter()
            .copied()
            .collect()
    }

    pub fn eps_to_original(&self, eps_hat: &[f64]) -> Vec<f64> {
        (self.m.transpose() * nalgebra::DVector::from_column_slice(eps_hat))
            .iter()
            .copied()
            .collect()
    }
}

/// Rewrites `sys` so that its resonance vector becomes `e_1`.
pub fn normalize_n(sys: &CommutingSystem) -> Result<NormalizedSystem> {
    let (m_int, m_inv_int) = unimodular_completion(&sys.n_vec)?;
    let r = sys.r();
    let m = to_f64(&m_int);
    let m_inv = to_f64(&m_inv_int);
    let mut e1 = vec![0i64; r];
    e1[0] = 1;
    let identity = m == DMatrix::identity(r, r);
    let nonlinearity: Arc<dyn Nonlinearity> = if identity {
        sys.nonlinearity.clone()
    } else {
        Arc::new(Transformed {
            inner: sys.nonlinearity.clone(),
            m: m.clone(),
            m_inv: m_inv.clone(),
        })
    };
    let omega = (0..r)
        .map(|l| {
            (0..sys.n_tail())
                .map(|i| (0..r).map(|k| m[(l, k)] * sys.omega[k][i]).sum())
                .collect()
        })
        .collect();
    let system = CommutingSystem::new(
        sys.trunc.clone(),
        sys.tail.clone(),
        omega,
        e1,
        sys.mu,
        nonlinearity,
    )?;
    Ok(NormalizedSystem {
        original: sys.clone(),
        system,
        m,
        m_inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(n: &[i64]) {
        let (m, mi) = unimodular_completion(n).unwrap();
        assert_eq!(m[0], n.to_vec());
        let mf = to_f64(&m);
        let mif = to_f64(&mi);
        let prod = &mf * &mif;
        assert_eq!(prod, DMatrix::identity(n.len(), n.len()));
    }

    #[test]
    fn completions() {
        check(&[1, 0]);
        check(&[1, 1]);
        check(&[0, 1]);
        check(&[-1, 0, 0]);
        check(&[3, 5]);
        check(&[6, 10, 15]);
        check(&[2, -3, 7, 0]);
    }

    #[test]
    fn e1_is_identity() {
        let (m, _) = unimodular_completion(&[1, 0, 0]).unwrap();
        assert_eq!(m, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn non_primitive_vector_fails() {
        assert!(matches!(
            unimodular_completion(&[2, 4]),
            Err(Error::NoUnimodularCompletion(_))
        ));
        assert!(unimodular_completion(&[0, 0]).is_err());
    }
}
