//! Spectral collocation of local quartic nonlinearities `F = int G(u) dx` for
//! fields on `x in (-pi, pi)` that are linear in the canonical coordinates.
//!
//! Every canonical coordinate (torus `p`/`q` after the action-angle map, or a
//! tail `p`/`q`) contributes with fixed coefficients to Fourier coefficients of
//! one or more fields in the real basis `e_j` (cosines for `j > 0`, sines for
//! `j < 0`, constant for `j = 0`, all `L^2`-normalized).

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{CartesianSplit, Nonlinearity, PhasePoint};

/// Real Fourier basis function `e_j(x)`.
pub fn basis_fn(j: i64, x: f64) -> f64 {
    if j > 0 {
        (j as f64 * x).cos() / PI.sqrt()
    } else if j < 0 {
        ((-j) as f64 * x).sin() / PI.sqrt()
    } else {
        1.0 / (2.0 * PI).sqrt()
    }
}

/// Local density `G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Density {
    /// `u^4 / 4` for one field.
    Quartic,
    /// `(u^2 + v^2)^2 / 4` for two fields.
    CoupledQuartic,
}

impl Density {
    pub fn fields(&self) -> usize {
        match self {
            Density::Quartic => 1,
            Density::CoupledQuartic => 2,
        }
    }

    fn value(&self, u: &[f64]) -> f64 {
        match self {
            Density::Quartic => u[0].powi(4) / 4.0,
            Density::CoupledQuartic => {
                let s = u[0] * u[0] + u[1] * u[1];
                s * s / 4.0
            }
        }
    }

    fn gradient(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Density::Quartic => out[0] = u[0].powi(3),
            Density::CoupledQuartic => {
                let s = u[0] * u[0] + u[1] * u[1];
                out[0] = s * u[0];
                out[1] = s * u[1];
            }
        }
    }

    fn hessian(&self, u: &[f64], out: &mut [[f64; 2]; 2]) {
        match self {
            Density::Quartic => out[0][0] = 3.0 * u[0] * u[0],
            Density::CoupledQuartic => {
                let s = u[0] * u[0] + u[1] * u[1];
                out[0][0] = s + 2.0 * u[0] * u[0];
                out[1][1] = s + 2.0 * u[1] * u[1];
                out[0][1] = 2.0 * u[0] * u[1];
                out[1][0] = out[0][1];
            }
        }
    }
}

/// One coordinate's contribution `coef * x` to the Fourier coefficient of
/// `e_j` in field `field`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contribution {
    pub field: usize,
    pub j: i64,
    pub coef: f64,
}

/// Contributions of the `p` and `q` coordinate of one oscillator.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModeMap {
    pub p: Vec<Contribution>,
    pub q: Vec<Contribution>,
}

/// `F^(l) = kappa_l * int G(u) dx` evaluated by trapezoidal collocation.
pub struct FieldNonlinearity {
    density: Density,
    kappa: Vec<f64>,
    smoothing: f64,
    j_max: i64,
    nx: usize,
    /// `basis[b][n] = e_{b - j_max}(x_n)`.
    basis: Vec<Vec<f64>>,
    torus: Vec<ModeMap>,
    tail: Vec<ModeMap>,
}

/// Cartesian view of the canonical coordinates: `(p, q)` for every oscillator,
/// torus modes first.
struct Cartesian<'a> {
    torus: &'a [(f64, f64)],
    tail_p: &'a [f64],
    tail_q: &'a [f64],
}

/// Partial derivatives with respect to the Cartesian coordinates.
struct CartesianGrad {
    torus: Vec<(f64, f64)>,
    tail_p: Vec<f64>,
    tail_q: Vec<f64>,
}

impl FieldNonlinearity {
    /// `j_max` is the largest wave number any contribution refers to.
    pub fn new(
        density: Density,
        kappa: Vec<f64>,
        smoothing: f64,
        j_max: usize,
        torus: Vec<ModeMap>,
        tail: Vec<ModeMap>,
    ) -> Result<Self> {
        if kappa.len() != torus.len() {
            return Err(Error::InvalidConfig("one kappa per torus mode expected".into()));
        }
        let j_max = j_max as i64;
        for m in torus.iter().chain(&tail) {
            for c in m.p.iter().chain(&m.q) {
                if c.j.abs() > j_max || c.field >= density.fields() {
                    return Err(Error::InvalidConfig(format!(
                        "contribution {c:?} outside the collocation basis"
                    )));
                }
            }
        }
        // Quartic densities of degree-j_max fields are trigonometric
        // polynomials of degree 4 j_max: the rule is exact for nx >= 4 j_max + 1.
        let nx = 4 * j_max as usize + 2;
        let grid: Vec<f64> = (0..nx)
            .map(|n| -PI + 2.0 * PI * n as f64 / nx as f64)
            .collect();
        let basis = (-j_max..=j_max)
            .map(|j| grid.iter().map(|&x| basis_fn(j, x)).collect())
            .collect();
        Ok(Self {
            density,
            kappa,
            smoothing,
            j_max,
            nx,
            basis,
            torus,
            tail,
        })
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn collocation_points(&self) -> usize {
        self.nx
    }

    fn nb(&self) -> usize {
        (2 * self.j_max + 1) as usize
    }

    fn spectral(&self, x: &Cartesian) -> Vec<Vec<f64>> {
        let mut c = vec![vec![0.0; self.nb()]; self.density.fields()];
        let mut add = |map: &[Contribution], val: f64| {
            if val != 0.0 {
                for ct in map {
                    c[ct.field][(ct.j + self.j_max) as usize] += ct.coef * val;
                }
            }
        };
        for (m, &(p, q)) in self.torus.iter().zip(x.torus) {
            add(&m.p, p);
            add(&m.q, q);
        }
        for (i, m) in self.tail.iter().enumerate() {
            add(&m.p, x.tail_p[i]);
            add(&m.q, x.tail_q[i]);
        }
        c
    }

    /// Field values on the collocation grid, `[field][n]`.
    fn synthesize(&self, coefs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        coefs
            .iter()
            .map(|cf| {
                let mut u = vec![0.0; self.nx];
                for (b, &a) in cf.iter().enumerate() {
                    if a != 0.0 {
                        for (un, e) in u.iter_mut().zip(&self.basis[b]) {
                            *un += a * e;
                        }
                    }
                }
                u
            })
            .collect()
    }

    fn weight(&self) -> f64 {
        2.0 * PI / self.nx as f64
    }

    fn value_cartesian(&self, x: &Cartesian) -> f64 {
        let u = self.synthesize(&self.spectral(x));
        let nf = self.density.fields();
        let mut buf = [0.0; 2];
        let mut acc = 0.0;
        for n in 0..self.nx {
            for f in 0..nf {
                buf[f] = u[f][n];
            }
            acc += self.density.value(&buf[..nf]);
        }
        acc * self.weight()
    }

    fn grad_cartesian(&self, x: &Cartesian) -> CartesianGrad {
        let u = self.synthesize(&self.spectral(x));
        let nf = self.density.fields();
        let mut dg = vec![vec![0.0; self.nx]; nf];
        let mut buf = [0.0; 2];
        let mut out = [0.0; 2];
        for n in 0..self.nx {
            for f in 0..nf {
                buf[f] = u[f][n];
            }
            self.density.gradient(&buf[..nf], &mut out[..nf]);
            for f in 0..nf {
                dg[f][n] = out[f];
            }
        }
        let w = self.weight();
        let dcoef: Vec<Vec<f64>> = dg
            .iter()
            .map(|g| {
                self.basis
                    .iter()
                    .map(|e| w * e.iter().zip(g).map(|(a, b)| a * b).sum::<f64>())
                    .collect()
            })
            .collect();
        let pull = |map: &[Contribution]| -> f64 {
            map.iter()
                .map(|c| c.coef * dcoef[c.field][(c.j + self.j_max) as usize])
                .sum()
        };
        CartesianGrad {
            torus: self.torus.iter().map(|m| (pull(&m.p), pull(&m.q))).collect(),
            tail_p: self.tail.iter().map(|m| pull(&m.p)).collect(),
            tail_q: self.tail.iter().map(|m| pull(&m.q)).collect(),
        }
    }

    /// Hessian of `F` with respect to the torus Cartesian coordinates,
    /// ordered `(p_1, q_1, p_2, q_2, ...)`.
    fn torus_hessian_cartesian(&self, x: &Cartesian) -> DMatrix<f64> {
        let u = self.synthesize(&self.spectral(x));
        let nf = self.density.fields();
        let r = self.torus.len();
        // d[c][f][n]: derivative of field f at x_n along coordinate c.
        let profile = |map: &[Contribution]| -> Vec<Vec<f64>> {
            let mut d = vec![vec![0.0; self.nx]; nf];
            for ct in map {
                let e = &self.basis[(ct.j + self.j_max) as usize];
                for (dn, en) in d[ct.field].iter_mut().zip(e) {
                    *dn += ct.coef * en;
                }
            }
            d
        };
        let d: Vec<Vec<Vec<f64>>> = self
            .torus
            .iter()
            .flat_map(|m| [profile(&m.p), profile(&m.q)])
            .collect();
        let mut h = DMatrix::zeros(2 * r, 2 * r);
        let mut buf = [0.0; 2];
        let mut g2 = [[0.0; 2]; 2];
        let w = self.weight();
        for n in 0..self.nx {
            for f in 0..nf {
                buf[f] = u[f][n];
            }
            self.density.hessian(&buf[..nf], &mut g2);
            for a in 0..2 * r {
                for b in a..2 * r {
                    let mut acc = 0.0;
                    for f in 0..nf {
                        for g in 0..nf {
                            acc += g2[f][g] * d[a][f][n] * d[b][g][n];
                        }
                    }
                    h[(a, b)] += w * acc;
                }
            }
        }
        for a in 0..2 * r {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
        }
        h
    }

    fn effective_kappa(&self, coeffs: &[f64]) -> f64 {
        coeffs.iter().zip(&self.kappa).map(|(c, k)| c * k).sum()
    }
}

/// `(p, q) = sqrt(2I) (cos phi, sin phi)` for every torus mode.
pub(crate) fn action_angle_to_cartesian(z: &PhasePoint) -> Result<Vec<(f64, f64)>> {
    z.action
        .iter()
        .zip(&z.angle)
        .map(|(&i, &phi)| {
            if !(i > 0.0) {
                return Err(Error::Oracle(format!(
                    "action-angle chart needs positive actions, got {i}"
                )));
            }
            let rho = (2.0 * i).sqrt();
            Ok((rho * phi.cos(), rho * phi.sin()))
        })
        .collect()
}

impl Nonlinearity for FieldNonlinearity {
    fn count(&self) -> usize {
        self.kappa.len()
    }

    fn smoothing_order(&self) -> f64 {
        self.smoothing
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

    fn combined_value(&self, coeffs: &[f64], z: &PhasePoint, _mu: f64) -> Result<f64> {
        let torus = action_angle_to_cartesian(z)?;
        let x = Cartesian {
            torus: &torus,
            tail_p: &z.p,
            tail_q: &z.q,
        };
        Ok(self.effective_kappa(coeffs) * self.value_cartesian(&x))
    }

    fn combined_gradient(&self, coeffs: &[f64], z: &PhasePoint, _mu: f64) -> Result<PhasePoint> {
        let k = self.effective_kappa(coeffs);
        let torus = action_angle_to_cartesian(z)?;
        let x = Cartesian {
            torus: &torus,
            tail_p: &z.p,
            tail_q: &z.q,
        };
        let g = self.grad_cartesian(&x);
        let mut out = PhasePoint::zeros(z.r(), z.n_tail());
        for a in 0..z.r() {
            let (fp, fq) = g.torus[a];
            let (c, s) = (z.angle[a].cos(), z.angle[a].sin());
            let rho = (2.0 * z.action[a]).sqrt();
            out.action[a] = k * (fp * c + fq * s) / rho;
            out.angle[a] = k * rho * (-fp * s + fq * c);
        }
        for i in 0..z.n_tail() {
            out.p[i] = k * g.tail_p[i];
            out.q[i] = k * g.tail_q[i];
        }
        Ok(out)
    }

    fn combined_action_hessian(
        &self,
        coeffs: &[f64],
        z: &PhasePoint,
        _mu: f64,
    ) -> Result<Option<DMatrix<f64>>> {
        let k = self.effective_kappa(coeffs);
        let torus = action_angle_to_cartesian(z)?;
        let x = Cartesian {
            torus: &torus,
            tail_p: &z.p,
            tail_q: &z.q,
        };
        let hc = self.torus_hessian_cartesian(&x);
        let g = self.grad_cartesian(&x);
        let r = z.r();
        // d(p,q)/dI = (cos, sin) / sqrt(2I); d^2(p,q)/dI^2 = -(cos, sin) / (2I)^{3/2}.
        let dx: Vec<[f64; 2]> = (0..r)
            .map(|a| {
                let rho = (2.0 * z.action[a]).sqrt();
                [z.angle[a].cos() / rho, z.angle[a].sin() / rho]
            })
            .collect();
        let mut h = DMatrix::zeros(r, r);
        for a in 0..r {
            for b in 0..r {
                let mut acc = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        acc += hc[(2 * a + i, 2 * b + j)] * dx[a][i] * dx[b][j];
                    }
                }
                if a == b {
                    let rho3 = (2.0 * z.action[a]).powf(1.5);
                    let (fp, fq) = g.torus[a];
                    acc -= (fp * z.angle[a].cos() + fq * z.angle[a].sin()) / rho3;
                }
                h[(a, b)] = k * acc;
            }
        }
        Ok(Some(h))
    }

    fn cartesian(&self) -> Option<&dyn CartesianSplit> {
        Some(self)
    }
}

impl CartesianSplit for FieldNonlinearity {
    fn kick(&self, coeffs: &[f64], mu: f64, x: &mut [f64], dt: f64) {
        // F depends on field values only and the fields Poisson-commute, so the
        // flow is a straight-line translation with frozen gradient.
        let k = mu * self.effective_kappa(coeffs);
        if k == 0.0 {
            return;
        }
        let r = self.torus.len();
        let nt = self.tail.len();
        let torus: Vec<(f64, f64)> = (0..r).map(|a| (x[2 * a], x[2 * a + 1])).collect();
        let tail_p: Vec<f64> = (0..nt).map(|i| x[2 * (r + i)]).collect();
        let tail_q: Vec<f64> = (0..nt).map(|i| x[2 * (r + i) + 1]).collect();
        let g = self.grad_cartesian(&Cartesian {
            torus: &torus,
            tail_p: &tail_p,
            tail_q: &tail_q,
        });
        for a in 0..r {
            let (fp, fq) = g.torus[a];
            x[2 * a] -= dt * k * fq;
            x[2 * a + 1] += dt * k * fp;
        }
        for i in 0..nt {
            x[2 * (r + i)] -= dt * k * g.tail_q[i];
            x[2 * (r + i) + 1] += dt * k * g.tail_p[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WeightedSeq;

    fn toy() -> FieldNonlinearity {
        // Two torus modes and two tail modes on a scalar field with j_max = 3.
        let c = |j: i64, coef: f64| Contribution { field: 0, j, coef };
        let torus = vec![
            ModeMap { p: vec![c(1, 0.7)], q: vec![c(-1, 0.7)] },
            ModeMap { p: vec![c(-1, 0.6)], q: vec![c(1, 0.6)] },
        ];
        let tail = vec![
            ModeMap { p: vec![c(2, 0.5)], q: vec![c(-2, 0.5)] },
            ModeMap { p: vec![c(3, 0.4)], q: vec![c(-3, 0.4), c(0, 0.1)] },
        ];
        FieldNonlinearity::new(Density::Quartic, vec![0.5, 0.25], 1.0, 3, torus, tail).unwrap()
    }

    fn sample() -> PhasePoint {
        PhasePoint {
            action: vec![0.8, 0.3],
            angle: vec![0.4, -1.1],
            p: WeightedSeq(vec![0.05, -0.02]),
            q: WeightedSeq(vec![0.03, 0.04]),
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = toy();
        let z = sample();
        let c = [0.3, 1.2];
        let g = f.combined_gradient(&c, &z, 0.0).unwrap();
        let h = 1e-5;
        let fd = |perturb: &dyn Fn(&mut PhasePoint, f64)| {
            let mut zp = z.clone();
            perturb(&mut zp, h);
            let mut zm = z.clone();
            perturb(&mut zm, -h);
            (f.combined_value(&c, &zp, 0.0).unwrap() - f.combined_value(&c, &zm, 0.0).unwrap())
                / (2.0 * h)
        };
        for a in 0..2 {
            let d = fd(&|p: &mut PhasePoint, e| p.action[a] += e);
            assert!((d - g.action[a]).abs() <= 1e-6 * d.abs().max(1e-3), "{d} {}", g.action[a]);
            let d = fd(&|p: &mut PhasePoint, e| p.angle[a] += e);
            assert!((d - g.angle[a]).abs() <= 1e-6 * d.abs().max(1e-3));
            let d = fd(&|p: &mut PhasePoint, e| p.p[a] += e);
            assert!((d - g.p[a]).abs() <= 1e-6 * d.abs().max(1e-3));
            let d = fd(&|p: &mut PhasePoint, e| p.q[a] += e);
            assert!((d - g.q[a]).abs() <= 1e-6 * d.abs().max(1e-3));
        }
    }

    #[test]
    fn action_hessian_matches_finite_differences() {
        let f = toy();
        let z = sample();
        let c = [1.0, 0.0];
        let h = f.combined_action_hessian(&c, &z, 0.0).unwrap().unwrap();
        let e = 1e-5;
        for b in 0..2 {
            let mut zp = z.clone();
            zp.action[b] += e;
            let mut zm = z.clone();
            zm.action[b] -= e;
            let gp = f.combined_gradient(&c, &zp, 0.0).unwrap();
            let gm = f.combined_gradient(&c, &zm, 0.0).unwrap();
            for a in 0..2 {
                let fd = (gp.action[a] - gm.action[a]) / (2.0 * e);
                assert!((fd - h[(a, b)]).abs() < 1e-6 * fd.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn nonpositive_action_is_rejected() {
        let f = toy();
        let mut z = sample();
        z.action[0] = 0.0;
        assert!(f.combined_gradient(&[1.0, 0.0], &z, 0.0).is_err());
    }

    #[test]
    fn collocation_is_exact_for_quartic() {
        // A single cos(x)/sqrt(pi) mode: int cos^4 / (4 pi^2) dx = 3 / (16 pi).
        let c = |j: i64| Contribution { field: 0, j, coef: 1.0 };
        let f = FieldNonlinearity::new(
            Density::Quartic,
            vec![1.0],
            1.0,
            1,
            vec![ModeMap { p: vec![c(1)], q: vec![] }],
            vec![],
        )
        .unwrap();
        let x = Cartesian { torus: &[(1.0, 0.0)], tail_p: &[], tail_q: &[] };
        let v = f.value_cartesian(&x);
        assert!((v - 3.0 / (16.0 * PI)).abs() < 1e-15);
    }
}
