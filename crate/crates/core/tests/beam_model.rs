//! Beam model: field-space oracles, averaged form and frequency formulas.

mod common;

use std::f64::consts::PI;

use commuting_tori::models::beam::{
    beam_averaged_form, beam_combination, beam_k3, beam_k_coefficients, beam_to_fields, omega_beam,
    torus_frequencies_beam, BeamFields, BEAM_TORUS_MODES,
};
use commuting_tori::models::field::basis_fn;
use commuting_tori::solver::averaged_nonlinearity;
use commuting_tori::{CommutingSystem, PhasePoint};
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// `sum_l R_il H^(l)(z)`.
fn k_value(sys: &CommutingSystem, row: &[f64; 3], z: &PhasePoint) -> f64 {
    (0..3).map(|l| row[l] * sys.hamiltonian_value(l, z).unwrap()).sum()
}

/// Energy, momentum and quartic integral of `(u, v)` by quadrature in `x`.
fn field_integrals(f: &BeamFields, m: f64) -> (f64, f64, f64) {
    let jm = f.j_max as i64;
    let n = 8 * f.j_max + 8;
    let w = 2.0 * PI / n as f64;
    let deriv = |j: i64, x: f64| match j {
        0 => 0.0,
        j if j > 0 => -(j as f64) * basis_fn(-j, x),
        j => (-j) as f64 * basis_fn(-j, x),
    };
    let (mut energy, mut momentum, mut quartic) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let x = -PI + 2.0 * PI * i as f64 / n as f64;
        let (mut u, mut v, mut uxx, mut vxx, mut ux, mut vx, mut uu, mut vv) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for j in -jm..=jm {
            let k = (j + jm) as usize;
            let s = omega_beam(j, m).sqrt();
            let (a, b) = (f.u[k] / s, f.v[k] / s);
            let (e, j2) = (basis_fn(j, x), (j * j) as f64);
            u += a * e;
            v += b * e;
            uxx -= a * j2 * e;
            vxx -= b * j2 * e;
            ux += a * deriv(j, x);
            vx += b * deriv(j, x);
            uu += f.big_u[k] * s * e;
            vv += f.big_v[k] * s * e;
        }
        energy += w * (uu * uu + vv * vv + uxx * uxx + vxx * vxx + m * (u * u + v * v)) / 2.0;
        momentum -= w * (uu * ux + vv * vx);
        quartic += w * (u * u + v * v).powi(2) / 4.0;
    }
    (energy, momentum, quartic)
}

#[test]
fn energy_momentum_and_rotation_match_field_oracles() {
    let (m, mu) = (0.5, 0.01);
    let sys = beam(m, mu, 8, 12);
    let rows = beam_k_coefficients(m).unwrap();
    for seed in 0..8 {
        let z = random_point(&sys, seed, 0.1);
        let f = beam_to_fields(&z, &sys.tail, 8);
        let (energy, momentum, quartic) = field_integrals(&f, m);
        assert!((k_value(&sys, &rows[0], &z) - (energy + mu * quartic)).abs() < 1e-10);
        assert!((k_value(&sys, &rows[1], &z) - momentum).abs() < 1e-10);
        assert!((k_value(&sys, &rows[2], &z) - beam_k3(&sys.tail, &z)).abs() < 1e-10);
    }
}

#[test]
fn coordinate_map_is_canonical() {
    let (m, jm) = (0.5, 5usize);
    let sys = beam(m, 0.0, jm, 8);
    let n = 2 * jm + 1;
    // Cartesian pairs ordered by (polarization, j).
    let slot = |pol: u8, j: i64| 2 * ((pol as usize - 1) * n + (j + jm as i64) as usize);
    let to_point = |x: &[f64]| -> PhasePoint {
        let mut z = sys.zero_point();
        for (l, &j) in BEAM_TORUS_MODES.iter().enumerate() {
            let (p, q) = (x[slot(1, j)], x[slot(1, j) + 1]);
            z.action[l] = (p * p + q * q) / 2.0;
            z.angle[l] = q.atan2(p);
        }
        for (i, t) in sys.tail.iter().enumerate() {
            z.p[i] = x[slot(t.pol, t.j)];
            z.q[i] = x[slot(t.pol, t.j) + 1];
        }
        z
    };
    let dim = 4 * n;
    let mut jac = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut x = vec![0.0; dim];
        x[c] = 1.0;
        let f = beam_to_fields(&to_point(&x), &sys.tail, jm);
        for k in 0..n {
            jac[(k, c)] = f.u[k];
            jac[(n + k, c)] = f.big_u[k];
            jac[(2 * n + k, c)] = f.v[k];
            jac[(3 * n + k, c)] = f.big_v[k];
        }
    }
    let mut poisson = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        poisson[(2 * k, 2 * k + 1)] = -1.0;
        poisson[(2 * k + 1, 2 * k)] = 1.0;
    }
    let b = &jac * poisson * jac.transpose();
    for a in 0..dim {
        for c in 0..dim {
            // Positions u, v at blocks 0, 2; momenta U, V at blocks 1, 3.
            let (ba, bc) = (a / n, c / n);
            let same = a % n == c % n;
            let want = match (ba, bc) {
                (0, 1) | (2, 3) if same => 1.0,
                (1, 0) | (3, 2) if same => -1.0,
                _ => 0.0,
            };
            assert!((b[(a, c)] - want).abs() < 1e-12, "bracket ({a},{c}) = {}", b[(a, c)]);
        }
    }
}

#[test]
fn brackets_vanish_at_small_coupling() {
    let sys = beam(0.5, 0.01, 8, 12);
    for seed in 0..20 {
        let z = random_point(&sys, seed, 0.1);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let ab = sys.poisson_bracket(a, b, &z).unwrap();
            assert!(ab.abs() <= 1e-8);
            assert!((ab + sys.poisson_bracket(b, a, &z).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn averaged_form_matches_closed_form_and_ignores_psi() {
    let mut g = rng(21);
    for m in [0.0, 0.5, 2.5] {
        let sys = beam(m, 0.0, 6, 8);
        for _ in 0..4 {
            let a = [g.random_range(0.1..2.0), g.random_range(0.1..2.0), g.random_range(0.1..2.0)];
            let base = averaged_nonlinearity(&sys, &a, &[0.0; 3], 64).unwrap().value;
            assert!((base - beam_averaged_form(a, m).unwrap()).abs() < 1e-12 * base.abs().max(1.0));
            let psi = [g.random_range(0.0..6.3), g.random_range(0.0..6.3), g.random_range(0.0..6.3)];
            let shifted = averaged_nonlinearity(&sys, &a, &psi, 64).unwrap().value;
            assert!((shifted - base).abs() < 1e-12);
        }
    }
}

#[test]
fn hessian_determinant_in_rescaled_actions() {
    for m in [-0.5, 0.0, 1.7] {
        let sys = beam(m, 0.0, 6, 8);
        let h = averaged_nonlinearity(&sys, &[0.4, 0.9, 1.3], &[0.0; 3], 64).unwrap().hess_matrix();
        let w = DMatrix::from_diagonal(&DVector::from_iterator(3, BEAM_TORUS_MODES.iter().map(|&j| omega_beam(j, m))));
        let (_, d) = beam_combination(m).unwrap();
        let det = (&w * h * &w * (8.0 * PI * d)).determinant();
        assert!((det - 40.0).abs() < 1e-8 * 40.0, "m = {m}: det {det}");
    }
}

#[test]
fn frequency_formula_examples() {
    let f = torus_frequencies_beam([0.0; 3], 0.0).unwrap();
    assert!((f[0] - 2.0).abs() < 1e-14);
    let m = 0.8;
    let (w1, w2, w3) = (omega_beam(1, m), omega_beam(2, m), omega_beam(3, m));
    let f = torus_frequencies_beam([0.0; 3], m).unwrap();
    let want = [w3 - 2.0 * w2 + w1, -(w2 - w3), -(2.0 * w3 - 3.0 * w2)];
    for i in 0..3 {
        assert!((f[i] - want[i]).abs() < 1e-13);
    }
    assert!(torus_frequencies_beam([0.5, 1.0, 0.5], m).is_err());
}
