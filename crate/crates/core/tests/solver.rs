//! Lyapunov-Schmidt solver: operator algebra, range and kernel equations and
//! torus assembly.

mod common;

use commuting_tori::models::nlw::nlw_averaged_constant;
use commuting_tori::solver::kernel::averaged_combination;
use commuting_tori::solver::range::range_residual;
use commuting_tori::solver::theta::tilde_coefficients;
use commuting_tori::solver::{
    apply_loop_operator, assemble_torus, build_tilde_frequencies, invert_loop_operator, normalize_n,
    project_kernel, project_range, solve_a_star, solve_kernel, solve_range, theta_map, KernelElement,
    LoopTrajectory, NormalizedSystem, SolverParams, TimeGrid,
};
use commuting_tori::TailMode;
use common::*;
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn random_loop(seed: u64, r: usize, n: usize, k_max: usize, range_only: bool) -> LoopTrajectory {
    let mut g = rng(seed);
    let mut w = LoopTrajectory::zeros(r, n, k_max);
    for c in 0..w.n_components() {
        let k0 = if range_only && c < 2 * r { 1 } else { 0 };
        for k in k0..=k_max as i64 {
            w.set_real_pair(c, k, Complex64::new(g.sample(StandardNormal), g.sample(StandardNormal)));
        }
    }
    w
}

fn setup(mu: f64) -> (NormalizedSystem, Vec<f64>, Vec<f64>) {
    let m = nlw_mass();
    let norm = normalize_n(&nlw(m, mu, 16, 16)).unwrap();
    let eps_hat = norm.eps_to_normalized(&nlw_eps(m, mu, A_STAR));
    let a_hat = norm.actions_to_normalized(&A_STAR);
    (norm, eps_hat, a_hat)
}

#[test]
fn normalization_combines_frequencies_and_keeps_commutation() {
    let m = nlw_mass();
    let sys = nlw(m, 0.01, 16, 16);
    let norm = normalize_n(&sys).unwrap();
    assert_eq!(norm.system.n_vec, vec![1, 0]);
    for i in 0..sys.n_tail() {
        let want = sys.omega[0][i] + sys.omega[1][i];
        assert!((norm.system.omega[0][i] - want).abs() < 1e-14);
    }
    for seed in 0..20 {
        let z = norm.to_normalized(&random_point(&sys, seed, 0.1));
        assert!(norm.system.poisson_bracket(0, 1, &z).unwrap().abs() < 1e-10);
    }
    let beam_norm = normalize_n(&beam(0.5, 0.01, 6, 8)).unwrap();
    assert!(beam_norm.is_identity());
}

#[test]
fn theta_map_at_zero_coupling() {
    let (norm, _, a_hat) = setup(0.0);
    let sys = &norm.system;
    let grid = TimeGrid::for_k_max(8);
    let w = LoopTrajectory::zeros(2, sys.n_tail(), 8);
    let kernel = KernelElement { a: a_hat, psi: vec![0.3, -1.0] };
    let eps = [0.02, -0.01];
    let th = theta_map(sys, &grid, &eps, &[0.0, 0.0], &w, &kernel).unwrap();
    let (k, rest) = project_kernel(&th);
    assert!((k.psi[0] - eps[0]).abs() < 1e-15 && (k.psi[1] - eps[1]).abs() < 1e-15);
    assert!(k.a.iter().all(|x| x.abs() < 1e-15));
    assert!(rest.norm(&sys.tail, 1.0, 0.0) < 1e-14);
    let th = theta_map(sys, &grid, &[0.0, 0.0], &[0.5, 0.25], &w, &kernel).unwrap();
    let (k, rest) = project_kernel(&th);
    assert!((k.a[0] - 0.5).abs() < 1e-15 && (k.a[1] - 0.25).abs() < 1e-15);
    assert!(rest.norm(&sys.tail, 1.0, 0.0) < 1e-14);
}

#[test]
fn theta_mean_angle_drift_is_averaged_gradient() {
    let mu = 1e-3;
    let (norm, eps, a_hat) = setup(mu);
    let sys = &norm.system;
    let grid = TimeGrid::for_k_max(16);
    let psi = vec![0.4, 1.1];
    let w = LoopTrajectory::zeros(2, sys.n_tail(), 16);
    let th = theta_map(sys, &grid, &eps, &[0.0, 0.0], &w, &KernelElement { a: a_hat.clone(), psi: psi.clone() })
        .unwrap();
    let avg = averaged_combination(sys, &tilde_coefficients(&eps), &a_hat, &psi, 256).unwrap();
    for l in 0..2 {
        let want = eps[l] + mu * avg.grad[l];
        assert!((th.get(2 + l, 0).re - want).abs() < 1e-15, "{l}: {} vs {want}", th.get(2 + l, 0).re);
    }
}

#[test]
fn range_equation_scaling_and_residual() {
    let grid = TimeGrid::for_k_max(16);
    let (norm0, eps0, a_hat) = setup(0.0);
    let kernel = KernelElement { a: a_hat.clone(), psi: vec![0.0, 0.0] };
    let sol = solve_range(&norm0.system, &grid, &eps0, &kernel, None, 1e-14, 10);
    // At mu = 0 eps must vanish too; the range part of Theta is then zero.
    let sol = sol.unwrap_or_else(|_| solve_range(&norm0.system, &grid, &[0.0, 0.0], &kernel, None, 1e-14, 10).unwrap());
    assert_eq!(sol.iterations, 1);
    assert_eq!(sol.w.norm(&norm0.system.tail, 1.0, 0.0), 0.0);

    let mut norms = Vec::new();
    for mu in [1e-3, 5e-4] {
        let (norm, eps, _) = setup(mu);
        let tol = 1e-11 * mu;
        let sol = solve_range(&norm.system, &grid, &eps, &kernel, None, tol, 200).unwrap();
        let n = sol.w.norm(&norm.system.tail, 1.0, 0.0);
        assert!(n <= 10.0 * mu);
        assert!(range_residual(&norm.system, &grid, &eps, &kernel, &sol.w).unwrap() <= 10.0 * tol);
        norms.push(n);
    }
    assert!((norms[0] / norms[1] / 2.0 - 1.0).abs() < 0.2);
}

#[test]
fn a_star_matches_the_closed_form() {
    let m = nlw_mass();
    let sys = nlw(m, 0.0, 8, 8);
    let c = nlw_averaged_constant(m);
    let rho = [-0.3, -0.25];
    let a = solve_a_star(&sys, &rho, &[1.0, 1.0], 64).unwrap();
    let want = Matrix2::new(2.0, 4.0, 4.0, 2.0).lu().solve(&(-Vector2::new(rho[0], rho[1]) / c)).unwrap();
    assert!((a.a[0] - want[0]).abs() < 1e-10 && (a.a[1] - want[1]).abs() < 1e-10);
    assert!(a.residual <= 1e-12);
    let zero = solve_a_star(&sys, &[0.0, 0.0], &[0.2, 0.1], 64).unwrap();
    assert!(zero.a.iter().all(|x| x.abs() < 1e-10));
    assert!(!zero.interior);
}

#[test]
fn kernel_solution_is_consistent_and_equivariant() {
    let mu = 1e-3;
    let (norm, eps, a_hat) = setup(mu);
    let grid = TimeGrid::for_k_max(16);
    let params = SolverParams::default();
    let psi = vec![0.3, 0.7];
    let delta = 0.9;
    let s0 = solve_kernel(&norm.system, &grid, &eps, &psi, &a_hat, &params).unwrap();
    let s1 = solve_kernel(&norm.system, &grid, &eps, &[psi[0] + delta, psi[1]], &a_hat, &params).unwrap();
    assert!(s0.beta.iter().all(|b| b.abs() <= 1e-8));
    // Shifting the mean angle along e_1 is a time shift of the same orbit.
    let tail: &[TailMode] = &norm.system.tail;
    assert!(s1.w().sub(&s0.w().shifted(delta)).norm(tail, 1.0, 0.0) < 1e-10);
    for l in 0..2 {
        assert!((s1.a[l] - s0.a[l]).abs() < 1e-10);
        assert!((s1.beta[l] - s0.beta[l]).abs() < 1e-10);
    }
    assert!((s1.kernel_residual - s0.kernel_residual).abs() < 1e-10);
    // Loops are periodic by construction.
    let d = s0.point_at(0.0).sub(&s0.w().eval(0.0));
    let (z0, z1) = (s0.w().eval(0.0), s0.w().eval(2.0 * std::f64::consts::PI));
    assert!(z0.sub(&z1).dot(&z0.sub(&z1)).sqrt() < 1e-12);
    assert!(d.action.iter().zip(&s0.a).all(|(x, a)| (x - a).abs() < 1e-15));
}

#[test]
fn mean_actions_do_not_depend_on_psi() {
    // Both flows act as symmetries here (time shift and translation), so the
    // second-order bound on the spread is met at rounding level.
    let spread = |mu: f64| {
        let (norm, eps, a_hat) = setup(mu);
        let grid = TimeGrid::for_k_max(16);
        let params = SolverParams::default();
        let a: Vec<f64> = (0..8)
            .map(|i| {
                let psi = [0.0, 2.0 * std::f64::consts::PI * i as f64 / 8.0];
                solve_kernel(&norm.system, &grid, &eps, &psi, &a_hat, &params).unwrap().a[1]
            })
            .collect();
        a.iter().cloned().fold(f64::MIN, f64::max) - a.iter().cloned().fold(f64::MAX, f64::min)
    };
    for mu in [1e-3, 5e-4] {
        let s = spread(mu);
        assert!(s <= mu * mu, "mu = {mu}: spread {s:e}");
    }
}

#[test]
fn zero_coupling_reproduces_the_reference_torus() {
    let (norm, _, _) = setup(0.0);
    let params = SolverParams { psi_grid: 4, ..Default::default() };
    let res = assemble_torus(&norm, &[0.0, 0.0], &A_STAR, &params).unwrap();
    assert_eq!(res.distance, 0.0);
    assert_eq!(res.beta_residual, 0.0);
    assert_eq!(res.range_residual, 0.0);
    assert_eq!(res.a_star, A_STAR.to_vec());
}

#[test]
fn distance_is_stable_under_grid_refinement() {
    let mu = 1e-3;
    let m = nlw_mass();
    let norm = normalize_n(&nlw(m, mu, 16, 16)).unwrap();
    let eps = nlw_eps(m, mu, A_STAR);
    let d: Vec<f64> = [8, 16]
        .into_iter()
        .map(|n| {
            let params = SolverParams { psi_grid: n, ..Default::default() };
            assemble_torus(&norm, &eps, &A_STAR, &params).unwrap().distance
        })
        .collect();
    assert!((d[1] / d[0] - 1.0).abs() < 0.05, "{d:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projectors_are_complementary(seed in any::<u64>()) {
        let z = random_loop(seed, 2, 5, 6, false);
        let p = project_range(&z);
        let (k, _) = project_kernel(&z);
        prop_assert_eq!(&project_range(&p), &p);
        let mut q = z.sub(&p);
        let (kq, rq) = project_kernel(&q);
        prop_assert_eq!(&kq, &k);
        let tail = [TailMode { pol: 0, j: 2 }; 5];
        prop_assert!(rq.norm(&tail, 1.0, 0.0) < 1e-14);
        q.axpy(1.0, &p);
        prop_assert!(q.sub(&z).norm(&tail, 1.0, 0.0) < 1e-14);
    }

    #[test]
    fn loop_operator_inverse_and_bound(seed in any::<u64>(), e1 in -1e-3f64..1e-3, e2 in -1e-3f64..1e-3) {
        let m = nlw_mass();
        let sys = nlw(m, 1e-3, 12, 24);
        let eps = [e1, e2];
        let rep = commuting_tori::resonance::diophantine_check(&sys, &eps, 1e-3, 1.0, 12, 24);
        prop_assume!(rep.accepted);
        let norm = normalize_n(&sys).unwrap();
        let omega = build_tilde_frequencies(&norm.system, &norm.eps_to_normalized(&eps)).unwrap();
        let w = random_loop(seed, 2, sys.n_tail(), 24, true);
        let wi = invert_loop_operator(&omega, &sys.tail, &w, 1e-3, 1.0).unwrap();
        let back = apply_loop_operator(&omega, &wi);
        prop_assert!(back.sub(&w).norm(&sys.tail, 1.0, 0.0) <= 1e-12 * w.norm(&sys.tail, 1.0, 0.0));
        prop_assert!(wi.norm(&sys.tail, 1.0, 0.0) <= w.norm(&sys.tail, 2.0, 0.0) / rep.margin);
        prop_assert!(wi.reality_defect() < 1e-14);
    }
}
