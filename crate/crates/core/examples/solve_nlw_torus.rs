//! Solves an NLW torus at a constant-type mass and prints its diagnostics.

use std::time::Instant;

use commuting_tori::models::nlw::{build_nlw, nlw_averaged_constant, torus_frequencies_nlw, NlwConfig};
use commuting_tori::resonance::{construct_mass, diophantine_check, TailPattern};
use commuting_tori::solver::{assemble_torus, normalize_n, SolverParams};
use commuting_tori::TruncationParams;

fn main() -> commuting_tori::Result<()> {
    let mu: f64 = std::env::args().nth(1).map_or(1e-3, |s| s.parse().unwrap());
    let mass = construct_mass(0.3, 0.05, 8, &TailPattern::AllOnes)?;
    let m = mass.m;
    let trunc = TruncationParams { r: 2, j_min: 1, j_max: 16, k_max: 16, s: 1.0, sigma: 0.0, tau: 1.0, gamma: 1e-2 };
    let sys = build_nlw(&NlwConfig { m, mu, trunc })?;
    let a_star = [1.0, 0.5];
    let c = nlw_averaged_constant(m);
    let eps = [-mu * c * (2.0 * a_star[0] + 4.0 * a_star[1]), -mu * c * (4.0 * a_star[0] + 2.0 * a_star[1])];
    let dio = diophantine_check(&sys, &eps, 1e-2, 1.0, 16, 16);
    println!("m = {m:.12}, eps = {eps:?}, margin = {:.3e}", dio.margin);
    let norm = normalize_n(&sys)?;
    let t = Instant::now();
    let res = assemble_torus(&norm, &eps, &a_star, &SolverParams::default())?;
    println!(
        "solved in {:.2?}: a* = {:?}\n  beta {:.2e} range {:.2e} kernel {:.2e}\n  |w| {:.4e} (|w|/mu {:.4}) distance {:.4e} raw {:.4e} alpha {:.3e}",
        t.elapsed(), res.a_star, res.beta_residual, res.range_residual, res.kernel_residual,
        res.max_w_norm, res.max_w_norm / mu, res.distance, res.distance_raw, res.max_alpha
    );
    let it: Vec<_> = res.solutions.iter().map(|s| (s.newton_iterations, s.range_iterations)).collect();
    println!("  iterations {:?}", &it[..4]);
    println!("  predicted frequencies {:?}", torus_frequencies_nlw(eps, m)?);
    Ok(())
}
