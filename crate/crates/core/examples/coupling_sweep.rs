//! Solves one NLW torus over a range of couplings and fits how the loop
//! correction and the distance to the reference torus scale with mu.

use commuting_tori::models::nlw::{build_nlw, nlw_averaged_constant, NlwConfig};
use commuting_tori::resonance::{construct_mass, TailPattern};
use commuting_tori::solver::{assemble_torus, normalize_n, SolverParams};
use commuting_tori::verify::loglog_slope;
use commuting_tori::TruncationParams;

fn main() -> commuting_tori::Result<()> {
    let m = construct_mass(0.3, 0.05, 8, &TailPattern::AllOnes)?.m;
    let trunc = TruncationParams { r: 2, j_min: 1, j_max: 16, k_max: 16, s: 1.0, sigma: 0.0, tau: 1.0, gamma: 1e-2 };
    let a_star = [1.0, 0.5];
    let c = nlw_averaged_constant(m);
    let mus = [2e-3, 1e-3, 5e-4, 2.5e-4, 1.25e-4];
    let (mut wn, mut dist) = (Vec::new(), Vec::new());
    println!("{:>10} {:>12} {:>10} {:>12} {:>10}", "mu", "|w|", "|w|/mu", "distance", "beta");
    for &mu in &mus {
        let sys = build_nlw(&NlwConfig { m, mu, trunc: trunc.clone() })?;
        let eps = [-mu * c * (2.0 * a_star[0] + 4.0 * a_star[1]), -mu * c * (4.0 * a_star[0] + 2.0 * a_star[1])];
        let res = assemble_torus(&normalize_n(&sys)?, &eps, &a_star, &SolverParams::default())?;
        println!(
            "{mu:>10.3e} {:>12.4e} {:>10.5} {:>12.4e} {:>10.1e}",
            res.max_w_norm,
            res.max_w_norm / mu,
            res.distance,
            res.beta_residual
        );
        wn.push(res.max_w_norm);
        dist.push(res.distance);
    }
    println!("slopes: |w| {:.4}, distance {:.4}", loglog_slope(&mus, &wn)?, loglog_slope(&mus, &dist)?);
    Ok(())
}
