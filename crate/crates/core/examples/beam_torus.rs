//! Solves a torus of the two-direction beam (three excited modes) and checks
//! the frequencies of its energy flow.

use commuting_tori::models::beam::{
    beam_k_coefficients, beam_mode_rates_to_frequencies, build_beam, torus_frequencies_beam, BeamConfig,
};
use commuting_tori::resonance::diophantine_check;
use commuting_tori::solver::{assemble_torus, averaged_nonlinearity, normalize_n, SolverParams};
use commuting_tori::verify::{check_periodic_orbit, measure_frequencies, FlowSpec, PeriodSettings};
use commuting_tori::TruncationParams;

fn main() -> commuting_tori::Result<()> {
    let mu: f64 = std::env::args().nth(1).map_or(1e-3, |s| s.parse().unwrap());
    let m = 0.5;
    let trunc = TruncationParams { r: 3, j_min: 1, j_max: 8, k_max: 12, s: 1.0, sigma: 0.0, tau: 1.0, gamma: 1e-3 };
    let sys = build_beam(&BeamConfig { m, mu, trunc })?;
    let a_star = [1.0, 0.8, 0.6];
    let params = SolverParams { psi_grid: 4, ..Default::default() };
    let grad = averaged_nonlinearity(&sys, &a_star, &[0.0; 3], params.quad_points)?.grad;
    let eps: Vec<f64> = grad.iter().map(|g| -mu * g).collect();
    let dio = diophantine_check(&sys, &eps, 1e-3, 1.0, usize::MAX, 12);
    println!("eps = {eps:?}, margin {:.3e} at {:?}", dio.margin, dio.worst);
    let norm = normalize_n(&sys)?;
    let res = assemble_torus(&norm, &eps, &a_star, &params)?;
    println!(
        "beta {:.2e} range {:.2e} |w|/mu {:.4} distance {:.3e}",
        res.beta_residual, res.range_residual, res.max_w_norm / mu, res.distance
    );
    let per = check_periodic_orbit(&norm, &res, &res.solutions[0], &PeriodSettings::default())?;
    println!("period residual {:.3e}, winding {:?}", per.period_residual, per.winding);
    let k1 = beam_k_coefficients(m)?[0].to_vec();
    let flow = FlowSpec { samples: 4, ..FlowSpec::new(k1, 200.0, 40_000) };
    let nu = measure_frequencies(&norm, &res.solutions[0].z0, &flow)?;
    let measured = beam_mode_rates_to_frequencies([nu[0], nu[1], nu[2]]);
    let predicted = torus_frequencies_beam([eps[0], eps[1], eps[2]], m)?;
    println!("frequencies measured {measured:?}\n            predicted {predicted:?}");
    Ok(())
}
