//! Solves an NLW torus and checks it by direct integration: periodicity of
//! the combined flow, invariance under both Hamiltonian flows and the
//! frequencies of the energy flow.

use std::time::Instant;

use commuting_tori::models::nlw::{
    build_nlw, nlw_averaged_constant, nlw_k_coefficients, nlw_mode_rates_to_frequencies,
    torus_frequencies_nlw, NlwConfig,
};
use commuting_tori::resonance::{construct_mass, TailPattern};
use commuting_tori::solver::{assemble_torus, normalize_n, SolverParams};
use commuting_tori::verify::{
    check_invariance, check_periodic_orbit, measure_frequencies, FlowSpec, PeriodSettings,
};
use commuting_tori::TruncationParams;

fn main() -> commuting_tori::Result<()> {
    let mu: f64 = std::env::args().nth(1).map_or(1e-3, |s| s.parse().unwrap());
    let steps: usize = std::env::args().nth(2).map_or(512, |s| s.parse().unwrap());
    let m = construct_mass(0.3, 0.05, 8, &TailPattern::AllOnes)?.m;
    let trunc = TruncationParams { r: 2, j_min: 1, j_max: 16, k_max: 16, s: 1.0, sigma: 0.0, tau: 1.0, gamma: 1e-2 };
    let sys = build_nlw(&NlwConfig { m, mu, trunc })?;
    let a_star = [1.0, 0.5];
    let c = nlw_averaged_constant(m);
    let eps = [-mu * c * (2.0 * a_star[0] + 4.0 * a_star[1]), -mu * c * (4.0 * a_star[0] + 2.0 * a_star[1])];
    let norm = normalize_n(&sys)?;
    let params = SolverParams::default();
    let res = assemble_torus(&norm, &eps, &a_star, &params)?;
    let period = PeriodSettings { steps, ..Default::default() };

    let t = Instant::now();
    let per = check_periodic_orbit(&norm, &res, &res.solutions[0], &period)?;
    println!("periodic orbit ({:.2?}): {per:#?}", t.elapsed());

    let t = Instant::now();
    let flows = vec![FlowSpec::new(vec![1.0, 0.0], 10.0, 1000), FlowSpec::new(vec![0.0, 1.0], 10.0, 1000)];
    let inv = check_invariance(&norm, &res, &flows, 4, &params, &period)?;
    println!("invariance ({:.2?}): {inv:#?}", t.elapsed());

    let t = Instant::now();
    let k1 = nlw_k_coefficients(m)[0].to_vec();
    let flow = FlowSpec { samples: 4, ..FlowSpec::new(k1, 400.0, 40_000) };
    let rates = measure_frequencies(&norm, &res.solutions[0].z0, &flow)?;
    let measured = nlw_mode_rates_to_frequencies([rates[0], rates[1]]);
    let predicted = torus_frequencies_nlw(eps, m)?;
    let rel = ((measured[0] - predicted[0]).powi(2) + (measured[1] - predicted[1]).powi(2)).sqrt()
        / predicted[0].hypot(predicted[1]);
    println!("frequencies ({:.2?}): measured {measured:?} predicted {predicted:?} rel {rel:.3e}", t.elapsed());
    Ok(())
}
