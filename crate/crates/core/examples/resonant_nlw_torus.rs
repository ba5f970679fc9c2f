//! A torus with rationally related frequencies: the shift difference is held
//! at a fixed value and the measured frequency ratio is compared with it.

use commuting_tori::models::nlw::{
    build_nlw, nlw_averaged_constant, nlw_k_coefficients, nlw_mode_rates_to_frequencies, NlwConfig,
};
use commuting_tori::resonance::{construct_mass, sample_nonresonant_eps, SampleMode, SamplerSpec, TailPattern};
use commuting_tori::solver::{assemble_torus, normalize_n, SolverParams};
use commuting_tori::verify::{measure_frequencies, FlowSpec};
use commuting_tori::TruncationParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> commuting_tori::Result<()> {
    let eps_minus: f64 = std::env::args().nth(1).map_or(2e-5, |s| s.parse().unwrap());
    let mu = 1e-3;
    let m = construct_mass(0.3, 0.05, 8, &TailPattern::AllOnes)?.m;
    let trunc = TruncationParams { r: 2, j_min: 1, j_max: 16, k_max: 16, s: 1.0, sigma: 0.0, tau: 1.0, gamma: 1e-2 };
    let sys = build_nlw(&NlwConfig { m, mu, trunc })?;
    let a_star = [1.0, 0.5];
    let c = nlw_averaged_constant(m);
    let center = vec![-mu * c * (2.0 * a_star[0] + 4.0 * a_star[1]), -mu * c * (4.0 * a_star[0] + 2.0 * a_star[1])];
    let spec = SamplerSpec {
        center,
        radius: 0.1 * mu,
        count: 1,
        gamma: 1e-2,
        tau: 1.0,
        j_max: 16,
        k_max: 16,
        mode: SampleMode::FixedMinus { eps_minus },
    };
    let cand = sample_nonresonant_eps(&sys, &spec, &mut ChaCha8Rng::seed_from_u64(6))?;
    let eps = cand.candidates[0].eps.clone();
    println!("eps = {eps:?} (eps_- = {eps_minus:e}), margin {:.3e}", cand.candidates[0].gamma_eff);

    let norm = normalize_n(&sys)?;
    let res = assemble_torus(&norm, &eps, &a_star, &SolverParams::default())?;
    println!("a* = {:?}, beta {:.1e}, distance {:.3e}", res.a_star, res.beta_residual, res.distance);

    let flow = FlowSpec { samples: 4, ..FlowSpec::new(nlw_k_coefficients(m)[0].to_vec(), 400.0, 40_000) };
    let rates = measure_frequencies(&norm, &res.solutions[0].z0, &flow)?;
    let f = nlw_mode_rates_to_frequencies([rates[0], rates[1]]);
    println!("frequencies {f:?}");
    println!("ratio {:.15e}, expected {:.15e}", f[1] / f[0], -eps_minus);
    Ok(())
}
