//! Rejection fraction of the beam's Diophantine condition for shifts drawn
//! in a ball, as the threshold gamma shrinks.

use commuting_tori::models::beam::{build_beam, BeamConfig};
use commuting_tori::resonance::{sample_nonresonant_eps, SampleMode, SamplerSpec};
use commuting_tori::TruncationParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> commuting_tori::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|s| s.parse().unwrap()).collect();
    let (m, radius, gamma0, tau) = match args[..] {
        [m, r, g, t] => (m, r, g, t),
        _ => (0.5, 0.02, 0.08, 2.0),
    };
    let j_max = 32;
    let trunc = TruncationParams { r: 3, j_min: 1, j_max, k_max: 4096, s: 1.0, sigma: 0.0, tau, gamma: gamma0 };
    let sys = build_beam(&BeamConfig { m, mu: 0.0, trunc })?;
    println!("m = {m}, radius = {radius}, tau = {tau}");
    println!("{:>10} {:>10} {:>14}", "gamma", "rejected", "frac/sqrt(g)");
    for g in [gamma0, gamma0 / 4.0, gamma0 / 16.0, gamma0 / 64.0] {
        let spec = SamplerSpec {
            center: vec![0.0; 3],
            radius,
            count: 20_000,
            gamma: g,
            tau,
            j_max,
            k_max: 4096,
            mode: SampleMode::Ball,
        };
        let rep = sample_nonresonant_eps(&sys, &spec, &mut ChaCha8Rng::seed_from_u64(11))?;
        println!("{g:>10.4e} {:>10.4} {:>14.4}", rep.rejection_fraction, rep.rejection_fraction / g.sqrt());
    }
    Ok(())
}
