//! Constructs constant-type NLW masses near several targets and reports the
//! Diophantine margin of the unperturbed frequencies.

use commuting_tori::models::nlw::{build_nlw, NlwConfig};
use commuting_tori::resonance::{construct_mass, diophantine_check, TailPattern};
use commuting_tori::TruncationParams;

fn main() -> commuting_tori::Result<()> {
    let (j_max, k_max) = (200, 400);
    let trunc = TruncationParams { r: 2, j_min: 1, j_max, k_max, s: 1.0, sigma: 0.0, tau: 1.0, gamma: 1e-6 };
    println!("{:>8} {:>3} {:>18} {:>12} {:>20}", "target", "Q", "m", "margin", "worst (pos, j, k)");
    for target in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.2] {
        for q in [2, 4, 8] {
            let mass = match construct_mass(target, 0.1, q, &TailPattern::AllOnes) {
                Ok(m) => m,
                Err(e) => {
                    println!("{target:>8} {q:>3} {e}");
                    continue;
                }
            };
            let sys = build_nlw(&NlwConfig { m: mass.m, mu: 0.0, trunc: trunc.clone() })?;
            let rep = diophantine_check(&sys, &[0.0, 0.0], 1e-6, 1.0, j_max, k_max);
            println!("{target:>8} {q:>3} {:>18.12} {:>12.4e} {:>20?}", mass.m, rep.margin, rep.worst);
        }
    }
    Ok(())
}
