//! Diophantine margin of the unperturbed NLW frequencies across masses,
//! with the constant-type masses built from continued fractions for contrast.
//! Many rational masses are exactly resonant: `omega_j / omega_1` is an
//! integer whenever `j^2 + m = n^2 (1 + m)` has a solution.

use commuting_tori::models::nlw::{build_nlw, NlwConfig};
use commuting_tori::resonance::{construct_mass, diophantine_check, TailPattern};
use commuting_tori::TruncationParams;

fn main() -> commuting_tori::Result<()> {
    let (j_max, k_max, gamma, tau) = (200, 400, 1e-5, 1.0);
    let trunc = TruncationParams { r: 2, j_min: 1, j_max, k_max, s: 1.0, sigma: 0.0, tau, gamma };
    let scan = |m: f64| -> commuting_tori::Result<String> {
        let sys = build_nlw(&NlwConfig { m, mu: 0.0, trunc: trunc.clone() })?;
        let rep = diophantine_check(&sys, &[0.0, 0.0], gamma, tau, j_max, k_max);
        let (_, j, k) = rep.worst.unwrap_or_default();
        Ok(format!("{:>12.3e} {:>6} {:>6} {:>9}", rep.margin, j, k, rep.accepted))
    };
    println!("{:>14} {:>12} {:>6} {:>6} {:>9}", "m", "margin", "j", "k", "accepted");
    for i in 1..=10 {
        let m = 0.1 * i as f64;
        println!("{m:>14.6} {}", scan(m)?);
    }
    for (target, tail) in [(0.3, TailPattern::AllOnes), (1.0, TailPattern::AllOnes), (0.6, TailPattern::AllTwos)] {
        let mc = construct_mass(target, 0.05, 8, &tail)?;
        println!("{:>14.9} {}  constant type near {target}, {tail:?}", mc.m, scan(mc.m)?);
    }
    Ok(())
}
