//! Shared setup for the integration tests.
#![allow(dead_code)]

use commuting_tori::model::{CommutingSystem, PhasePoint, TailMode};
use commuting_tori::models::beam::{build_beam, BeamConfig};
use commuting_tori::models::nlw::{build_nlw, nlw_averaged_constant, NlwConfig};
use commuting_tori::resonance::{construct_mass, TailPattern};
use commuting_tori::TruncationParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const A_STAR: [f64; 2] = [1.0, 0.5];

/// Constant-type mass near 0.3 used by the NLW experiments.
pub fn nlw_mass() -> f64 {
    construct_mass(0.3, 0.05, 8, &TailPattern::AllOnes).unwrap().m
}

pub fn trunc(r: usize, j_max: usize, k_max: usize, gamma: f64) -> TruncationParams {
    TruncationParams { r, j_min: 1, j_max, k_max, s: 1.0, sigma: 0.0, tau: 1.0, gamma }
}

pub fn nlw(m: f64, mu: f64, j_max: usize, k_max: usize) -> CommutingSystem {
    build_nlw(&NlwConfig { m, mu, trunc: trunc(2, j_max, k_max, 1e-2) }).unwrap()
}

pub fn beam(m: f64, mu: f64, j_max: usize, k_max: usize) -> CommutingSystem {
    build_beam(&BeamConfig { m, mu, trunc: trunc(3, j_max, k_max, 1e-3) }).unwrap()
}

/// `eps = -mu grad <F_n>(a)` for the NLW averaged form.
pub fn nlw_eps(m: f64, mu: f64, a: [f64; 2]) -> [f64; 2] {
    let c = nlw_averaged_constant(m);
    [-mu * c * (2.0 * a[0] + 4.0 * a[1]), -mu * c * (4.0 * a[0] + 2.0 * a[1])]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-mode deterministic value so that truncations of different size share
/// their common modes.
fn mode_value(seed: u64, mode: &TailMode, which: u64) -> f64 {
    let key = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((mode.j as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(u64::from(mode.pol).wrapping_mul(0x94D0_49BB_1331_11EB))
        .wrapping_add(which);
    2.0 * ChaCha8Rng::seed_from_u64(key).random::<f64>() - 1.0
}

/// Random phase point with actions in `[0.2, 1]` and tail amplitudes
/// decaying like `amp / [j]^2`.
pub fn random_point(sys: &CommutingSystem, seed: u64, amp: f64) -> PhasePoint {
    let mut g = rng(seed);
    let mut z = sys.zero_point();
    for l in 0..sys.r() {
        z.action[l] = g.random_range(0.2..1.0);
        z.angle[l] = g.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    }
    for (i, mode) in sys.tail.iter().enumerate() {
        let w = amp / (mode.j.unsigned_abs().max(1) as f64).powi(2);
        z.p[i] = w * mode_value(seed, mode, 0);
        z.q[i] = w * mode_value(seed, mode, 1);
    }
    z
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    d / b.iter().map(|y| y * y).sum::<f64>().sqrt()
}
