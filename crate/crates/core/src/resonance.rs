//! Nonresonance machinery: Diophantine checks of the tail frequencies,
//! continued fractions, constant-type masses and a Monte Carlo sampler for
//! admissible frequency shifts `eps`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{bracket_index, CommutingSystem};

/// Finite prefix `[a0; a1, a2, ...]` of a continued fraction expansion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub a0: i64,
    pub partial_quotients: Vec<u64>,
    /// The expansion stopped early because further quotients would not be
    /// reliable in double precision.
    pub precision_limited: bool,
}

impl ContinuedFraction {
    /// Convergents `p_k / q_k` for `k = 0..=len`, starting with `a0 / 1`.
    pub fn convergents(&self) -> Vec<(i128, i128)> {
        let (mut p2, mut q2) = (1i128, 0i128);
        let (mut p1, mut q1) = (self.a0 as i128, 1i128);
        let mut out = vec![(p1, q1)];
        for &a in &self.partial_quotients {
            let a = a as i128;
            let (p, q) = (a * p1 + p2, a * q1 + q2);
            out.push((p, q));
            (p2, q2, p1, q1) = (p1, q1, p, q);
        }
        out
    }

    /// Value of the finite expansion.
    pub fn value(&self) -> f64 {
        let mut y = f64::INFINITY;
        for &a in self.partial_quotients.iter().rev() {
            y = a as f64 + 1.0 / y;
        }
        self.a0 as f64 + 1.0 / y
    }
}

/// First `n_terms` partial quotients of `x > 0`.
///
/// Uses `x_{k+1} = 1 / (x_k - a_k)`. The propagated rounding error grows like
/// `q_k^2`; the expansion stops with `precision_limited` set once
/// `q_k^2 * eps_mach` exceeds `1e-3`. Remainders below `1e-9` terminate the
/// expansion as for a rational input.
pub fn cf_expand(x: f64, n_terms: usize) -> Result<ContinuedFraction> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidConfig(format!("cf_expand needs a finite x > 0, got {x}")));
    }
    if n_terms == 0 {
        return Err(Error::InvalidConfig("cf_expand needs n_terms >= 1".into()));
    }
    let a0 = x.floor();
    let mut cf = ContinuedFraction {
        a0: a0 as i64,
        partial_quotients: Vec::new(),
        precision_limited: false,
    };
    let mut frac = x - a0;
    let (mut q2, mut q1) = (0.0f64, 1.0f64);
    while cf.partial_quotients.len() < n_terms {
        // A remainder this small means the input is (numerically) rational.
        if frac < 1e-9 {
            break;
        }
        let xk = 1.0 / frac;
        // Snap quotients that are integers up to rounding.
        let a = (xk + 1e-9).floor();
        let q = a * q1 + q2;
        if q * q * f64::EPSILON > 1e-3 || !a.is_finite() {
            cf.precision_limited = true;
            break;
        }
        cf.partial_quotients.push(a as u64);
        frac = (xk - a).max(0.0);
        (q2, q1) = (q1, q);
    }
    Ok(cf)
}

/// Partial quotients substituted beyond the prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailPattern {
    AllOnes,
    AllTwos,
    /// Periodic repetition of the given block; entries must be 1 or 2.
    Periodic(Vec<u8>),
}

impl TailPattern {
    fn term(&self, i: usize) -> Result<u64> {
        match self {
            TailPattern::AllOnes => Ok(1),
            TailPattern::AllTwos => Ok(2),
            TailPattern::Periodic(block) => {
                if block.is_empty() || block.iter().any(|b| *b != 1 && *b != 2) {
                    return Err(Error::InvalidConfig(
                        "periodic tail block must be nonempty with entries in {1, 2}".into(),
                    ));
                }
                Ok(block[i % block.len()] as u64)
            }
        }
    }
}

/// Interval of masses for which constant-type frequencies are constructed.
pub const MASS_RANGE: (f64, f64) = (-1.0, 4.0 / 3.0);

/// Result of [`construct_mass`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassConstruction {
    pub m: f64,
    /// `nu = 1 / sqrt(1 + m)`.
    pub nu: f64,
    pub prefix: ContinuedFraction,
    pub tail: TailPattern,
}

/// Terms of the substituted tail used when summing it. The tail converges at
/// least like the golden ratio, so 80 terms are far below rounding.
const TAIL_TERMS: usize = 80;

/// Mass `m` near `target_m` whose `nu(m) = 1/sqrt(1+m)` keeps the first `q`
/// partial quotients of `nu(target_m)` and continues with `tail`.
pub fn construct_mass(
    target_m: f64,
    delta: f64,
    q: usize,
    tail: &TailPattern,
) -> Result<MassConstruction> {
    let (lo, hi) = MASS_RANGE;
    if !(target_m > lo && target_m < hi) {
        return Err(Error::MassOutOfRange { m: target_m, lo, hi });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig("delta must be > 0".into()));
    }
    let nu_target = 1.0 / (1.0 + target_m).sqrt();
    let mut prefix = if q == 0 {
        ContinuedFraction {
            a0: nu_target.floor() as i64,
            partial_quotients: vec![],
            precision_limited: false,
        }
    } else {
        cf_expand(nu_target, q)?
    };
    if prefix.partial_quotients.len() < q && prefix.precision_limited {
        return Err(Error::InvalidConfig(format!(
            "only {} reliable partial quotients available, Q = {q} requested",
            prefix.partial_quotients.len()
        )));
    }
    prefix.precision_limited = false;
    let mut y = tail.term(TAIL_TERMS)? as f64;
    for i in (0..TAIL_TERMS).rev() {
        y = tail.term(i)? as f64 + 1.0 / y;
    }
    for &a in prefix.partial_quotients.iter().rev() {
        y = a as f64 + 1.0 / y;
    }
    let nu = prefix.a0 as f64 + 1.0 / y;
    let m = 1.0 / (nu * nu) - 1.0;
    let distance = (m - target_m).abs();
    if distance > delta {
        return Err(Error::PrefixTooShort { q, distance, delta });
    }
    if !(m > lo && m < hi) {
        return Err(Error::MassOutOfRange { m, lo, hi });
    }
    Ok(MassConstruction {
        m,
        nu,
        prefix,
        tail: tail.clone(),
    })
}

/// Outcome of a windowed Diophantine check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub accepted: bool,
    /// `min [j]^tau |k - Omega~_j|` over the window.
    pub margin: f64,
    /// `(tail position, physical j, k)` of the minimum.
    pub worst: Option<(usize, i64, i64)>,
    pub j_max: usize,
    pub k_max: usize,
}

/// `Omega~_j = sum_l (n_l + eps_l) Omega_j^(l)` in the coordinates of `sys`.
pub fn tilde_frequencies(sys: &CommutingSystem, eps: &[f64]) -> Vec<f64> {
    let c: Vec<f64> = sys.n_vec.iter().zip(eps).map(|(n, e)| *n as f64 + e).collect();
    sys.combined_omega(&c)
}

/// Checks `|k - Omega~_j| >= gamma / [j]^tau` for tail modes with
/// `|j| <= j_max` and `|k| <= k_max`.
pub fn diophantine_check(
    sys: &CommutingSystem,
    eps: &[f64],
    gamma: f64,
    tau: f64,
    j_max: usize,
    k_max: usize,
) -> DiophantineReport {
    let omega = tilde_frequencies(sys, eps);
    let mut margin = f64::INFINITY;
    let mut worst = None;
    for (i, (mode, w)) in sys.tail.iter().zip(&omega).enumerate() {
        if mode.j.unsigned_abs() as usize > j_max {
            continue;
        }
        let k = w.round().clamp(-(k_max as f64), k_max as f64);
        let dist = (k - w).abs() * bracket_index(mode.weight_index()).powf(tau);
        if dist < margin {
            margin = dist;
            worst = Some((i, mode.j, k as i64));
        }
    }
    DiophantineReport {
        accepted: margin >= gamma,
        margin,
        worst,
        j_max,
        k_max,
    }
}

/// An accepted frequency shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCandidate {
    pub eps: Vec<f64>,
    pub gamma_eff: f64,
    pub verified_to: (usize, usize),
}

/// How candidate shifts are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SampleMode {
    /// Uniform in the ball of the given radius around `center`.
    Ball,
    /// `r = 2` only: `eps = (e+ + e-, e+ - e-)` with `e-` fixed and
    /// `e+ - center_plus` uniform in `[-radius, radius]`.
    FixedMinus { eps_minus: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub candidates: Vec<EpsilonCandidate>,
    pub drawn: usize,
    pub rejection_fraction: f64,
}

/// Parameters of [`sample_nonresonant_eps`].
#[derive(Clone, Debug, PartialEq)]
pub struct SamplerSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub count: usize,
    pub gamma: f64,
    pub tau: f64,
    pub j_max: usize,
    pub k_max: usize,
    pub mode: SampleMode,
}

fn draw_ball<R: Rng>(rng: &mut R, r: usize, radius: f64) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..r).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let rad = radius * rng.random::<f64>().powf(1.0 / r as f64);
            return g.into_iter().map(|x| x * rad / norm).collect();
        }
    }
}

/// Draws `spec.count` shifts and keeps the ones passing the Diophantine check.
pub fn sample_nonresonant_eps<R: Rng>(
    sys: &CommutingSystem,
    spec: &SamplerSpec,
    rng: &mut R,
) -> Result<SampleReport> {
    let r = sys.r();
    if !(spec.radius > 0.0) {
        return Err(Error::InvalidConfig("sampling radius must be > 0".into()));
    }
    if spec.center.len() != r {
        return Err(Error::InvalidConfig(format!(
            "sampling center has {} entries, expected {r}",
            spec.center.len()
        )));
    }
    if let SampleMode::FixedMinus { .. } = spec.mode {
        if r != 2 {
            return Err(Error::InvalidConfig("fixed-minus sampling needs r = 2".into()));
        }
    }
    let mut candidates = Vec::new();
    for _ in 0..spec.count {
        let eps: Vec<f64> = match spec.mode {
            SampleMode::Ball => draw_ball(rng, r, spec.radius)
                .into_iter()
                .zip(&spec.center)
                .map(|(d, c)| c + d)
                .collect(),
            SampleMode::FixedMinus { eps_minus } => {
                let plus = (spec.center[0] + spec.center[1]) / 2.0
                    + spec.radius * (2.0 * rng.random::<f64>() - 1.0);
                vec![plus + eps_minus, plus - eps_minus]
            }
        };
        let rep = diophantine_check(sys, &eps, spec.gamma, spec.tau, spec.j_max, spec.k_max);
        if rep.accepted {
            candidates.push(EpsilonCandidate {
                eps,
                gamma_eff: rep.margin,
                verified_to: (spec.j_max, spec.k_max),
            });
        }
    }
    let rejection_fraction = if spec.count == 0 {
        0.0
    } else {
        1.0 - candidates.len() as f64 / spec.count as f64
    };
    Ok(SampleReport {
        candidates,
        drawn: spec.count,
        rejection_fraction,
    })
}
