//! Splitting integrator for `sum_l c_l H^(l)` in Cartesian variables.
//!
//! The quadratic part is advanced exactly (every mode rotates with its
//! combined frequency) and the nonlinear part through the model's exact
//! [`CartesianSplit`] kick. Strang splitting is raised to higher even orders
//! by triple-jump composition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CartesianSplit, CommutingSystem, PhasePoint, WeightedSeq};

/// One integration request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    /// `c_l` in `sum_l c_l H^(l)`.
    pub coefficients: Vec<f64>,
    pub t_final: f64,
    pub steps: usize,
    /// Even order of the composition scheme.
    #[serde(default = "default_order")]
    pub integrator_order: usize,
    /// Largest accepted drift of the integrated Hamiltonian.
    #[serde(default = "default_drift_budget")]
    pub drift_budget: f64,
    /// Number of equispaced output samples after `t = 0`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_order() -> usize {
    4
}

fn default_drift_budget() -> f64 {
    1e-10
}

fn default_samples() -> usize {
    16
}

impl FlowSpec {
    pub fn new(coefficients: Vec<f64>, t_final: f64, steps: usize) -> Self {
        Self {
            coefficients,
            t_final,
            steps,
            integrator_order: default_order(),
            drift_budget: default_drift_budget(),
            samples: default_samples(),
        }
    }

    pub fn validate(&self, r: usize) -> Result<()> {
        if self.coefficients.len() != r {
            return Err(Error::InvalidConfig(format!(
                "flow needs {r} coefficients, got {}",
                self.coefficients.len()
            )));
        }
        if self.steps == 0 || self.samples == 0 {
            return Err(Error::InvalidConfig("steps and samples must be >= 1".into()));
        }
        if self.integrator_order < 2 || self.integrator_order % 2 != 0 {
            return Err(Error::InvalidConfig("integrator order must be even and >= 2".into()));
        }
        if !self.t_final.is_finite() || !(self.drift_budget > 0.0) {
            return Err(Error::InvalidConfig("t_final must be finite, drift budget > 0".into()));
        }
        Ok(())
    }
}

/// Output of [`integrate_flow`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Points with continuously unwrapped torus angles.
    pub points: Vec<PhasePoint>,
    /// `max |H(t) - H(0)|` of the integrated Hamiltonian over the samples.
    pub energy_drift: f64,
    /// Same for every `H^(l)` separately.
    pub conserved_drift: Vec<f64>,
    pub steps: usize,
    /// Sum over steps of the torus-angle increments.
    pub angle_increments: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &PhasePoint {
        self.points.last().expect("trajectory has at least one point")
    }
}

/// Interleaved `[p, q]` per mode, torus modes first.
pub fn to_cartesian(z: &PhasePoint) -> Result<Vec<f64>> {
    let mut x = Vec::with_capacity(2 * (z.r() + z.n_tail()));
    for (&i, &phi) in z.action.iter().zip(&z.angle) {
        if !(i >= 0.0) {
            return Err(Error::Oracle(format!("negative action {i}")));
        }
        let rho = (2.0 * i).sqrt();
        x.push(rho * phi.cos());
        x.push(rho * phi.sin());
    }
    for (p, q) in z.p.iter().zip(z.q.iter()) {
        x.push(*p);
        x.push(*q);
    }
    Ok(x)
}

/// Inverse of [`to_cartesian`]; each angle is chosen closest to `reference`.
pub fn from_cartesian(x: &[f64], r: usize, reference: &[f64]) -> PhasePoint {
    let n_tail = x.len() / 2 - r;
    let mut action = Vec::with_capacity(r);
    let mut angle = Vec::with_capacity(r);
    for l in 0..r {
        let (p, q) = (x[2 * l], x[2 * l + 1]);
        action.push((p * p + q * q) / 2.0);
        let raw = q.atan2(p);
        angle.push(reference[l] + crate::model::wrap_angle(raw - reference[l]));
    }
    PhasePoint {
        action,
        angle,
        p: WeightedSeq((0..n_tail).map(|i| x[2 * (r + i)]).collect()),
        q: WeightedSeq((0..n_tail).map(|i| x[2 * (r + i) + 1]).collect()),
    }
}

fn rotate(x: &mut [f64], rates: &[f64], dt: f64) {
    for (m, rate) in rates.iter().enumerate() {
        let (s, c) = (rate * dt).sin_cos();
        let (p, q) = (x[2 * m], x[2 * m + 1]);
        x[2 * m] = p * c - q * s;
        x[2 * m + 1] = p * s + q * c;
    }
}

/// Substep weights of the triple-jump composition of Strang steps.
pub fn composition_weights(order: usize) -> Vec<f64> {
    let mut w = vec![1.0];
    let mut p = 2;
    while p < order {
        let e = 1.0 / (p as f64 + 1.0);
        let w1 = 1.0 / (2.0 - 2f64.powf(e));
        let w0 = 1.0 - 2.0 * w1;
        let mut next = Vec::with_capacity(3 * w.len());
        for f in [w1, w0, w1] {
            next.extend(w.iter().map(|x| x * f));
        }
        w = next;
        p += 2;
    }
    w
}

/// Exact-rotation / kick splitting of one Hamiltonian combination.
pub struct Stepper<'a> {
    kick: &'a dyn CartesianSplit,
    coeffs: Vec<f64>,
    mu: f64,
    rates: Vec<f64>,
    weights: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(sys: &'a CommutingSystem, coeffs: &[f64], order: usize) -> Result<Self> {
        let kick = sys.nonlinearity.cartesian().ok_or_else(|| {
            Error::InvalidConfig("model has no Cartesian splitting for integration".into())
        })?;
        let mut rates = coeffs.to_vec();
        rates.extend(sys.combined_omega(coeffs));
        Ok(Self {
            kick,
            coeffs: coeffs.to_vec(),
            mu: sys.mu,
            rates,
            weights: composition_weights(order),
        })
    }

    fn strang(&self, x: &mut [f64], h: f64) {
        rotate(x, &self.rates, h / 2.0);
        self.kick.kick(&self.coeffs, self.mu, x, h);
        rotate(x, &self.rates, h / 2.0);
    }

    pub fn step(&self, x: &mut [f64], dt: f64) {
        for w in &self.weights {
            self.strang(x, w * dt);
        }
    }
}

fn run(sys: &CommutingSystem, spec: &FlowSpec, z0: &PhasePoint, steps: usize) -> Result<Trajectory> {
    let r = sys.r();
    let stepper = Stepper::new(sys, &spec.coefficients, spec.integrator_order)?;
    let mut x = to_cartesian(z0)?;
    let dt = spec.t_final / steps as f64;
    let h0 = sys.combined_value(&spec.coefficients, z0)?;
    let hl0: Vec<f64> = (0..r).map(|l| sys.hamiltonian_value(l, z0)).collect::<Result<_>>()?;
    let mut angles = z0.angle.clone();
    let mut increments = vec![Vec::with_capacity(steps); r];
    let mut times = vec![0.0];
    let mut points = vec![z0.clone()];
    let (mut drift, mut cdrift) = (0.0f64, vec![0.0f64; r]);
    let every = |n: usize| n * spec.samples % steps < spec.samples;
    for n in 1..=steps {
        stepper.step(&mut x, dt);
        let z = from_cartesian(&x, r, &angles);
        for l in 0..r {
            increments[l].push(z.angle[l] - angles[l]);
        }
        angles.clone_from(&z.angle);
        if every(n) || n == steps {
            if !z.is_finite() {
                return Err(Error::StepRejection(format!("non-finite state at step {n}")));
            }
            drift = drift.max((sys.combined_value(&spec.coefficients, &z)? - h0).abs());
            for l in 0..r {
                cdrift[l] = cdrift[l].max((sys.hamiltonian_value(l, &z)? - hl0[l]).abs());
            }
            times.push(n as f64 * dt);
            points.push(z);
        }
    }
    Ok(Trajectory {
        times,
        points,
        energy_drift: drift,
        conserved_drift: cdrift,
        steps,
        angle_increments: increments,
    })
}

/// Integrates the flow of `sum_l c_l H^(l)` from `z0`, doubling the step
/// count up to three times if the Hamiltonian drift exceeds the budget.
pub fn integrate_flow(sys: &CommutingSystem, spec: &FlowSpec, z0: &PhasePoint) -> Result<Trajectory> {
    spec.validate(sys.r())?;
    let mut steps = spec.steps;
    for _ in 0..4 {
        let tr = run(sys, spec, z0, steps)?;
        if tr.energy_drift <= spec.drift_budget {
            return Ok(tr);
        }
        steps *= 2;
    }
    Err(Error::StepRejection(format!(
        "Hamiltonian drift above {:e} after {} steps",
        spec.drift_budget,
        steps / 2
    )))
}

/// Endpoint from `N` and `2N` steps combined by Richardson extrapolation,
/// with the estimated error of the `2N` endpoint.
pub fn richardson_endpoint(
    sys: &CommutingSystem,
    spec: &FlowSpec,
    z0: &PhasePoint,
) -> Result<(PhasePoint, f64)> {
    spec.validate(sys.r())?;
    let coarse = run(sys, spec, z0, spec.steps)?;
    let fine = run(sys, spec, z0, 2 * spec.steps)?;
    let factor = 2f64.powi(spec.integrator_order as i32) - 1.0;
    let (zc, zf) = (coarse.last(), fine.last());
    let mut diff = zf.sub(zc);
    let err = diff.dot(&diff).sqrt() / factor;
    diff.scale(1.0 / factor);
    let mut out = zf.clone();
    out.axpy(1.0, &diff);
    Ok((out, err))
}
