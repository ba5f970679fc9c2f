//! Checks of a computed torus against independent integration.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrator::{integrate_flow, richardson_endpoint, FlowSpec, Trajectory};
use crate::error::{Error, Result};
use crate::model::{tail_weight, wrap_angle, PhasePoint};
use crate::solver::torus::{psi_grid, solve_for_initial_angle, trig_weights, PsiSolution, TorusResult};
use crate::solver::{NormalizedSystem, SolverParams};

/// `sqrt(|dI|^2 + |dphi|^2 + |dp|^2_s + |dq|^2_s)` with angle differences
/// taken on the torus.
pub fn phase_distance(norm: &NormalizedSystem, a: &PhasePoint, b: &PhasePoint) -> f64 {
    let tr = &norm.system.trunc;
    let mut acc = 0.0;
    for l in 0..a.r() {
        acc += (a.action[l] - b.action[l]).powi(2) + wrap_angle(a.angle[l] - b.angle[l]).powi(2);
    }
    for (i, t) in norm.system.tail.iter().enumerate() {
        let w = tail_weight(t.weight_index(), tr.s, tr.sigma);
        acc += w * ((a.p[i] - b.p[i]).powi(2) + (a.q[i] - b.q[i]).powi(2));
    }
    acc.sqrt()
}

/// `n + eps` in original variables: the combination whose flow is
/// `2 pi`-periodic on the torus.
pub fn tilde_flow_coefficients(norm: &NormalizedSystem, eps: &[f64]) -> Vec<f64> {
    norm.original.n_vec.iter().zip(eps).map(|(n, e)| *n as f64 + e).collect()
}

/// Integration settings for one period of the periodic flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeriodSettings {
    pub steps: usize,
    pub integrator_order: usize,
    pub drift_budget: f64,
}

impl Default for PeriodSettings {
    fn default() -> Self {
        Self { steps: 512, integrator_order: 4, drift_budget: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicReport {
    /// `|z(2 pi) - z(0)|` for the integrated periodic flow.
    pub period_residual: f64,
    /// Largest deviation of the integrated orbit from the stored loop.
    pub loop_deviation: f64,
    /// Angle turns over one period in normalized variables.
    pub winding_raw: Vec<f64>,
    pub winding: Vec<i64>,
    /// Richardson estimate of the integrator error at `t = 2 pi`.
    pub integrator_error: f64,
    pub energy_drift: f64,
    pub steps: usize,
}

impl PeriodicReport {
    /// Winding `e_1` as required for the periodic orbits.
    pub fn winding_ok(&self) -> bool {
        self.winding.iter().enumerate().all(|(l, &w)| w == i64::from(l == 0))
    }
}

/// Integrates `sum (n_l + eps_l) H^(l)` for `2 pi` from the stored point of
/// `sol` and compares with the start and with the stored loop.
pub fn check_periodic_orbit(
    norm: &NormalizedSystem,
    result: &TorusResult,
    sol: &PsiSolution,
    settings: &PeriodSettings,
) -> Result<PeriodicReport> {
    let coeffs = tilde_flow_coefficients(norm, &result.eps);
    let spec = FlowSpec {
        coefficients: coeffs,
        t_final: 2.0 * PI,
        steps: settings.steps,
        integrator_order: settings.integrator_order,
        drift_budget: settings.drift_budget,
        samples: 32,
    };
    let z0 = &sol.z0;
    let tr = integrate_flow(&norm.original, &spec, z0)?;
    let mut loop_deviation = 0.0f64;
    for (t, z) in tr.times.iter().zip(&tr.points) {
        let stored = norm.to_original(&sol.point_at_normalized(*t));
        loop_deviation = loop_deviation.max(phase_distance(norm, z, &stored));
    }
    let end = tr.last();
    let turns_orig: Vec<f64> = (0..end.r()).map(|l| end.angle[l] - z0.angle[l]).collect();
    let turns = norm.eps_to_normalized(&turns_orig);
    let winding_raw: Vec<f64> = turns.iter().map(|t| t / (2.0 * PI)).collect();
    let winding = classify_winding(&winding_raw)?;
    let (_, integrator_error) = richardson_endpoint(&norm.original, &FlowSpec { steps: tr.steps, ..spec }, z0)?;
    Ok(PeriodicReport {
        period_residual: phase_distance(norm, end, z0),
        loop_deviation,
        winding_raw,
        winding,
        integrator_error,
        energy_drift: tr.energy_drift,
        steps: tr.steps,
    })
}

/// Rounds turn counts; a count farther than a quarter turn from an integer
/// is unclassifiable.
pub fn classify_winding(raw: &[f64]) -> Result<Vec<i64>> {
    raw.iter()
        .map(|w| {
            let n = w.round();
            if (w - n).abs() > 0.25 {
                Err(Error::FitDegenerate(format!("winding {w} is not near an integer")))
            } else {
                Ok(n as i64)
            }
        })
        .collect()
}

/// Weighted Birkhoff average of the torus-angle rates along a trajectory.
pub fn birkhoff_frequencies(tr: &Trajectory, t_final: f64) -> Result<Vec<f64>> {
    let n = tr.steps;
    let dt = t_final / n as f64;
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let s = (i as f64 + 0.5) / n as f64;
            (-1.0 / (s * (1.0 - s))).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    tr.angle_increments
        .iter()
        .map(|inc| {
            let f = inc.iter().zip(&weights).map(|(d, w)| w * d).sum::<f64>() / (total * dt);
            if f.is_finite() {
                Ok(f)
            } else {
                Err(Error::FitDegenerate("non-finite angle increments".into()))
            }
        })
        .collect()
}

/// Frequencies of the torus-angle motion under `flow`, started at `z0`.
pub fn measure_frequencies(norm: &NormalizedSystem, z0: &PhasePoint, flow: &FlowSpec) -> Result<Vec<f64>> {
    let tr = integrate_flow(&norm.original, flow, z0)?;
    let smallest = tr.points.iter().flat_map(|z| z.action.iter()).fold(f64::INFINITY, |m, a| m.min(*a));
    if !(smallest > 1e-12) {
        return Err(Error::FitDegenerate(format!("torus action {smallest:e} too small for angles")));
    }
    birkhoff_frequencies(&tr, flow.t_final)
}

/// Trigonometric interpolant of the torus graph over the mean-angle grid.
struct GraphInterpolant {
    r: usize,
    n: usize,
    /// Per grid point: normalized `(I(0), theta(0), p(0), q(0))`.
    values: Vec<PhasePoint>,
}

impl GraphInterpolant {
    fn new(result: &TorusResult) -> Self {
        let values = result.solutions.iter().map(|s| s.point_at_normalized(0.0)).collect();
        let r = result.solutions.first().map_or(0, |s| s.psi.len());
        Self { r, n: result.psi_grid, values }
    }

    fn eval(&self, psi: &[f64]) -> PhasePoint {
        let w: Vec<Vec<f64>> = psi.iter().map(|x| trig_weights(self.n, *x)).collect();
        let grid = psi_grid(self.r, self.n);
        let mut out = self.values[0].clone();
        out.scale(0.0);
        for (idx, (node, v)) in grid.iter().zip(&self.values).enumerate() {
            let mut weight = 1.0;
            let mut rem = idx;
            for l in (0..self.r).rev() {
                weight *= w[l][rem % self.n];
                rem /= self.n;
            }
            // Interpolate the periodic part of the angle only.
            let mut v = v.clone();
            for l in 0..self.r {
                v.angle[l] -= node[l];
            }
            out.axpy(weight, &v);
        }
        for l in 0..self.r {
            out.angle[l] += psi[l];
        }
        out
    }

    /// Point of the interpolated torus whose angle is `y`.
    fn at_angle(&self, y: &[f64]) -> PhasePoint {
        let mut psi = y.to_vec();
        for _ in 0..50 {
            let z = self.eval(&psi);
            let mut change = 0.0f64;
            for l in 0..self.r {
                let d = wrap_angle(y[l] - z.angle[l]);
                psi[l] += d;
                change = change.max(d.abs());
            }
            if change < 1e-14 {
                break;
            }
        }
        self.eval(&psi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// Largest distance of an evolved point to the torus point with the same
    /// angle, found by re-solving the torus at that angle.
    pub max_distance: f64,
    /// Same with the torus graph interpolated over the stored grid.
    pub interpolated_distance: f64,
    /// Distance to the nearest stored grid point.
    pub raw_distance: f64,
    pub period_residual: f64,
    /// Angle frequencies per flow (original variables).
    pub measured_frequencies: Vec<Vec<f64>>,
    pub energy_drift: f64,
    /// Largest drift of any single `H^(l)` along any flow.
    pub conserved_drift: f64,
    pub n_samples: usize,
}

/// Evolves `n_samples` stored torus points under every flow and measures
/// the distance of the trajectories to the torus.
pub fn check_invariance(
    norm: &NormalizedSystem,
    result: &TorusResult,
    flows: &[FlowSpec],
    n_samples: usize,
    params: &SolverParams,
    period: &PeriodSettings,
) -> Result<InvarianceReport> {
    let total = result.solutions.len();
    if total == 0 || n_samples == 0 {
        return Err(Error::InvalidConfig("invariance check needs solutions and samples".into()));
    }
    let picks: Vec<usize> = (0..n_samples.min(total)).map(|i| i * total / n_samples.min(total)).collect();
    let interp = GraphInterpolant::new(result);
    let jobs: Vec<(usize, usize)> = (0..flows.len()).flat_map(|f| picks.iter().map(move |&i| (f, i))).collect();
    struct Job {
        flow: usize,
        projected: f64,
        interpolated: f64,
        raw: f64,
        drift: f64,
        conserved: f64,
        freqs: Option<Vec<f64>>,
    }
    let done: Vec<Job> = jobs
        .par_iter()
        .map(|&(f, i)| -> Result<Job> {
            let sol = &result.solutions[i];
            let tr = integrate_flow(&norm.original, &flows[f], &sol.z0)?;
            let (mut projected, mut interpolated, mut raw) = (0.0f64, 0.0f64, 0.0f64);
            let mut psi = sol.psi.clone();
            for z in &tr.points {
                let zh = norm.to_normalized(z);
                let y: Vec<f64> = zh.angle.iter().map(|a| wrap_angle(*a)).collect();
                let on = solve_for_initial_angle(norm, &result.eps, &result.a_star, &y, Some(&psi), params)?;
                psi.clone_from(&on.psi);
                projected = projected.max(phase_distance(norm, z, &on.z0));
                let zi = norm.to_original(&interp.at_angle(&y));
                interpolated = interpolated.max(phase_distance(norm, z, &zi));
                let nearest = result
                    .solutions
                    .iter()
                    .map(|s| phase_distance(norm, z, &s.z0))
                    .fold(f64::INFINITY, f64::min);
                raw = raw.max(nearest);
            }
            let freqs = if i == picks[0] { Some(birkhoff_frequencies(&tr, flows[f].t_final)?) } else { None };
            Ok(Job {
                flow: f,
                projected,
                interpolated,
                raw,
                drift: tr.energy_drift,
                conserved: tr.conserved_drift.iter().fold(0.0, |m, x| m.max(*x)),
                freqs,
            })
        })
        .collect::<Result<_>>()?;
    let mut measured = vec![Vec::new(); flows.len()];
    for j in &done {
        if let Some(f) = &j.freqs {
            measured[j.flow].clone_from(f);
        }
    }
    let max = |g: &dyn Fn(&Job) -> f64| done.iter().map(g).fold(0.0, f64::max);
    let periodic = check_periodic_orbit(norm, result, &result.solutions[picks[0]], period)?;
    Ok(InvarianceReport {
        max_distance: max(&|j| j.projected),
        interpolated_distance: max(&|j| j.interpolated),
        raw_distance: max(&|j| j.raw),
        period_residual: periodic.period_residual,
        measured_frequencies: measured,
        energy_drift: max(&|j| j.drift),
        conserved_drift: max(&|j| j.conserved),
        n_samples: picks.len(),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::FitDegenerate("log-log fit needs >= 2 positive pairs".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::FitDegenerate("all abscissae equal".into()));
    }
    Ok(sxy / sxx)
}
