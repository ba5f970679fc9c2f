//! The four stages: resonance check, solve, verify, sweep.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ResolvedModel, RunConfig};
use super::records::{
    fmt_f64, read_json_lines, write_csv, Check, FrequencyCheck, JsonLines, ResonanceRecord, SweepSummary,
    TorusRecord, VerifyRecord,
};
use crate::error::{Error, Result};
use crate::model::CommutingSystem;
use crate::resonance::{diophantine_check, sample_nonresonant_eps, SampleReport, SamplerSpec};
use crate::solver::{assemble_torus, averaged_nonlinearity, normalize_n, NormalizedSystem, TorusResult};
use crate::verify::{
    check_invariance, check_periodic_orbit, loglog_slope, measure_frequencies, FlowSpec,
};

/// File names inside the output directory.
pub const RESONANCE_FILE: &str = "resonance.jsonl";
pub const CANDIDATES_FILE: &str = "candidates.csv";
pub const TORI_FILE: &str = "tori.jsonl";
pub const VERIFY_FILE: &str = "verify.jsonl";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const SWEEP_TORI_FILE: &str = "sweep_tori.jsonl";
pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.jsonl";

/// A shift to solve for.
#[derive(Clone, Debug)]
pub struct Target {
    pub source: &'static str,
    pub eps: Vec<f64>,
    pub a_guess: Vec<f64>,
}

struct Window {
    gamma: f64,
    tau: f64,
    j_max: usize,
    k_max: usize,
}

fn window(cfg: &RunConfig) -> Window {
    let r = &cfg.resonance;
    Window {
        gamma: r.gamma.unwrap_or(cfg.trunc.gamma),
        tau: r.tau.unwrap_or(cfg.trunc.tau),
        j_max: r.j_max.unwrap_or(usize::MAX),
        k_max: r.k_max.unwrap_or(cfg.trunc.k_max),
    }
}

fn sample(cfg: &RunConfig, sys: &CommutingSystem) -> Result<(SampleReport, f64)> {
    let res = &cfg.resonance;
    let w = window(cfg);
    let scale = sys.mu.abs();
    let radius = res.radius_over_mu * scale;
    if res.count == 0 {
        return Ok((SampleReport { candidates: vec![], drawn: 0, rejection_fraction: 0.0 }, radius));
    }
    let center = res
        .center_over_mu
        .clone()
        .map(|c| c.iter().map(|x| x * scale).collect())
        .unwrap_or_else(|| vec![0.0; sys.r()]);
    let spec = SamplerSpec {
        center,
        radius,
        count: res.count,
        gamma: w.gamma,
        tau: w.tau,
        j_max: w.j_max,
        k_max: w.k_max,
        mode: res.mode.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok((sample_nonresonant_eps(sys, &spec, &mut rng)?, radius))
}

/// Shifts requested by the `[torus]` section at the coupling of `sys`.
pub fn targets(cfg: &RunConfig, sys: &CommutingSystem, with_sampled: bool) -> Result<Vec<Target>> {
    let mu = sys.mu;
    let r = sys.r();
    let mut out = Vec::new();
    let check_len = |v: &[f64], what: &str| {
        if v.len() == r {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{what} needs {r} entries, got {}", v.len())))
        }
    };
    for a in &cfg.torus.amplitudes {
        check_len(a, "torus.amplitudes")?;
        let grad = averaged_nonlinearity(sys, a, &vec![0.0; r], cfg.solver.quad_points)?.grad;
        out.push(Target { source: "amplitude", eps: grad.iter().map(|g| -mu * g).collect(), a_guess: a.clone() });
    }
    let guess = || -> Result<Vec<f64>> {
        let g = cfg
            .torus
            .a_guess
            .clone()
            .ok_or_else(|| Error::InvalidConfig("torus.a_guess is required for explicit shifts".into()))?;
        check_len(&g, "torus.a_guess")?;
        Ok(g)
    };
    for e in &cfg.torus.eps_over_mu {
        check_len(e, "torus.eps_over_mu")?;
        out.push(Target { source: "eps-over-mu", eps: e.iter().map(|x| x * mu).collect(), a_guess: guess()? });
    }
    if with_sampled && cfg.torus.use_sampled {
        let (report, _) = sample(cfg, sys)?;
        for c in report.candidates {
            out.push(Target { source: "sampled", eps: c.eps, a_guess: guess()? });
        }
    }
    Ok(out)
}

/// Emits the unperturbed Diophantine margin and the sampled candidates.
pub fn check_resonance(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let model = cfg.resolve()?;
    let sys = model.build()?;
    let w = window(cfg);
    let unperturbed = diophantine_check(&sys, &vec![0.0; sys.r()], w.gamma, w.tau, w.j_max, w.k_max);
    let (report, radius) = sample(cfg, &sys)?;
    let rows: Vec<Vec<String>> = report
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut row = vec![i.to_string()];
            row.extend(c.eps.iter().map(|x| fmt_f64(*x)));
            row.push(fmt_f64(c.gamma_eff));
            row
        })
        .collect();
    let mut header = vec!["index".to_string()];
    header.extend((1..=sys.r()).map(|l| format!("eps_{l}")));
    header.push("gamma_eff".into());
    let record = ResonanceRecord {
        seed: cfg.seed,
        config: cfg.clone(),
        model,
        unperturbed,
        sample: report,
        radius,
        gamma: w.gamma,
        tau: w.tau,
    };
    let mut jl = JsonLines::create(&out.join(RESONANCE_FILE))?;
    jl.write(&record)?;
    jl.finish()?;
    write_csv(&out.join(CANDIDATES_FILE), &header, &rows)?;
    Ok(true)
}

fn solve_one(model: &ResolvedModel, norm: &NormalizedSystem, cfg: &RunConfig, t: &Target) -> Result<TorusResult> {
    let mut res = assemble_torus(norm, &t.eps, &t.a_guess, &cfg.solver)?;
    res.frequencies = model.predicted_frequencies(&t.eps)?;
    Ok(res)
}

fn torus_record(cfg: &RunConfig, model: &ResolvedModel, index: usize, t: &Target, res: &Result<TorusResult>) -> TorusRecord {
    let (ok, error, result) = match res {
        Ok(r) => (true, None, Some(r.clone())),
        Err(e) => (false, Some(e.to_string()), None),
    };
    TorusRecord {
        seed: cfg.seed,
        index,
        source: t.source.into(),
        model: model.clone(),
        solver: cfg.solver.clone(),
        eps: t.eps.clone(),
        ok,
        error,
        result,
    }
}

/// Solves every requested torus; failures are recorded and the run goes on.
pub fn solve(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let model = cfg.resolve()?;
    let sys = model.build()?;
    let norm = normalize_n(&sys)?;
    let tgts = targets(cfg, &sys, true)?;
    let mut jl = JsonLines::create(&out.join(TORI_FILE))?;
    let mut all_ok = true;
    for (i, t) in tgts.iter().enumerate() {
        let rec = torus_record(cfg, &model, i, t, &solve_one(&model, &norm, cfg, t));
        all_ok &= rec.ok;
        jl.write(&rec)?;
    }
    jl.finish()?;
    Ok(all_ok)
}

/// Rebuilds the stored points from `a* + mu alpha` so that the record's
/// amplitude is what gets verified.
fn reconstruct(norm: &NormalizedSystem, res: &TorusResult) -> TorusResult {
    let mut out = res.clone();
    for s in &mut out.solutions {
        let a: Vec<f64> = res.a_star.iter().zip(&s.alpha).map(|(a, al)| a + res.mu * al).collect();
        s.a = norm.actions_to_normalized(&a);
        s.z0 = norm.to_original(&s.point_at_normalized(0.0));
    }
    out
}

fn default_flows(r: usize) -> Vec<FlowSpec> {
    (0..r)
        .map(|l| {
            let mut c = vec![0.0; r];
            c[l] = 1.0;
            FlowSpec::new(c, 10.0, 1000)
        })
        .collect()
}

fn verify_one(cfg: &RunConfig, rec: &TorusRecord) -> Result<VerifyRecord> {
    let v = &cfg.verify;
    let res = rec.result.as_ref().ok_or_else(|| {
        Error::InvalidConfig(format!("record {} holds no torus: {}", rec.index, rec.error.clone().unwrap_or_default()))
    })?;
    let sys = rec.model.build()?;
    let norm = normalize_n(&sys)?;
    let res = reconstruct(&norm, res);
    let first = res.solutions.first().ok_or_else(|| Error::InvalidConfig("record has no solutions".into()))?;
    let periodic = check_periodic_orbit(&norm, &res, first, &v.period)?;
    let flows = if v.flows.is_empty() { default_flows(sys.r()) } else { v.flows.clone() };
    let invariance = check_invariance(&norm, &res, &flows, v.n_samples, &rec.solver, &v.period)?;
    let mut checks = vec![
        Check::at_most("period_residual", periodic.period_residual, v.max_period_residual),
        Check::at_most(
            "invariance_distance",
            invariance.max_distance,
            (v.invariance_factor * periodic.period_residual).max(v.invariance_floor),
        ),
        Check::at_most("beta_residual", res.beta_residual, rec.solver.beta_tol),
        Check {
            name: "winding".into(),
            value: periodic.winding_raw.iter().enumerate().map(|(l, w)| (w - f64::from(l == 0)).abs()).fold(0.0, f64::max),
            budget: 0.25,
            pass: periodic.winding_ok(),
        },
    ];
    let mut frequencies = None;
    if let (Some(flow), Some(pred)) = (rec.model.energy_flow()?, res.frequencies.clone()) {
        let spec = FlowSpec { samples: 4, ..FlowSpec::new(flow.clone(), v.frequency_t_final, v.frequency_steps) };
        let rates = measure_frequencies(&norm, &first.z0, &spec)?;
        let measured = rec.model.rates_to_frequencies(&rates);
        let num: f64 = measured.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = pred.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rel = num / den;
        checks.push(Check::at_most("frequency_relative_error", rel, v.frequency_rtol));
        frequencies = Some(FrequencyCheck { flow, measured, predicted: pred, relative_error: rel });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyRecord {
        seed: cfg.seed,
        index: rec.index,
        mu: res.mu,
        eps: res.eps.clone(),
        periodic: Some(periodic),
        invariance: Some(invariance),
        frequencies,
        checks,
        pass,
        error: None,
    })
}

/// Verifies stored tori by integration against the configured budgets.
pub fn verify(cfg: &RunConfig, record_path: &Path, out: &Path) -> Result<bool> {
    let records: Vec<TorusRecord> = read_json_lines(record_path)?;
    let picked: Vec<&TorusRecord> = if cfg.verify.records.is_empty() {
        records.iter().collect()
    } else {
        cfg.verify
            .records
            .iter()
            .map(|&i| {
                records
                    .iter()
                    .find(|r| r.index == i)
                    .ok_or_else(|| Error::InvalidConfig(format!("no record with index {i}")))
            })
            .collect::<Result<_>>()?
    };
    if picked.is_empty() {
        return Err(Error::InvalidConfig(format!("{} holds no records", record_path.display())));
    }
    let mut jl = JsonLines::create(&out.join(VERIFY_FILE))?;
    let mut all = true;
    for rec in picked {
        let vr = verify_one(cfg, rec).unwrap_or_else(|e| VerifyRecord {
            seed: cfg.seed,
            index: rec.index,
            mu: rec.model.mu(),
            eps: rec.eps.clone(),
            periodic: None,
            invariance: None,
            frequencies: None,
            checks: vec![],
            pass: false,
            error: Some(e.to_string()),
        });
        all &= vr.pass;
        jl.write(&vr)?;
    }
    jl.finish()?;
    Ok(all)
}

/// Solves the configured tori over the coupling sweep and fits the scaling.
pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let base = cfg.resolve()?;
    let mus = &cfg.sweep.mu;
    if mus.is_empty() {
        return Err(Error::InvalidConfig("sweep.mu is empty".into()));
    }
    let mut per_mu: Vec<(f64, Vec<(Target, Result<TorusResult>, Option<f64>)>)> = Vec::new();
    let mut jl = JsonLines::create(&out.join(SWEEP_TORI_FILE))?;
    let mut index = 0;
    for &mu in mus {
        let model = base.with_mu(mu);
        let sys = model.build()?;
        let norm = normalize_n(&sys)?;
        let mut rows = Vec::new();
        for t in targets(cfg, &sys, false)? {
            let res = solve_one(&model, &norm, cfg, &t);
            let period = match (&res, cfg.sweep.verify) {
                (Ok(r), true) => check_periodic_orbit(&norm, r, &r.solutions[0], &cfg.verify.period)
                    .ok()
                    .map(|p| p.period_residual),
                _ => None,
            };
            let rec = torus_record(cfg, &model, index, &t, &res);
            jl.write(&rec)?;
            index += 1;
            rows.push((t, res, period));
        }
        per_mu.push((mu, rows));
    }
    jl.finish()?;
    let n_targets = per_mu[0].1.len();
    let r = base.trunc.r;
    let mut header: Vec<String> = vec!["target".into(), "mu".into()];
    header.extend((1..=r).map(|l| format!("eps_{l}")));
    for h in ["w_norm", "w_over_mu", "distance", "beta_residual", "range_residual", "period_residual", "ok"] {
        header.push(h.into());
    }
    let mut rows = Vec::new();
    let mut summaries = JsonLines::create(&out.join(SWEEP_SUMMARY_FILE))?;
    let mut all = true;
    for ti in 0..n_targets {
        let (mut xs, mut dist, mut wn, mut ratio) = (vec![], vec![], vec![], vec![]);
        let mut ok = true;
        for (mu, list) in &per_mu {
            let (t, res, period) = &list[ti];
            let mut row = vec![ti.to_string(), fmt_f64(*mu)];
            row.extend(t.eps.iter().map(|x| fmt_f64(*x)));
            match res {
                Ok(res) => {
                    for x in [
                        res.max_w_norm,
                        res.max_w_norm / mu,
                        res.distance,
                        res.beta_residual,
                        res.range_residual,
                        period.unwrap_or(f64::NAN),
                    ] {
                        row.push(fmt_f64(x));
                    }
                    row.push("true".into());
                    xs.push(mu.abs());
                    dist.push(res.distance);
                    wn.push(res.max_w_norm);
                    ratio.push(res.max_w_norm / mu.abs());
                }
                Err(_) => {
                    row.extend(std::iter::repeat_n(fmt_f64(f64::NAN), 6));
                    row.push("false".into());
                    ok = false;
                }
            }
            rows.push(row);
        }
        let distance_slope = loglog_slope(&xs, &dist).ok();
        let w_norm_slope = loglog_slope(&xs, &wn).ok();
        let ratio_spread = if ratio.is_empty() {
            None
        } else {
            let max = ratio.iter().fold(f64::MIN, |m, x| m.max(*x));
            let min = ratio.iter().fold(f64::MAX, |m, x| m.min(*x));
            Some((max - min) / min)
        };
        let mut checks = vec![];
        if let Some(s) = distance_slope {
            checks.push(Check::at_most("distance_slope_deviation", (s - 1.0).abs(), cfg.sweep.slope_tol));
        }
        if let Some(s) = ratio_spread {
            checks.push(Check::at_most("w_over_mu_spread", s, cfg.sweep.ratio_tol));
        }
        let pass = ok && xs.len() >= 2 && checks.iter().all(|c| c.pass);
        all &= pass;
        summaries.write(&SweepSummary {
            seed: cfg.seed,
            config: cfg.clone(),
            target: ti,
            mu: xs,
            distance: dist,
            w_over_mu: ratio,
            distance_slope,
            w_norm_slope,
            ratio_spread,
            checks,
            pass,
        })?;
    }
    summaries.finish()?;
    write_csv(&out.join(SWEEP_FILE), &header, &rows)?;
    Ok(all && n_targets > 0)
}
