//! Run configuration (TOML). Unknown keys are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CommutingSystem, TruncationParams};
use crate::models::beam::{beam_k_coefficients, beam_mode_rates_to_frequencies, build_beam, torus_frequencies_beam, BeamConfig};
use crate::models::nlw::{build_nlw, nlw_k_coefficients, nlw_mode_rates_to_frequencies, torus_frequencies_nlw, NlwConfig};
use crate::models::table::{build_table, TableConfig};
use crate::resonance::{construct_mass, MassConstruction, SampleMode, TailPattern};
use crate::solver::SolverParams;
use crate::verify::{FlowSpec, PeriodSettings};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub trunc: TruncationParams,
    #[serde(default)]
    pub mass: Option<MassSpec>,
    #[serde(default)]
    pub resonance: ResonanceConfig,
    #[serde(default)]
    pub torus: TorusConfig,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    Nlw {
        /// Mass; omitted when `[mass]` constructs it.
        m: Option<f64>,
        mu: f64,
    },
    Beam {
        m: f64,
        mu: f64,
    },
    CustomTable {
        mu: f64,
        omega: Vec<Vec<f64>>,
        g: Vec<Vec<f64>>,
        h: Vec<f64>,
        kappa: Vec<f64>,
        n: Vec<i64>,
        #[serde(default = "one")]
        smoothing: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Constant-type mass near `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassSpec {
    pub target: f64,
    pub delta: f64,
    pub q: usize,
    #[serde(default = "all_ones")]
    pub tail: TailPattern,
}

fn all_ones() -> TailPattern {
    TailPattern::AllOnes
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceConfig {
    /// Threshold of the Diophantine check; the truncation's `gamma` if absent.
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    /// Scan window; the truncation's `j_max` / `k_max` if absent.
    pub j_max: Option<usize>,
    pub k_max: Option<usize>,
    /// Sampling radius in units of `|mu|`.
    pub radius_over_mu: f64,
    pub count: usize,
    /// Center of the sampling ball in units of `|mu|`; zero if absent.
    pub center_over_mu: Option<Vec<f64>>,
    pub mode: SampleMode,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self {
            gamma: None,
            tau: None,
            j_max: None,
            k_max: None,
            radius_over_mu: 1.0,
            count: 0,
            center_over_mu: None,
            mode: SampleMode::Ball,
        }
    }
}

/// Which tori to solve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusConfig {
    /// Amplitudes `a*`; each selects `eps = -mu grad <F_n>(a*)`.
    pub amplitudes: Vec<Vec<f64>>,
    /// Explicit shifts `eps / mu` (scaled by `mu`, so sweeps keep them).
    pub eps_over_mu: Vec<Vec<f64>>,
    /// Initial guess for `a*` with explicit or sampled shifts.
    pub a_guess: Option<Vec<f64>>,
    /// Also solve every accepted sampled shift.
    pub use_sampled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub period: PeriodSettings,
    /// Flows for the invariance check; every `H^(l)` for 10 time units if empty.
    pub flows: Vec<FlowSpec>,
    pub n_samples: usize,
    pub max_period_residual: f64,
    /// Invariance budget as a multiple of the period residual...
    pub invariance_factor: f64,
    /// ...but never below this absolute floor.
    pub invariance_floor: f64,
    pub frequency_rtol: f64,
    pub frequency_t_final: f64,
    pub frequency_steps: usize,
    /// Record indices to verify; all if empty.
    pub records: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            period: PeriodSettings::default(),
            flows: Vec::new(),
            n_samples: 4,
            max_period_residual: 1e-6,
            invariance_factor: 50.0,
            invariance_floor: 1e-12,
            frequency_rtol: 1e-6,
            frequency_t_final: 400.0,
            frequency_steps: 40_000,
            records: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub mu: Vec<f64>,
    /// Accepted deviation of the log-log slope of the distance from 1.
    pub slope_tol: f64,
    /// Accepted relative spread of `|w| / mu`.
    pub ratio_tol: f64,
    /// Run the periodic-orbit check at every sweep point.
    pub verify: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { mu: vec![1e-3, 5e-4, 2.5e-4], slope_tol: 0.15, ratio_tol: 0.2, verify: true }
    }
}

/// Model with its mass resolved; stored in every record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedModel {
    pub model: ModelConfig,
    pub trunc: TruncationParams,
    pub mass: Option<MassConstruction>,
}

impl ResolvedModel {
    pub fn mu(&self) -> f64 {
        match &self.model {
            ModelConfig::Nlw { mu, .. } | ModelConfig::Beam { mu, .. } | ModelConfig::CustomTable { mu, .. } => *mu,
        }
    }

    pub fn with_mu(&self, new_mu: f64) -> Self {
        let mut out = self.clone();
        match &mut out.model {
            ModelConfig::Nlw { mu, .. } | ModelConfig::Beam { mu, .. } | ModelConfig::CustomTable { mu, .. } => {
                *mu = new_mu
            }
        }
        out
    }

    pub fn mass(&self) -> Option<f64> {
        match &self.model {
            ModelConfig::Nlw { m, .. } => *m,
            ModelConfig::Beam { m, .. } => Some(*m),
            ModelConfig::CustomTable { .. } => None,
        }
    }

    pub fn build(&self) -> Result<CommutingSystem> {
        let trunc = self.trunc.clone();
        match &self.model {
            ModelConfig::Nlw { m, mu } => {
                let m = m.ok_or_else(|| Error::InvalidConfig("model.m or [mass] is required".into()))?;
                build_nlw(&NlwConfig { m, mu: *mu, trunc })
            }
            ModelConfig::Beam { m, mu } => build_beam(&BeamConfig { m: *m, mu: *mu, trunc }),
            ModelConfig::CustomTable { mu, omega, g, h, kappa, n, smoothing } => build_table(&TableConfig {
                mu: *mu,
                trunc,
                omega: omega.clone(),
                g: g.clone(),
                h: h.clone(),
                kappa: kappa.clone(),
                n: n.clone(),
                smoothing: *smoothing,
            }),
        }
    }

    /// Closed-form frequencies of the energy flow on the torus with shift `eps`.
    pub fn predicted_frequencies(&self, eps: &[f64]) -> Result<Option<Vec<f64>>> {
        match &self.model {
            ModelConfig::Nlw { m: Some(m), .. } => Ok(Some(torus_frequencies_nlw([eps[0], eps[1]], *m)?.to_vec())),
            ModelConfig::Beam { m, .. } => {
                Ok(Some(torus_frequencies_beam([eps[0], eps[1], eps[2]], *m)?.to_vec()))
            }
            _ => Ok(None),
        }
    }

    /// Converts measured torus-angle rates into the basis of
    /// [`Self::predicted_frequencies`].
    pub fn rates_to_frequencies(&self, rates: &[f64]) -> Vec<f64> {
        match &self.model {
            ModelConfig::Nlw { .. } => nlw_mode_rates_to_frequencies([rates[0], rates[1]]).to_vec(),
            ModelConfig::Beam { .. } => beam_mode_rates_to_frequencies([rates[0], rates[1], rates[2]]).to_vec(),
            ModelConfig::CustomTable { .. } => rates.to_vec(),
        }
    }

    /// Coefficients over `H^(l)` of the energy flow whose frequencies are
    /// predicted.
    pub fn energy_flow(&self) -> Result<Option<Vec<f64>>> {
        match &self.model {
            ModelConfig::Nlw { m: Some(m), .. } => Ok(Some(nlw_k_coefficients(*m)[0].to_vec())),
            ModelConfig::Beam { m, .. } => Ok(Some(beam_k_coefficients(*m)?[0].to_vec())),
            _ => Ok(None),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be a positive number, got {x}")))
            }
        };
        let s = &self.solver;
        positive("solver.range_rtol", s.range_rtol)?;
        positive("solver.kernel_rtol", s.kernel_rtol)?;
        positive("solver.beta_tol", s.beta_tol)?;
        let v = &self.verify;
        positive("verify.max_period_residual", v.max_period_residual)?;
        positive("verify.invariance_factor", v.invariance_factor)?;
        positive("verify.invariance_floor", v.invariance_floor)?;
        positive("verify.frequency_rtol", v.frequency_rtol)?;
        positive("verify.period.drift_budget", v.period.drift_budget)?;
        positive("sweep.slope_tol", self.sweep.slope_tol)?;
        positive("sweep.ratio_tol", self.sweep.ratio_tol)?;
        if s.psi_grid == 0 || s.quad_points == 0 || s.refine == 0 {
            return Err(Error::InvalidConfig("solver grids must be nonempty".into()));
        }
        if let ModelConfig::Nlw { m: Some(_), .. } = self.model {
            if self.mass.is_some() {
                return Err(Error::InvalidConfig("give either model.m or [mass], not both".into()));
            }
        }
        if self.mass.is_some() && !matches!(self.model, ModelConfig::Nlw { .. }) {
            return Err(Error::InvalidConfig("[mass] applies to the nlw model only".into()));
        }
        Ok(())
    }

    /// Resolves the mass (constructing it if requested).
    pub fn resolve(&self) -> Result<ResolvedModel> {
        let mut model = self.model.clone();
        let mass = match (&mut model, &self.mass) {
            (ModelConfig::Nlw { m, .. }, Some(spec)) => {
                let c = construct_mass(spec.target, spec.delta, spec.q, &spec.tail)?;
                *m = Some(c.m);
                Some(c)
            }
            _ => None,
        };
        let out = ResolvedModel { model, trunc: self.trunc.clone(), mass };
        out.build()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [model]
        kind = "nlw"
        mu = 1e-3

        [mass]
        target = 0.3
        delta = 0.05
        q = 8

        [trunc]
        r = 2
        j_min = 1
        j_max = 8
        k_max = 8
        s = 1.0
        sigma = 0.0
        tau = 1.0
        gamma = 0.01
    "#;

    #[test]
    fn parses_and_resolves() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        let res = cfg.resolve().unwrap();
        assert!((res.mass().unwrap() - 0.3).abs() < 1e-6);
        assert_eq!(cfg.solver, SolverParams::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("q = 8", "q = 8\nqq = 1");
        let err = RunConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("qq"), "{err}");
        let bad = format!("{MINIMAL}\n[solver]\nrange_rtl = 1e-3\n");
        assert!(RunConfig::from_toml(&bad).is_err());
        let bad = MINIMAL.replace("mu = 1e-3", "mu = 1e-3\nmass = 2");
        assert!(RunConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        let bad = format!("{MINIMAL}\n[solver]\nbeta_tol = 0.0\n");
        assert!(matches!(RunConfig::from_toml(&bad), Err(Error::InvalidConfig(_))));
    }
}
