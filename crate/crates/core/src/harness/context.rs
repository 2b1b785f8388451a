use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eigen::{ConeSearchConfig, EigenAuditor, EnumMode};
use crate::error::Result;
use crate::harness::scenario::{generate, AdaptiveName, AdaptiveRule, Scenario, ScenarioConfig, ThresholdRule};
use crate::lasso::SolverOptions;
use crate::oracle::{oracle_scalars, oracle_search, OracleScalars, OracleSolution};
use crate::two_stage::{tuning_conditions, tuning_eigen, TuningReport};
use crate::Mode;

/// Design-level spectral quantities that the bound checks read.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Spectral {
    /// `Λ_min(S_true)`.
    pub lambda_min_true: Option<f64>,
    /// `Λ_sparse(s₀)`.
    pub lambda_sparse_s0: Option<f64>,
    /// `φ_sparse(S₀, 2s₀)`, with `2s₀` capped at `p`.
    pub phi_sparse_s0: Option<f64>,
    /// `D(s*, s₀)` at `s* = min(2s₀, p)`; reported, not asserted.
    pub condition_d: Option<f64>,
}

/// Everything about a scenario that does not depend on the noise draw.
pub struct ScenarioContext {
    pub scenario: Scenario,
    pub auditor: Arc<EigenAuditor>,
    pub oracle: OracleSolution,
    pub scalars: OracleScalars,
    pub tuning: TuningReport,
    pub delta: f64,
    pub lambda_adap: f64,
    pub spectral: Spectral,
    pub opts: SolverOptions,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ContextSummary {
    pub label: String,
    pub mode: Mode,
    pub lambda_init: f64,
    pub s_true: Vec<usize>,
    pub s0: Vec<usize>,
    pub bias: f64,
    pub delta_oracle_sq: f64,
    pub delta: f64,
    pub lambda_adap: f64,
    pub spectral: Spectral,
    pub tuning: TuningReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ScenarioContext {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self> {
        let scenario = generate(cfg)?;
        let cone = cfg.cone.clone().unwrap_or_else(ConeSearchConfig::fast);
        let auditor = Arc::new(EigenAuditor::new(scenario.design.gram().clone(), cone));
        Self::with_auditor(scenario, auditor)
    }

    /// Reuses an auditor built on the same Gram matrix, so that memoized
    /// eigen estimates are shared across scenarios with one design.
    pub fn with_auditor(scenario: Scenario, auditor: Arc<EigenAuditor>) -> Result<Self> {
        let cfg = &scenario.config;
        let mode = scenario.mode;
        let lambda = scenario.lambda_init;
        let oracle = oracle_search(&scenario.design, &scenario.f0, &scenario.s_true, lambda, mode, &auditor)?;
        let scalars = oracle_scalars(&oracle, &auditor)?;
        let eig = tuning_eigen(&auditor, &oracle.s0)?;
        let tuning = tuning_conditions(mode, lambda, &oracle.s0, Some(&oracle.b0), &eig, auditor.p(), cfg.tuning.constants)?;
        let mut warnings = tuning.warnings.clone();

        let delta = match cfg.tuning.threshold {
            ThresholdRule::Fixed(d) => d,
            ThresholdRule::Named(_) => match tuning.lambda_thres.filter(|d| d.is_finite()) {
                Some(d) => d,
                None => {
                    warnings.push("threshold level unavailable; using lambda_init".into());
                    lambda
                }
            },
        };
        let lambda_adap = match cfg.tuning.adaptive {
            AdaptiveRule::Fixed(a) => a,
            AdaptiveRule::Named(name) => {
                let level = match name {
                    AdaptiveName::Bb => tuning.lambda_adap_bb,
                    AdaptiveName::Cc => tuning.lambda_adap_cc,
                };
                match level.filter(|a| a.is_finite() && *a > 0.0) {
                    Some(a) => a,
                    None => {
                        warnings.push("adaptive level unavailable; using 1".into());
                        1.0
                    }
                }
            }
        };

        let s0 = &oracle.s0;
        let p = auditor.p();
        let spectral = Spectral {
            lambda_min_true: if scenario.s_true.is_empty() { None } else { Some(auditor.set_extremes(&scenario.s_true)?.0) },
            lambda_sparse_s0: if s0.is_empty() { None } else { Some(auditor.sparse_max(s0.len(), EnumMode::Auto)?.value) },
            phi_sparse_s0: if s0.is_empty() { None } else { Some(auditor.sparse_min(s0, (2 * s0.len()).min(p), EnumMode::Auto)?.value) },
            condition_d: if s0.is_empty() { None } else { Some(auditor.condition_d((2 * s0.len()).min(p), s0)?) },
        };
        for w in &warnings {
            log::warn!("{}: {w}", cfg.label());
        }
        Ok(ScenarioContext {
            scenario,
            auditor,
            oracle,
            scalars,
            tuning,
            delta,
            lambda_adap,
            spectral,
            opts: SolverOptions::default(),
            warnings,
        })
    }

    pub fn lambda_init(&self) -> f64 {
        self.scenario.lambda_init
    }

    pub fn mode(&self) -> Mode {
        self.scenario.mode
    }

    pub fn summary(&self) -> ContextSummary {
        ContextSummary {
            label: self.scenario.config.label(),
            mode: self.mode(),
            lambda_init: self.lambda_init(),
            s_true: self.scenario.s_true.clone(),
            s0: self.oracle.s0.clone(),
            bias: self.oracle.bias,
            delta_oracle_sq: self.scalars.delta_oracle_sq,
            delta: self.delta,
            lambda_adap: self.lambda_adap,
            spectral: self.spectral.clone(),
            tuning: self.tuning.clone(),
            warnings: self.warnings.clone(),
        }
    }
}
