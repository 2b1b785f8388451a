use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{ConeSearchConfig, EigenAuditor};
use crate::error::Result;
use crate::harness::bounds::{verify_bounds, BoundFamily, FamilySummary, VerifyReport};
use crate::harness::context::ScenarioContext;
use crate::harness::scenario::{generate, AdaptiveName, AdaptiveRule, BetaSpec, Family, ScenarioConfig, TuningSpec};
use crate::subsets::mix64;
use crate::Mode;

fn families() -> Vec<Family> {
    vec![
        Family::Identity,
        Family::Equicorrelated { rho: 0.3 },
        Family::Equicorrelated { rho: 0.6 },
        Family::Example { rho: 0.5, block: None },
        Family::Gaussian,
    ]
}

/// Valid `(family, n, p, s)` combinations of the sweep grid.
fn designs() -> Vec<(Family, usize, usize, usize)> {
    let mut out = Vec::new();
    for fam in families() {
        for n in [50, 100] {
            for p in [20, 60] {
                if matches!(fam, Family::Identity | Family::Example { .. }) && n < p {
                    continue;
                }
                for s in [3, 5] {
                    out.push((fam.clone(), n, p, s));
                }
            }
        }
    }
    out
}

fn base(fam: Family, n: usize, p: usize, s: usize, k: usize) -> ScenarioConfig {
    ScenarioConfig {
        n,
        p,
        s_true: s,
        family: fam,
        beta: BetaSpec::Magnitude { magnitude: 10.0, decay: 0.6, support: None, seed: None },
        sigma: 1.0,
        misspecification: 0.0,
        t: 3.0,
        lambda_init: None,
        seed: 1000 + k as u64,
        replications: 8,
        mode: None,
        tuning: TuningSpec::default(),
        cone: None,
    }
}

/// Noisy scenarios over the design grid, with misspecification on every
/// other design.
pub fn noisy_suite(replications: usize) -> Vec<ScenarioConfig> {
    designs()
        .into_iter()
        .enumerate()
        .map(|(k, (fam, n, p, s))| ScenarioConfig {
            replications,
            misspecification: if k % 2 == 1 && n > p { 0.5 } else { 0.0 },
            ..base(fam, n, p, s, k)
        })
        .collect()
}

/// Noiseless scenarios: each design with `beta_seeds` random coefficient
/// vectors of decaying magnitude.
pub fn noiseless_suite(beta_seeds: usize) -> Vec<ScenarioConfig> {
    noiseless_batch(beta_seeds, 0, (4.0, 0.5), 0.5, AdaptiveRule::Named(AdaptiveName::Cc))
}

/// Noiseless scenarios with flat coefficients, most of them between `λ/2`
/// and `2λ`: the Lasso keeps them while the oracle drops them, so both fits
/// often select more than `s₀` variables outside `S₀`.
pub fn overselect_suite(beta_seeds: usize) -> Vec<ScenarioConfig> {
    noiseless_batch(beta_seeds, 100, (1.0, 0.85), 0.5, AdaptiveRule::Fixed(0.1))
}

fn noiseless_batch(beta_seeds: usize, first_seed: u64, (magnitude, decay): (f64, f64), lambda: f64, adaptive: AdaptiveRule) -> Vec<ScenarioConfig> {
    let mut out = Vec::new();
    for (k, (fam, n, p, s)) in designs().into_iter().enumerate() {
        for b in 0..beta_seeds as u64 {
            out.push(ScenarioConfig {
                beta: BetaSpec::Magnitude { magnitude, decay, support: None, seed: Some(first_seed + b) },
                sigma: 0.0,
                lambda_init: Some(lambda),
                replications: 1,
                tuning: TuningSpec { adaptive, ..TuningSpec::default() },
                ..base(fam.clone(), n, p, s, k)
            });
        }
    }
    out
}

pub fn default_suite() -> Vec<ScenarioConfig> {
    let mut v = noisy_suite(64);
    v.extend(noiseless_suite(6));
    v.extend(overselect_suite(16));
    v
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub scenarios: Vec<VerifyReport>,
    pub summary: FamilySummary,
    pub noisy_scenarios: usize,
    pub noiseless_scenarios: usize,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.summary.values().map(|c| c.fail).sum()
    }

    pub fn checked(&self, family: BoundFamily) -> usize {
        self.summary.get(&family).map_or(0, |c| c.checked)
    }
}

fn fingerprint(gram: &nalgebra::DMatrix<f64>, cone: &ConeSearchConfig) -> u64 {
    let cfg = serde_json::to_string(cone).unwrap_or_default();
    mix64(gram.iter().map(|v| v.to_bits()).chain(cfg.bytes().map(u64::from)))
}

/// Verifies every scenario. Scenarios on the same design share one eigen
/// auditor; the report keeps the input order.
pub fn run_suite(configs: &[ScenarioConfig]) -> Result<SuiteReport> {
    let mut groups: Vec<(u64, Vec<usize>)> = Vec::new();
    let mut auditors: HashMap<u64, Arc<EigenAuditor>> = HashMap::new();
    let mut scenarios = Vec::with_capacity(configs.len());
    for (i, cfg) in configs.iter().enumerate() {
        let sc = generate(cfg)?;
        let cone = cfg.cone.clone().unwrap_or_else(ConeSearchConfig::fast);
        let key = fingerprint(sc.design.gram(), &cone);
        auditors.entry(key).or_insert_with(|| Arc::new(EigenAuditor::new(sc.design.gram().clone(), cone)));
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(i),
            None => groups.push((key, vec![i])),
        }
        scenarios.push(Some(sc));
    }
    let mut jobs: Vec<(usize, crate::harness::scenario::Scenario, Arc<EigenAuditor>)> = Vec::new();
    for (key, idx) in &groups {
        for &i in idx {
            jobs.push((i, scenarios[i].take().expect("each scenario used once"), auditors[key].clone()));
        }
    }
    let mut done: Vec<(usize, VerifyReport)> = jobs
        .into_par_iter()
        .map(|(i, sc, aud)| {
            let reps = sc.config.replications;
            let ctx = ScenarioContext::with_auditor(sc, aud)?;
            let (rep, _) = verify_bounds(&ctx, reps)?;
            log::info!("verified {}: {} failures", ctx.scenario.config.label(), rep.failures().len());
            Ok((i, rep))
        })
        .collect::<Result<_>>()?;
    done.sort_by_key(|(i, _)| *i);
    let reports: Vec<VerifyReport> = done.into_iter().map(|(_, r)| r).collect();
    let mut summary = FamilySummary::new();
    for r in &reports {
        for (fam, c) in &r.summary {
            summary.entry(*fam).or_default().merge(c);
        }
    }
    let noisy = reports.iter().filter(|r| r.context.mode == Mode::Noisy).count();
    Ok(SuiteReport { noisy_scenarios: noisy, noiseless_scenarios: reports.len() - noisy, scenarios: reports, summary })
}
