use std::collections::BTreeMap;
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::context::{ContextSummary, ScenarioContext};
use crate::lasso::{solve, FitResult, WeightedLassoProblem};
use crate::linalg::dist_n_sq;
use crate::two_stage::{adaptive_from_initial, threshold_refit};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Metrics {
    /// `‖Xβ̂ − f⁰‖ₙ²`.
    pub prediction: f64,
    pub l1_b0: f64,
    pub l2_b0: f64,
    pub linf_b0: f64,
    pub l1_true: f64,
    pub l2_true: f64,
    /// Selected outside the true support.
    pub false_positives: usize,
    /// True support members not selected.
    pub false_negatives: usize,
    /// Selected outside the oracle set.
    pub false_positives_s0: usize,
    pub support_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FitSummary {
    pub beta: Vec<f64>,
    pub support: Vec<usize>,
    pub converged: bool,
    pub kkt_violation: f64,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReplicationOutcome {
    pub replication: usize,
    /// Whether `4 max_j |εᵀX_j/n| ≤ λ_init`.
    pub event_t: bool,
    pub noise_level: f64,
    pub initial: FitSummary,
    pub adaptive: FitSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_error: Option<String>,
}

pub fn metrics(ctx: &ScenarioContext, beta: &[f64]) -> Metrics {
    let sc = &ctx.scenario;
    let fitted = sc.design.predict(beta);
    let b0 = &ctx.oracle.b0;
    let diff = |b: &[f64], q: f64| -> f64 {
        let s: f64 = beta.iter().zip(b).map(|(x, y)| (x - y).abs().powf(q)).sum();
        s.powf(1.0 / q)
    };
    let support: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
    Metrics {
        prediction: dist_n_sq(&fitted, &sc.f0),
        l1_b0: diff(b0, 1.0),
        l2_b0: diff(b0, 2.0),
        linf_b0: beta.iter().zip(b0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
        l1_true: diff(&sc.beta_true, 1.0),
        l2_true: diff(&sc.beta_true, 2.0),
        false_positives: support.iter().filter(|j| !sc.s_true.contains(j)).count(),
        false_negatives: sc.s_true.iter().filter(|j| !support.contains(j)).count(),
        false_positives_s0: support.iter().filter(|j| !ctx.oracle.s0.contains(j)).count(),
        support_size: support.len(),
    }
}

fn summarize(ctx: &ScenarioContext, fit: &FitResult) -> FitSummary {
    FitSummary {
        beta: fit.beta.clone(),
        support: fit.active_set.clone(),
        converged: fit.converged,
        kkt_violation: fit.kkt.max_violation,
        metrics: metrics(ctx, &fit.beta),
    }
}

/// Draws replication `rep` and fits the initial, adaptive and thresholded Lasso.
pub fn run_replication(ctx: &ScenarioContext, rep: usize) -> Result<ReplicationOutcome> {
    let sc = &ctx.scenario;
    let noise = sc.noise(rep);
    let y: Vec<f64> = sc.f0.iter().zip(&noise).map(|(f, e)| f + e).collect();
    let noise_level = sc.noise_level(&noise);
    let initial = solve(&WeightedLassoProblem::lasso(&sc.design, &y, ctx.lambda_init()), &ctx.opts)?;
    let init_summary = summarize(ctx, &initial);
    let adaptive = adaptive_from_initial(&sc.design, &y, initial.clone(), ctx.lambda_adap, &ctx.opts)?;
    let adap_fit = adaptive.adaptive.as_ref().expect("adaptive stage present");
    let (threshold, threshold_error) = match threshold_refit(&sc.design, &y, &initial.beta, ctx.delta) {
        Ok(refit) => {
            let summary = FitSummary {
                metrics: metrics(ctx, &refit.coefficients),
                beta: refit.coefficients,
                support: refit.subset,
                converged: initial.converged,
                kkt_violation: initial.kkt.max_violation,
            };
            (Some(summary), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ReplicationOutcome {
        replication: rep,
        event_t: noise_level <= ctx.lambda_init(),
        noise_level,
        initial: init_summary,
        adaptive: summarize(ctx, adap_fit),
        threshold,
        threshold_error,
    })
}

/// Replications `0..replications` in parallel; the output is in replication order.
pub fn simulate(ctx: &ScenarioContext, replications: usize) -> Result<Vec<ReplicationOutcome>> {
    (0..replications).into_par_iter().map(|r| run_replication(ctx, r)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub context: ContextSummary,
    pub replications: usize,
    pub event_frequency: f64,
    /// Per method, the mean of each metric.
    pub means: BTreeMap<String, BTreeMap<String, f64>>,
    pub outcomes: Vec<ReplicationOutcome>,
}

pub fn simulation_report(ctx: &ScenarioContext, outcomes: Vec<ReplicationOutcome>) -> SimulationReport {
    let mut means: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (method, pick) in methods() {
        let ms: Vec<Metrics> = outcomes.iter().filter_map(|o| pick(o).map(|f| f.metrics)).collect();
        if ms.is_empty() {
            continue;
        }
        let k = ms.len() as f64;
        let mut row = BTreeMap::new();
        for (name, get) in metric_columns() {
            row.insert(name.to_string(), ms.iter().map(get).sum::<f64>() / k);
        }
        means.insert(method.to_string(), row);
    }
    let events = outcomes.iter().filter(|o| o.event_t).count();
    SimulationReport {
        context: ctx.summary(),
        replications: outcomes.len(),
        event_frequency: if outcomes.is_empty() { f64::NAN } else { events as f64 / outcomes.len() as f64 },
        means,
        outcomes,
    }
}

type Picker = fn(&ReplicationOutcome) -> Option<&FitSummary>;

pub(crate) fn methods() -> [(&'static str, Picker); 3] {
    [("initial", |o| Some(&o.initial)), ("adaptive", |o| Some(&o.adaptive)), ("threshold", |o| o.threshold.as_ref())]
}

pub(crate) fn metric_columns() -> [(&'static str, fn(&Metrics) -> f64); 10] {
    [
        ("prediction", |m| m.prediction),
        ("l1_b0", |m| m.l1_b0),
        ("l2_b0", |m| m.l2_b0),
        ("linf_b0", |m| m.linf_b0),
        ("l1_true", |m| m.l1_true),
        ("l2_true", |m| m.l2_true),
        ("false_positives", |m| m.false_positives as f64),
        ("false_negatives", |m| m.false_negatives as f64),
        ("false_positives_s0", |m| m.false_positives_s0 as f64),
        ("support_size", |m| m.support_size as f64),
    ]
}

/// One CSV row per replication and method.
pub fn write_metrics_csv<W: io::Write>(writer: W, scenario: &str, outcomes: &[ReplicationOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["scenario", "replication", "method", "event_t", "converged"];
    header.extend(metric_columns().iter().map(|(name, _)| *name));
    w.write_record(&header)?;
    for o in outcomes {
        for (method, pick) in methods() {
            if let Some(f) = pick(o) {
                let mut row = vec![scenario.to_string(), o.replication.to_string(), method.to_string(), o.event_t.to_string(), f.converged.to_string()];
                row.extend(metric_columns().iter().map(|(_, get)| format!("{:.16e}", get(&f.metrics))));
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
