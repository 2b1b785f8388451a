use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::context::ScenarioContext;
use crate::harness::scenario::ScenarioConfig;
use crate::harness::simulate::{methods, simulate, Metrics};
use crate::two_stage::lambda_init_from_noise;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TuningConstant {
    CAa,
    CBb,
    CCc,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sweep {
    SampleSize { values: Vec<usize> },
    /// Multiples of the default penalty level.
    Lambda { multipliers: Vec<f64> },
    Constant { which: TuningConstant, values: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DashboardRow {
    pub sweep_value: f64,
    pub lambda_init: f64,
    pub s0: usize,
    pub method: String,
    pub metric: String,
    pub mean: f64,
    pub rate: f64,
    /// `mean / rate`; roughly flat across the sweep when the rate is right.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Dashboard {
    pub base: ScenarioConfig,
    pub sweep: Sweep,
    pub replications: usize,
    pub rows: Vec<DashboardRow>,
}

fn rates() -> [(&'static str, fn(&Metrics) -> f64, fn(f64, f64) -> f64); 4] {
    [
        ("prediction", |m| m.prediction, |l, s| l * l * s),
        ("l1_b0", |m| m.l1_b0, |l, s| l * s),
        ("l2_b0", |m| m.l2_b0, |l, s| l * s.sqrt()),
        ("false_positives_s0", |m| m.false_positives_s0 as f64, |_, s| s),
    ]
}

/// Mean errors against their nominal rates along a one-parameter sweep.
/// Reported only; nothing is asserted.
pub fn dashboard(base: &ScenarioConfig, sweep: &Sweep, replications: usize) -> Result<Dashboard> {
    let points: Vec<(f64, ScenarioConfig)> = match sweep {
        Sweep::SampleSize { values } => values.iter().map(|&n| (n as f64, ScenarioConfig { n, ..base.clone() })).collect(),
        Sweep::Lambda { multipliers } => {
            let l0 = match base.lambda_init {
                Some(l) => l,
                None => lambda_init_from_noise(base.sigma, base.t, base.n, base.p)?,
            };
            multipliers.iter().map(|&m| (m, ScenarioConfig { lambda_init: Some(l0 * m), ..base.clone() })).collect()
        }
        Sweep::Constant { which, values } => values
            .iter()
            .map(|&v| {
                let mut c = base.clone();
                match which {
                    TuningConstant::CAa => c.tuning.constants.c_aa = v,
                    TuningConstant::CBb => c.tuning.constants.c_bb = v,
                    TuningConstant::CCc => c.tuning.constants.c_cc = v,
                }
                (v, c)
            })
            .collect(),
    };
    let mut rows = Vec::new();
    for (value, cfg) in points {
        let ctx = ScenarioContext::build(&cfg)?;
        let outcomes = simulate(&ctx, replications)?;
        let lam = ctx.lambda_init();
        let s0 = ctx.oracle.s0.len();
        for (method, pick) in methods() {
            let ms: Vec<Metrics> = outcomes.iter().filter_map(|o| pick(o).map(|f| f.metrics)).collect();
            if ms.is_empty() {
                continue;
            }
            for (metric, get, rate) in rates() {
                let mean = ms.iter().map(get).sum::<f64>() / ms.len() as f64;
                let r = if s0 == 0 { f64::NAN } else { rate(lam, s0 as f64) };
                rows.push(DashboardRow { sweep_value: value, lambda_init: lam, s0, method: method.into(), metric: metric.into(), mean, rate: r, ratio: mean / r });
            }
        }
    }
    Ok(Dashboard { base: base.clone(), sweep: sweep.clone(), replications, rows })
}
