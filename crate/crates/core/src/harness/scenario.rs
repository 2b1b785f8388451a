use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::eigen::ConeSearchConfig;
use crate::error::{Error, Result};
use crate::irrep::example_design;
use crate::linalg::{design_from_gram, normalize_columns, DesignMatrix};
use crate::subsets::mix64;
use crate::two_stage::{lambda_init_from_noise, TuningConstants};
use crate::Mode;

const DESIGN_TAG: u64 = 0xD5;
const NOISE_TAG: u64 = 0x4E;
const MISSPEC_TAG: u64 = 0x3A;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `X = √n [I; 0]`; needs `n ≥ p`.
    Identity,
    /// Gaussian rows with unit variances and common correlation `rho`.
    Equicorrelated { rho: f64 },
    /// Exact Gram `[[I, ρ c₁c₂ᵀ], [ρ c₂c₁ᵀ, I]]` with `c₁ = 1/√s` on the
    /// leading `block` coordinates and `c₂` the first outside coordinate.
    Example {
        rho: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block: Option<usize>,
    },
    /// IID standard normal entries.
    Gaussian,
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::Identity => "identity".into(),
            Family::Equicorrelated { rho } => format!("equicorrelated(rho={rho})"),
            Family::Example { rho, .. } => format!("example(rho={rho})"),
            Family::Gaussian => "gaussian".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaSpec {
    /// Explicit length-`p` coefficients.
    Values { values: Vec<f64> },
    /// `magnitude · decay^k` with alternating signs on the `k`-th support
    /// index. With `seed`, magnitudes are jittered by a factor in
    /// `[0.25, 1.75)` and signs drawn at random.
    Magnitude {
        magnitude: f64,
        #[serde(default = "one")]
        decay: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        support: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ThresholdRule {
    Fixed(f64),
    Named(ThresholdName),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdName {
    /// `c_aa λ_init / φ²(L, S₀, 2s₀)`.
    Aa,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AdaptiveRule {
    Fixed(f64),
    Named(AdaptiveName),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AdaptiveName {
    /// Spectral level of the oracle set.
    Bb,
    /// `c_cc |b⁰|_harm`.
    Cc,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct TuningSpec {
    pub threshold: ThresholdRule,
    pub adaptive: AdaptiveRule,
    #[serde(default)]
    pub constants: TuningConstants,
}

impl Default for TuningSpec {
    fn default() -> Self {
        TuningSpec {
            threshold: ThresholdRule::Named(ThresholdName::Aa),
            adaptive: AdaptiveRule::Named(AdaptiveName::Bb),
            constants: TuningConstants::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    pub s_true: usize,
    pub family: Family,
    #[serde(rename = "beta_true", alias = "beta")]
    pub beta: BetaSpec,
    pub sigma: f64,
    /// `‖v‖ₙ` of a component of `f⁰` orthogonal to all columns.
    #[serde(default)]
    pub misspecification: f64,
    /// Confidence parameter of the default penalty level.
    #[serde(default = "default_t")]
    pub t: f64,
    /// Overrides `4σ√((2t + 2 log p)/n)`; required when `sigma = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_init: Option<f64>,
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Defaults to noiseless when `sigma = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub tuning: TuningSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeSearchConfig>,
}

fn default_t() -> f64 {
    3.0
}

fn default_replications() -> usize {
    100
}

impl ScenarioConfig {
    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(if self.sigma == 0.0 { Mode::Noiseless } else { Mode::Noisy })
    }

    pub fn label(&self) -> String {
        format!("{} n={} p={} s={} sigma={} seed={}", self.family.label(), self.n, self.p, self.s_true, self.sigma, self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidFamily(m));
        if self.n == 0 || self.p == 0 {
            return bad("n and p must be positive".into());
        }
        if self.s_true > self.p {
            return bad(format!("s_true = {} exceeds p = {}", self.s_true, self.p));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma = {} must be finite and >= 0", self.sigma));
        }
        if !(self.misspecification >= 0.0 && self.misspecification.is_finite()) {
            return bad("misspecification must be finite and >= 0".into());
        }
        match &self.family {
            Family::Identity if self.n < self.p => return bad(format!("identity family needs n >= p (n = {}, p = {})", self.n, self.p)),
            Family::Equicorrelated { rho } if !(0.0..1.0).contains(rho) => return bad(format!("rho = {rho} must lie in [0, 1)")),
            Family::Example { rho, block } => {
                if self.n < self.p {
                    return bad(format!("example family needs n >= p (n = {}, p = {})", self.n, self.p));
                }
                if !(0.0..1.0).contains(rho) {
                    return bad(format!("rho = {rho} must lie in [0, 1)"));
                }
                let s = block.unwrap_or(self.s_true);
                if s == 0 || s >= self.p {
                    return bad(format!("example block size {s} must lie in 1..p"));
                }
            }
            _ => {}
        }
        if let BetaSpec::Values { values } = &self.beta {
            if values.len() != self.p {
                return bad(format!("beta has {} values for p = {}", values.len(), self.p));
            }
        }
        if let Some(l) = self.lambda_init {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lambda_init = {l} must be positive"));
            }
        } else if self.sigma == 0.0 {
            return bad("noiseless scenarios need an explicit lambda_init".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub design: DesignMatrix,
    pub beta_true: Vec<f64>,
    pub s_true: Vec<usize>,
    pub f0: Vec<f64>,
    pub lambda_init: f64,
    pub mode: Mode,
}

pub fn generate(cfg: &ScenarioConfig) -> Result<Scenario> {
    cfg.validate()?;
    let (n, p) = (cfg.n, cfg.p);
    let mut rng = ChaCha8Rng::seed_from_u64(mix64([cfg.seed, DESIGN_TAG]));
    let design = match &cfg.family {
        Family::Identity => design_from_gram(&DMatrix::identity(p, p), n)?,
        Family::Equicorrelated { rho } => {
            let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
            let mut raw = DMatrix::zeros(n, p);
            for i in 0..n {
                let common: f64 = rng.sample(StandardNormal);
                for j in 0..p {
                    let z: f64 = rng.sample(StandardNormal);
                    raw[(i, j)] = a * common + b * z;
                }
            }
            normalize_columns(&raw)?
        }
        Family::Example { rho, block } => {
            let s = block.unwrap_or(cfg.s_true);
            let c1 = vec![1.0 / (s as f64).sqrt(); s];
            let mut c2 = vec![0.0; p - s];
            c2[0] = 1.0;
            design_from_gram(&example_design(s, p, *rho, &c1, &c2)?, n)?
        }
        Family::Gaussian => {
            let raw = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
            normalize_columns(&raw)?
        }
    };

    let beta_true = match &cfg.beta {
        BetaSpec::Values { values } => values.clone(),
        BetaSpec::Magnitude { magnitude, decay, support, seed } => {
            let mut brng = seed.map(|s| ChaCha8Rng::seed_from_u64(mix64([s, 0xBE7A])));
            let support = match (support, brng.as_mut()) {
                (Some(s), _) => s.clone(),
                (None, Some(r)) if !matches!(cfg.family, Family::Example { .. }) => {
                    let mut idx: Vec<usize> = rand::seq::index::sample(r, p, cfg.s_true).into_vec();
                    idx.sort_unstable();
                    idx
                }
                _ => (0..cfg.s_true).collect(),
            };
            if support.iter().any(|&j| j >= p) {
                return Err(Error::InvalidFamily("beta support index out of range".into()));
            }
            let mut beta = vec![0.0; p];
            for (k, &j) in support.iter().enumerate() {
                let base = magnitude * decay.powi(k as i32);
                beta[j] = match brng.as_mut() {
                    Some(r) => {
                        let jitter = 0.25 + 1.5 * r.random::<f64>();
                        let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
                        sign * base * jitter
                    }
                    None => if k % 2 == 0 { base } else { -base },
                };
            }
            beta
        }
    };
    let s_true: Vec<usize> = (0..p).filter(|&j| beta_true[j] != 0.0).collect();
    let mut f0 = design.predict(&beta_true);
    if cfg.misspecification > 0.0 {
        let v = orthogonal_direction(&design, mix64([cfg.seed, MISSPEC_TAG]));
        match v {
            Some(v) => f0.iter_mut().zip(&v).for_each(|(f, vi)| *f += cfg.misspecification * vi),
            None => log::warn!("columns span R^n; misspecification is dropped"),
        }
    }
    let lambda_init = match cfg.lambda_init {
        Some(l) => l,
        None => lambda_init_from_noise(cfg.sigma, cfg.t, n, p)?,
    };
    Ok(Scenario { mode: cfg.mode(), config: cfg.clone(), design, beta_true, s_true, f0, lambda_init })
}

/// A vector orthogonal to every column with `‖v‖ₙ = 1`, if one exists.
fn orthogonal_direction(design: &DesignMatrix, seed: u64) -> Option<Vec<f64>> {
    let n = design.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let svd = design.x().clone().svd(true, false);
    let u = svd.u?;
    let tol = 1e-10 * svd.singular_values.max();
    let mut r = z.clone();
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv > tol {
            let col = u.column(k);
            r -= col * col.dot(&z);
        }
    }
    let norm = (r.norm_squared() / n as f64).sqrt();
    (norm > 1e-8).then(|| r.iter().map(|v| v / norm).collect())
}

impl Scenario {
    /// Noise vector of replication `rep`, from the counter-based stream
    /// keyed by `(seed, rep)`.
    pub fn noise(&self, rep: usize) -> Vec<f64> {
        let n = self.design.n();
        if self.config.sigma == 0.0 {
            return vec![0.0; n];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix64([self.config.seed, NOISE_TAG]));
        rng.set_stream(rep as u64);
        (0..n).map(|_| self.config.sigma * rng.sample::<f64, _>(StandardNormal)).collect()
    }

    pub fn response(&self, rep: usize) -> Vec<f64> {
        self.f0.iter().zip(self.noise(rep)).map(|(f, e)| f + e).collect()
    }

    /// `4 max_j |εᵀX_j/n|`; the noise event holds when this is at most `λ_init`.
    pub fn noise_level(&self, noise: &[f64]) -> f64 {
        4.0 * self.design.xt_scaled(noise).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
