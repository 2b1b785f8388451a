//! Two-stage procedures built on an initial Lasso fit: the adaptive Lasso and
//! the thresholded Lasso with least-squares refitting, plus the tuning levels
//! that the theory ties to the spectral quantities of the oracle set.

use serde::{Deserialize, Serialize};

use crate::eigen::{EigenAuditor, EigenReport, EnumMode};
use crate::error::{Error, Result};
use crate::lasso::{solve, FitResult, SolverOptions, WeightedLassoProblem};
use crate::linalg::{ls_refit, DesignMatrix, SubsetProjection};
use crate::Mode;

/// Initial coefficients below this magnitude count as zero.
pub const ZERO_COEF: f64 = 1e-12;
/// Cap applied to finite adaptive weights.
pub const MAX_WEIGHT: f64 = 1e12;

/// `4σ √((2t + 2 log p)/n)`, the penalty level at which the noise event
/// holds with probability at least `1 − 2e^{−t}`.
pub fn lambda_init_from_noise(sigma: f64, t: f64, n: usize, p: usize) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) || !(t > 0.0 && t.is_finite()) || n == 0 || p == 0 {
        return Err(Error::InvalidProblem(format!("need sigma > 0, t > 0, n, p >= 1 (sigma = {sigma}, t = {t}, n = {n}, p = {p})")));
    }
    Ok(4.0 * sigma * ((2.0 * t + 2.0 * (p as f64).ln()) / n as f64).sqrt())
}

/// `w_j = 1/|β_init,j|`, with `+∞` (exclusion) for zero coefficients and a
/// cap at [`MAX_WEIGHT`].
pub fn adaptive_weights(beta_init: &[f64]) -> Vec<f64> {
    beta_init
        .iter()
        .map(|b| if b.abs() < ZERO_COEF { f64::INFINITY } else { (1.0 / b.abs()).min(MAX_WEIGHT) })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TwoStageMethod {
    Adaptive,
    Threshold,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoStageResult {
    pub method: TwoStageMethod,
    pub lambda_init: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_adap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub initial: FitResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<FitResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refit: Option<SubsetProjection>,
    pub selected: Vec<usize>,
    pub beta: Vec<f64>,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Initial Lasso, then the weighted Lasso with `w = 1/|β_init|` and penalty
/// `λ_init λ_adap Σ w_j|β_j|`.
pub fn adaptive_lasso(design: &DesignMatrix, y: &[f64], lambda_init: f64, lambda_adap: f64, opts: &SolverOptions) -> Result<TwoStageResult> {
    let initial = solve(&WeightedLassoProblem::lasso(design, y, lambda_init), opts)?;
    adaptive_from_initial(design, y, initial, lambda_adap, opts)
}

/// Second adaptive stage on a given initial fit.
pub fn adaptive_from_initial(design: &DesignMatrix, y: &[f64], initial: FitResult, lambda_adap: f64, opts: &SolverOptions) -> Result<TwoStageResult> {
    let weights = adaptive_weights(&initial.beta);
    let prob = WeightedLassoProblem::weighted(design, y, initial.lambda_init, lambda_adap, weights);
    let stage2 = solve(&prob, &SolverOptions { warm_start: None, ..opts.clone() })?;
    let mut warnings = Vec::new();
    for (name, fit) in [("initial", &initial), ("adaptive", &stage2)] {
        if !fit.converged {
            warnings.push(format!("{name} stage did not converge (KKT violation {:e})", fit.kkt.max_violation));
        }
    }
    Ok(TwoStageResult {
        method: TwoStageMethod::Adaptive,
        lambda_init: initial.lambda_init,
        lambda_adap: Some(lambda_adap),
        delta: None,
        converged: initial.converged && stage2.converged,
        selected: stage2.active_set.clone(),
        beta: stage2.beta.clone(),
        initial,
        adaptive: Some(stage2),
        refit: None,
        warnings,
    })
}

/// `{j : |β_j| > δ}`.
pub fn threshold_support(beta: &[f64], delta: f64) -> Vec<usize> {
    (0..beta.len()).filter(|&j| beta[j].abs() > delta).collect()
}

/// Keeps coefficients strictly above `delta` and refits by least squares.
pub fn threshold_refit(design: &DesignMatrix, y: &[f64], beta_init: &[f64], delta: f64) -> Result<SubsetProjection> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidProblem(format!("threshold {delta} must be >= 0")));
    }
    ls_refit(design, &threshold_support(beta_init, delta), y)
}

/// Initial Lasso followed by [`threshold_refit`].
pub fn thresholded_lasso(design: &DesignMatrix, y: &[f64], lambda_init: f64, delta: f64, opts: &SolverOptions) -> Result<TwoStageResult> {
    let initial = solve(&WeightedLassoProblem::lasso(design, y, lambda_init), opts)?;
    threshold_from_initial(design, y, initial, delta)
}

pub fn threshold_from_initial(design: &DesignMatrix, y: &[f64], initial: FitResult, delta: f64) -> Result<TwoStageResult> {
    let refit = threshold_refit(design, y, &initial.beta, delta)?;
    let mut warnings = Vec::new();
    if !initial.converged {
        warnings.push(format!("initial stage did not converge (KKT violation {:e})", initial.kkt.max_violation));
    }
    Ok(TwoStageResult {
        method: TwoStageMethod::Threshold,
        lambda_init: initial.lambda_init,
        lambda_adap: None,
        delta: Some(delta),
        converged: initial.converged,
        selected: refit.subset.clone(),
        beta: refit.coefficients.clone(),
        initial,
        adaptive: None,
        refit: Some(refit),
        warnings,
    })
}

/// `|b|_harm = ((1/s) Σ_{j∈S} 1/b_j²)^{−1/2}`.
pub fn harmonic_mean_abs(b: &[f64], s: &[usize]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::InvalidProblem("harmonic mean over an empty set".into()));
    }
    let mut acc = 0.0;
    for &j in s {
        if b[j] == 0.0 {
            return Err(Error::ZeroCoefficient(j));
        }
        acc += 1.0 / (b[j] * b[j]);
    }
    Ok((acc / s.len() as f64).powf(-0.5))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct TuningConstants {
    pub c_aa: f64,
    pub c_bb: f64,
    pub c_cc: f64,
}

impl Default for TuningConstants {
    fn default() -> Self {
        TuningConstants { c_aa: 1.0, c_bb: 1.0, c_cc: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TuningReport {
    pub mode: Mode,
    pub lambda_init: f64,
    pub s0: Vec<usize>,
    /// Superset size used for the spectral constants, `min(2 s₀, p)`.
    pub n_eigen: usize,
    pub constants: TuningConstants,
    /// `φ²(L, S₀, 2s₀)` with `L = 6` (noisy) or `L = 2` (noiseless).
    pub phi_sq: Option<f64>,
    pub phi_min_2: Option<f64>,
    pub phi_min_6: Option<f64>,
    pub lambda_sparse_s0: Option<f64>,
    /// Threshold level `c_aa λ_init / φ²(L, S₀, 2s₀)`.
    pub lambda_thres: Option<f64>,
    /// Adaptive level tied to the oracle spectrum (`BB` noisy, `bb` noiseless).
    pub lambda_adap_bb: Option<f64>,
    /// Unit-constant lower level for the adaptive tuning parameter
    /// (`B` noisy, `b` noiseless).
    pub lambda_adap_b: Option<f64>,
    pub harmonic_mean: Option<f64>,
    /// `c_cc |b⁰|_harm`.
    pub lambda_adap_cc: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Fills an [`EigenReport`] with the quantities [`tuning_conditions`] reads.
pub fn tuning_eigen(auditor: &EigenAuditor, s0: &[usize]) -> Result<EigenReport> {
    let mut rep = EigenReport::default();
    if s0.is_empty() {
        return Ok(rep);
    }
    let n = (2 * s0.len()).min(auditor.p());
    rep.sparse_max.push(auditor.sparse_max(s0.len(), EnumMode::Auto)?);
    for l in [2.0, 6.0] {
        rep.restricted.push(auditor.restricted(l, s0, n)?);
        rep.restricted_min.push(auditor.restricted_min(l, s0, n)?);
    }
    Ok(rep)
}

/// Tuning levels for the thresholded and adaptive Lasso. `b0` enables the
/// harmonic-mean level.
pub fn tuning_conditions(
    mode: Mode,
    lambda_init: f64,
    s0: &[usize],
    b0: Option<&[f64]>,
    eigen: &EigenReport,
    p: usize,
    constants: TuningConstants,
) -> Result<TuningReport> {
    let s0 = crate::linalg::sorted_unique(s0);
    let n = (2 * s0.len()).min(p);
    let mut rep = TuningReport {
        mode,
        lambda_init,
        s0: s0.clone(),
        n_eigen: n,
        constants,
        phi_sq: None,
        phi_min_2: None,
        phi_min_6: None,
        lambda_sparse_s0: None,
        lambda_thres: None,
        lambda_adap_bb: None,
        lambda_adap_b: None,
        harmonic_mean: None,
        lambda_adap_cc: None,
        warnings: vec![],
    };
    if s0.is_empty() {
        rep.warnings.push("oracle set is empty; spectral tuning levels are undefined".into());
        return Ok(rep);
    }
    let phi_sq_at = |l: f64| {
        eigen
            .restricted
            .iter()
            .find(|r| r.l == l && r.set == s0 && r.n == n)
            .map(|r| r.phi_sq)
            .ok_or_else(|| Error::MissingEigenValue(format!("phi({l}, S0, {n})")))
    };
    let phi_min_at = |l: f64| {
        eigen
            .restricted_min
            .iter()
            .find(|r| r.l == l && r.set == s0 && r.n == n)
            .map(|r| r.phi())
            .ok_or_else(|| Error::MissingEigenValue(format!("phi_min({l}, S0, {n})")))
    };
    let ls = eigen
        .sparse_max
        .iter()
        .find(|e| e.n == s0.len())
        .map(|e| e.value)
        .ok_or_else(|| Error::MissingEigenValue(format!("Lambda_sparse({})", s0.len())))?;
    let pm2 = phi_min_at(2.0)?;
    rep.phi_min_2 = Some(pm2);
    rep.lambda_sparse_s0 = Some(ls);
    match mode {
        Mode::Noisy => {
            let phi6 = phi_sq_at(6.0)?;
            let pm6 = phi_min_at(6.0)?;
            rep.phi_sq = Some(phi6);
            rep.phi_min_6 = Some(pm6);
            rep.lambda_thres = Some(constants.c_aa * lambda_init / phi6);
            rep.lambda_adap_bb = Some(constants.c_bb * lambda_init * ls / pm6.powi(3));
            rep.lambda_adap_b = Some(lambda_init * ls / pm2.powi(3));
        }
        Mode::Noiseless => {
            let phi2 = phi_sq_at(2.0)?;
            rep.phi_sq = Some(phi2);
            rep.lambda_thres = Some(constants.c_aa * lambda_init / phi2);
            rep.lambda_adap_bb = Some(constants.c_bb * lambda_init * pm2 * ls / (phi2 * phi2));
            rep.lambda_adap_b = Some(lambda_init * pm2 * ls / (phi2 * phi2));
        }
    }
    if let Some(b0) = b0 {
        let h = harmonic_mean_abs(b0, &s0)?;
        rep.harmonic_mean = Some(h);
        rep.lambda_adap_cc = Some(constants.c_cc * h);
    }
    if mode == Mode::Noisy {
        if let (Some(a), Some(d)) = (rep.lambda_adap_bb, rep.lambda_thres) {
            if a < d {
                rep.warnings.push(format!("lambda_adap = {a} is below the threshold level {d}"));
            }
        }
    }
    for v in [rep.lambda_thres, rep.lambda_adap_bb, rep.lambda_adap_b].into_iter().flatten() {
        if !v.is_finite() {
            rep.warnings.push("a restricted eigenvalue estimate is zero; tuning level is infinite".into());
            break;
        }
    }
    Ok(rep)
}
