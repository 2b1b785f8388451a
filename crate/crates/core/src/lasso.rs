//! Weighted Lasso by cyclic coordinate descent.
//!
//! The objective is
//!
//! ```text
//! ‖y − Xβ‖²/n + λ_init · λ_weight · Σ_j w_j |β_j|
//! ```
//!
//! over a column-normalized design. A weight of `+∞` removes the coordinate
//! from the problem (its coefficient is pinned at zero). Convergence is
//! declared when the KKT certificate's largest violation drops below `tol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist_n_sq, DesignMatrix};

#[derive(Debug, Clone)]
pub struct WeightedLassoProblem<'a> {
    pub design: &'a DesignMatrix,
    pub y: &'a [f64],
    pub lambda_init: f64,
    pub lambda_weight: f64,
    pub weights: Vec<f64>,
}

impl<'a> WeightedLassoProblem<'a> {
    /// Plain Lasso: unit weights, `λ_weight = 1`.
    pub fn lasso(design: &'a DesignMatrix, y: &'a [f64], lambda_init: f64) -> Self {
        WeightedLassoProblem { design, y, lambda_init, lambda_weight: 1.0, weights: vec![1.0; design.p()] }
    }

    pub fn weighted(design: &'a DesignMatrix, y: &'a [f64], lambda_init: f64, lambda_weight: f64, weights: Vec<f64>) -> Self {
        WeightedLassoProblem { design, y, lambda_init, lambda_weight, weights }
    }

    /// Per-coordinate penalty `λ_init λ_weight w_j`; `None` for excluded coordinates.
    pub fn penalty(&self, j: usize) -> Option<f64> {
        let w = self.weights[j];
        if w.is_infinite() {
            None
        } else {
            Some(self.lambda_init * self.lambda_weight * w)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, p) = (self.design.n(), self.design.p());
        if self.y.len() != n {
            return Err(Error::DimensionMismatch(format!("response has length {} but n = {n}", self.y.len())));
        }
        if self.weights.len() != p {
            return Err(Error::DimensionMismatch(format!("{} weights for p = {p}", self.weights.len())));
        }
        if !(self.lambda_init >= 0.0 && self.lambda_init.is_finite()) {
            return Err(Error::InvalidProblem(format!("lambda_init = {} must be finite and >= 0", self.lambda_init)));
        }
        if !(self.lambda_weight > 0.0 && self.lambda_weight.is_finite()) {
            return Err(Error::InvalidProblem(format!("lambda_weight = {} must be finite and > 0", self.lambda_weight)));
        }
        if let Some(j) = self.weights.iter().position(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidProblem(format!("weight {j} is negative or NaN")));
        }
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("response contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn objective(&self, beta: &[f64]) -> f64 {
        let fit = self.design.predict(beta);
        let mut pen = 0.0;
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                pen += self.penalty(j).unwrap_or(f64::INFINITY) * b.abs();
            }
        }
        dist_n_sq(self.y, &fit) + pen
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub warm_start: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 100_000, warm_start: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KktCertificate {
    /// Largest absolute stationarity residual over the non-excluded coordinates.
    pub max_violation: f64,
    /// Subgradient representative: `sign(β_j)` on the active set, a clipped
    /// value in `[−1, 1]` elsewhere.
    pub tau: Vec<f64>,
    /// `2X_jᵀ(Xβ − y)/n + penalty_j τ_j`, zero for excluded coordinates.
    pub stationarity: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub beta: Vec<f64>,
    pub active_set: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt: KktCertificate,
    pub lambda_init: f64,
    pub lambda_weight: f64,
}

impl FitResult {
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged { max_violation: self.kkt.max_violation, iterations: self.iterations })
        }
    }
}

/// Soft-thresholding `sign(z)(|z| − t)₊`; the kink resolves to exactly zero.
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// KKT certificate of `beta`, evaluated from the design directly.
pub fn kkt_residual(problem: &WeightedLassoProblem, beta: &[f64]) -> KktCertificate {
    let d = problem.design;
    let fit = d.predict(beta);
    let resid: Vec<f64> = fit.iter().zip(problem.y).map(|(f, y)| f - y).collect();
    let grad: Vec<f64> = d.xt_scaled(&resid).into_iter().map(|v| 2.0 * v).collect();
    certificate(problem, beta, &grad)
}

fn certificate(problem: &WeightedLassoProblem, beta: &[f64], grad: &[f64]) -> KktCertificate {
    let p = beta.len();
    let mut tau = vec![0.0; p];
    let mut stationarity = vec![0.0; p];
    let mut max_violation: f64 = 0.0;
    for j in 0..p {
        let Some(pen) = problem.penalty(j) else { continue };
        let g = grad[j];
        let t = if beta[j] != 0.0 {
            beta[j].signum()
        } else if pen > 0.0 {
            (-g / pen).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        tau[j] = t;
        stationarity[j] = g + pen * t;
        max_violation = max_violation.max(stationarity[j].abs());
    }
    KktCertificate { max_violation, tau, stationarity }
}

/// Minimizes the weighted Lasso objective by cyclic coordinate descent in
/// ascending coordinate order.
///
/// Non-convergence is not an error here: the result comes back with
/// `converged = false` and the caller decides (see [`FitResult::ensure_converged`]).
pub fn solve(problem: &WeightedLassoProblem, opts: &SolverOptions) -> Result<FitResult> {
    problem.validate()?;
    let d = problem.design;
    let p = d.p();
    let g = d.gram();
    let c = d.xt_scaled(problem.y);
    let pen: Vec<Option<f64>> = (0..p).map(|j| problem.penalty(j)).collect();

    let mut beta = match &opts.warm_start {
        Some(w) if w.len() == p => w.clone(),
        Some(w) => return Err(Error::DimensionMismatch(format!("warm start has length {} for p = {p}", w.len()))),
        None => vec![0.0; p],
    };
    for j in 0..p {
        if pen[j].is_none() {
            beta[j] = 0.0;
        }
    }
    let gram_beta = |beta: &[f64]| -> Vec<f64> {
        (0..p).map(|i| (0..p).map(|k| g[(i, k)] * beta[k]).sum()).collect()
    };
    let mut gb = gram_beta(&beta);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        for j in 0..p {
            let Some(pj) = pen[j] else { continue };
            let gjj = g[(j, j)];
            let z = c[j] - (gb[j] - gjj * beta[j]);
            let new = soft_threshold(z, pj / 2.0) / gjj;
            let delta = new - beta[j];
            if delta != 0.0 {
                for (i, gbi) in gb.iter_mut().enumerate() {
                    *gbi += delta * g[(i, j)];
                }
                beta[j] = new;
            }
        }
        if iterations % 64 == 0 {
            gb = gram_beta(&beta);
        }
        let grad: Vec<f64> = gb.iter().zip(&c).map(|(a, b)| 2.0 * (a - b)).collect();
        if certificate(problem, &beta, &grad).max_violation <= opts.tol {
            let fresh = kkt_residual(problem, &beta);
            if fresh.max_violation <= opts.tol {
                converged = true;
                break;
            }
            gb = gram_beta(&beta);
        }
    }

    let kkt = kkt_residual(problem, &beta);
    if !converged {
        log::warn!("coordinate descent stopped after {iterations} cycles, KKT violation {:e}", kkt.max_violation);
    }
    let active_set = (0..p).filter(|&j| beta[j] != 0.0).collect();
    Ok(FitResult {
        objective: problem.objective(&beta),
        beta,
        active_set,
        iterations,
        converged,
        kkt,
        lambda_init: problem.lambda_init,
        lambda_weight: problem.lambda_weight,
    })
}
