//! Weighted irrepresentable condition.
//!
//! For a set `S` with Gram blocks `Σ₁₁ = Σ_SS`, `Σ₂₁ = Σ_{Sᶜ S}` and positive
//! weights `w`, the measure is
//!
//! ```text
//! sup_{‖τ‖_∞ ≤ 1} ‖W_{Sᶜ}⁻¹ Σ₂₁ Σ₁₁⁻¹ W_S τ‖_∞,
//! ```
//!
//! the largest row `ℓ₁` norm of `W_{Sᶜ}⁻¹ Σ₂₁ Σ₁₁⁻¹ W_S`. The condition holds
//! when it is below one, and then a noiseless weighted Lasso on a linear
//! target supported on `S` selects no variable outside `S`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complement, dot, sorted_unique, submatrix};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IrrepReport {
    pub set: Vec<usize>,
    pub measure: f64,
    pub condition_holds: bool,
    /// `‖w_S‖₂`.
    pub weight_norm_s: f64,
    /// `min_{j∉S} w_j`.
    pub weight_min_out: f64,
    pub lambda_min_s: f64,
    /// `‖w_S‖₂ < Λ_min(S) min_{Sᶜ} w`, sufficient for the condition.
    pub sufficient_holds: bool,
    /// Multi-start estimate (from below) of the adaptive restricted regression.
    pub theta_adaptive: f64,
    /// `√|S| / Λ_min(S)`, an upper bound for it.
    pub theta_bound: f64,
}

/// Row-wise matrix `W_{Sᶜ}⁻¹ Σ₂₁ Σ₁₁⁻¹ W_S`; rows follow the sorted complement.
pub fn irrep_matrix(gram: &DMatrix<f64>, s: &[usize], w: &[f64]) -> Result<DMatrix<f64>> {
    let p = gram.nrows();
    let s = sorted_unique(s);
    if w.len() != p {
        return Err(Error::DimensionMismatch(format!("{} weights for p = {p}", w.len())));
    }
    if s.is_empty() || s.len() >= p {
        return Err(Error::InvalidProblem("the set and its complement must both be non-empty".into()));
    }
    for &j in &s {
        if !(w[j] > 0.0 && w[j].is_finite()) {
            return Err(Error::InvalidProblem(format!("weight {j} on the set must be positive and finite")));
        }
    }
    if let Some(j) = w.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::InvalidProblem(format!("weight {j} must be positive")));
    }
    let sc = complement(&s, p);
    let s11 = submatrix(gram, &s, &s);
    let s21 = submatrix(gram, &sc, &s);
    let chol = s11.cholesky().ok_or(Error::SingularBlock)?;
    let ws = DMatrix::from_diagonal(&DVector::from_iterator(s.len(), s.iter().map(|&j| w[j])));
    let core = s21 * chol.inverse() * ws;
    Ok(DMatrix::from_fn(sc.len(), s.len(), |i, k| core[(i, k)] / w[sc[i]]))
}

/// Largest row `ℓ₁` norm of [`irrep_matrix`].
pub fn irrep_measure(gram: &DMatrix<f64>, s: &[usize], w: &[f64]) -> Result<f64> {
    let m = irrep_matrix(gram, s, w)?;
    Ok((0..m.nrows()).map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max))
}

pub fn irrep_report(gram: &DMatrix<f64>, s: &[usize], w: &[f64]) -> Result<IrrepReport> {
    let s = sorted_unique(s);
    let measure = irrep_measure(gram, &s, w)?;
    let sc = complement(&s, gram.nrows());
    let weight_norm_s = s.iter().map(|&j| w[j] * w[j]).sum::<f64>().sqrt();
    let weight_min_out = sc.iter().map(|&j| w[j]).fold(f64::INFINITY, f64::min);
    let lmin = SymmetricEigen::new(submatrix(gram, &s, &s)).eigenvalues.min().max(0.0).sqrt();
    Ok(IrrepReport {
        measure,
        condition_holds: measure < 1.0,
        weight_norm_s,
        weight_min_out,
        lambda_min_s: lmin,
        sufficient_holds: weight_norm_s < lmin * weight_min_out,
        theta_adaptive: theta_adaptive(gram, &s)?,
        theta_bound: (s.len() as f64).sqrt() / lmin,
        set: s,
    })
}

/// `max_u √|S| ‖u‖₂ ‖Σ₂₁u‖_∞ / (uᵀΣ₁₁u)`, by multi-start ascent per row of `Σ₂₁`.
pub fn theta_adaptive(gram: &DMatrix<f64>, s: &[usize]) -> Result<f64> {
    let p = gram.nrows();
    let s = sorted_unique(s);
    let sc = complement(&s, p);
    if s.is_empty() {
        return Err(Error::InvalidProblem("empty set".into()));
    }
    let s11 = submatrix(gram, &s, &s);
    let chol = s11.clone().cholesky().ok_or(Error::SingularBlock)?;
    let eig = SymmetricEigen::new(s11.clone());
    let k = s.len();
    let ratio = |a: &[f64], u: &[f64]| -> f64 {
        let su: Vec<f64> = (0..k).map(|i| (0..k).map(|t| s11[(i, t)] * u[t]).sum()).collect();
        dot(a, u).abs() * dot(u, u).sqrt() / dot(u, &su)
    };
    let mut best: f64 = 0.0;
    for &j in &sc {
        let a: Vec<f64> = s.iter().map(|&i| gram[(j, i)]).collect();
        let mut starts: Vec<Vec<f64>> = vec![a.clone(), chol.solve(&DVector::from_column_slice(&a)).iter().copied().collect()];
        for c in 0..k {
            starts.push(eig.eigenvectors.column(c).iter().copied().collect());
        }
        for mut u in starts {
            if dot(&u, &u) == 0.0 {
                continue;
            }
            let mut f = ratio(&a, &u);
            let mut h = 0.1;
            // coordinate pattern search; the ratio is scale invariant
            for _ in 0..400 {
                let mut moved = false;
                for c in 0..k {
                    for sgn in [1.0, -1.0] {
                        let mut v = u.clone();
                        let norm = dot(&u, &u).sqrt();
                        v[c] += sgn * h * norm;
                        let fv = ratio(&a, &v);
                        if fv > f {
                            u = v;
                            f = fv;
                            moved = true;
                        }
                    }
                }
                if !moved {
                    h *= 0.5;
                    if h < 1e-10 {
                        break;
                    }
                }
            }
            if f.is_finite() {
                best = best.max(f);
            }
        }
    }
    Ok((k as f64).sqrt() * best)
}

/// Gram matrix `[[I, ρ c₁c₂ᵀ], [ρ c₂c₁ᵀ, I]]` with the first `s` coordinates
/// forming the block `S`. Its spectrum is `{1 − ρ, 1, 1 + ρ}`.
pub fn example_design(s: usize, p: usize, rho: f64, c1: &[f64], c2: &[f64]) -> Result<DMatrix<f64>> {
    if s == 0 || s >= p {
        return Err(Error::InvalidFamily(format!("need 0 < s < p (s = {s}, p = {p})")));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidFamily(format!("rho = {rho} must lie in [0, 1)")));
    }
    if c1.len() != s || c2.len() != p - s {
        return Err(Error::DimensionMismatch("c1 must have length s and c2 length p - s".into()));
    }
    for (name, c) in [("c1", c1), ("c2", c2)] {
        let norm = dot(c, c).sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidUnitVector(format!("{name} has norm {norm}")));
        }
    }
    let mut g = DMatrix::identity(p, p);
    for i in 0..p - s {
        for k in 0..s {
            let v = rho * c2[i] * c1[k];
            g[(s + i, k)] = v;
            g[(k, s + i)] = v;
        }
    }
    Ok(g)
}

/// The worst case for given weights: `c₁ = w_S/‖w_S‖`, `c₂` the indicator of
/// the smallest weight outside `S` (first on ties). Here `S = {0, …, s−1}`.
pub fn worst_case_design(s: usize, p: usize, rho: f64, w: &[f64]) -> Result<DMatrix<f64>> {
    if w.len() != p || s == 0 || s >= p {
        return Err(Error::DimensionMismatch(format!("{} weights for p = {p}, s = {s}", w.len())));
    }
    let norm = w[..s].iter().map(|v| v * v).sum::<f64>().sqrt();
    let c1: Vec<f64> = w[..s].iter().map(|v| v / norm).collect();
    let mut arg = s;
    for j in s..p {
        if w[j] < w[arg] {
            arg = j;
        }
    }
    let mut c2 = vec![0.0; p - s];
    c2[arg - s] = 1.0;
    example_design(s, p, rho, &c1, &c2)
}

/// True when a measure below one coexists with a selection outside `s`.
pub fn false_positive_violation(selected: &[usize], s: &[usize], measure: f64) -> bool {
    measure < 1.0 && selected.iter().any(|j| !s.contains(j))
}
