//! Column-normalized designs, subset projections and small dense helpers.
//!
//! A [`DesignMatrix`] always carries columns scaled so that the Gram matrix
//! `XᵀX/n` has unit diagonal. Index sets are sorted `Vec<usize>` with 0-based
//! column indices.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest Gram-block eigenvalue accepted by [`project`].
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DesignMatrix {
    x: DMatrix<f64>,
    gram: DMatrix<f64>,
    scales: Vec<f64>,
}

impl DesignMatrix {
    /// Wraps a matrix whose columns already satisfy `‖X_j‖² = n`.
    pub fn from_normalized(x: DMatrix<f64>) -> Self {
        let p = x.ncols();
        let gram = gram_of(&x);
        DesignMatrix { x, gram, scales: vec![1.0; p] }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// `XᵀX/n`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Factors applied to the raw columns during normalization.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn predict(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (o, xij) in out.iter_mut().zip(self.x.column(j).iter()) {
                    *o += b * xij;
                }
            }
        }
        out
    }

    /// `Xᵀv/n`.
    pub fn xt_scaled(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.p())
            .map(|j| dot(self.x.column(j).as_slice(), v) / n)
            .collect()
    }
}

fn gram_of(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows() as f64;
    let mut g = x.transpose() * x;
    g /= n;
    // exact symmetry keeps downstream eigen solves deterministic
    for i in 0..g.nrows() {
        for j in 0..i {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Rescales each column of `raw` to squared norm `n`.
pub fn normalize_columns(raw: &DMatrix<f64>) -> Result<DesignMatrix> {
    let n = raw.nrows();
    if n == 0 || raw.ncols() == 0 {
        return Err(Error::InvalidProblem("design has no rows or no columns".into()));
    }
    let mut x = raw.clone();
    let mut scales = Vec::with_capacity(raw.ncols());
    for j in 0..raw.ncols() {
        let norm = raw.column(j).norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroColumn(j));
        }
        let s = (n as f64).sqrt() / norm;
        x.column_mut(j).scale_mut(s);
        scales.push(s);
    }
    let gram = gram_of(&x);
    Ok(DesignMatrix { x, gram, scales })
}

/// Builds `X = √n [Σ^{1/2}; 0]`, an `n × p` design with Gram matrix exactly `Σ`.
pub fn design_from_gram(sigma: &DMatrix<f64>, n: usize) -> Result<DesignMatrix> {
    let p = sigma.nrows();
    if sigma.ncols() != p {
        return Err(Error::DimensionMismatch("covariance must be square".into()));
    }
    if n < p {
        return Err(Error::InvalidFamily(format!(
            "an exact Gram design needs n >= p (n = {n}, p = {p})"
        )));
    }
    let root = sym_sqrt(sigma)?;
    let mut x = DMatrix::zeros(n, p);
    x.view_mut((0, 0), (p, p)).copy_from(&(root * (n as f64).sqrt()));
    Ok(DesignMatrix::from_normalized(x))
}

/// Symmetric square root of a positive semidefinite matrix.
pub fn sym_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(a.clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.iter().any(|&v| v < -1e-12 * scale) {
        return Err(Error::InvalidProblem("matrix is not positive semidefinite".into()));
    }
    let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&d) * q.transpose())
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SubsetProjection {
    pub subset: Vec<usize>,
    /// Length-`p` coefficients, zero off the subset.
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    /// `‖target − fitted‖²/n`.
    pub residual_norm_sq: f64,
}

/// Least-squares projection of `target` onto the span of the columns in `subset`.
pub fn project(design: &DesignMatrix, subset: &[usize], target: &[f64]) -> Result<SubsetProjection> {
    let (n, p) = (design.n(), design.p());
    if target.len() != n {
        return Err(Error::DimensionMismatch(format!("target has length {} but n = {n}", target.len())));
    }
    let subset = sorted_unique(subset);
    if let Some(&j) = subset.iter().find(|&&j| j >= p) {
        return Err(Error::InvalidProblem(format!("index {j} out of range for p = {p}")));
    }
    let mut coefficients = vec![0.0; p];
    if !subset.is_empty() {
        let g = submatrix(design.gram(), &subset, &subset);
        let min_eig = SymmetricEigen::new(g.clone()).eigenvalues.min();
        if !(min_eig >= RANK_TOL) {
            return Err(Error::RankDeficient { subset, min_eigenvalue: min_eig });
        }
        let xt = design.xt_scaled(target);
        let rhs = DVector::from_iterator(subset.len(), subset.iter().map(|&j| xt[j]));
        let chol = g.cholesky().ok_or(Error::RankDeficient { subset: subset.clone(), min_eigenvalue: min_eig })?;
        let b = chol.solve(&rhs);
        for (k, &j) in subset.iter().enumerate() {
            coefficients[j] = b[k];
        }
    }
    let fitted = design.predict(&coefficients);
    let residual_norm_sq = dist_n_sq(target, &fitted);
    Ok(SubsetProjection { subset, coefficients, fitted, residual_norm_sq })
}

/// Ordinary least-squares refit of `y` on `subset`; same contract as [`project`].
pub fn ls_refit(design: &DesignMatrix, subset: &[usize], y: &[f64]) -> Result<SubsetProjection> {
    project(design, subset, y)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `‖a − b‖²/len`, the empirical squared norm of a difference.
pub fn dist_n_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

pub fn norm_n_sq(a: &[f64]) -> f64 {
    dot(a, a) / a.len() as f64
}

pub fn submatrix(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Smallest and largest eigenvalue of a symmetric matrix (not square-rooted).
pub fn eig_extremes(a: &DMatrix<f64>) -> (f64, f64) {
    if a.nrows() == 0 {
        return (f64::INFINITY, 0.0);
    }
    let e = SymmetricEigen::new(a.clone()).eigenvalues;
    (e.min(), e.max())
}

/// Smallest eigenvalue with a unit eigenvector, sign-normalized so the
/// largest-magnitude entry is positive.
pub fn min_eigenpair(a: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let k = eig.eigenvalues.imin();
    let mut v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
    if v[v.iamax()] < 0.0 {
        v.neg_mut();
    }
    (eig.eigenvalues[k], v)
}

pub fn sorted_unique(s: &[usize]) -> Vec<usize> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn complement(set: &[usize], p: usize) -> Vec<usize> {
    let mut inside = vec![false; p];
    for &j in set {
        inside[j] = true;
    }
    (0..p).filter(|&j| !inside[j]).collect()
}

pub fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|j| b.binary_search(j).is_ok())
}

/// Reads a numeric CSV into a matrix. With `header`, the first line is skipped.
pub fn read_matrix_csv(path: &Path, header: bool) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidProblem(format!("{}: row {} has non-numeric field {s:?}", path.display(), i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::DimensionMismatch(format!("{}: ragged row {}", path.display(), i + 1)));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidProblem(format!("{} is empty", path.display())));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Reads a vector stored either as one column or as one row.
pub fn read_vector_csv(path: &Path, header: bool) -> Result<Vec<f64>> {
    let m = read_matrix_csv(path, header)?;
    if m.ncols() == 1 || m.nrows() == 1 {
        Ok(m.iter().copied().collect())
    } else {
        Err(Error::DimensionMismatch(format!("{} is not a single row or column", path.display())))
    }
}
