#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparse2stage::linalg::{normalize_columns, DesignMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn random_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DesignMatrix {
    normalize_columns(&gaussian_matrix(rng, n, p)).unwrap()
}

/// `√n` times the first `p` columns of an orthogonal matrix, so `XᵀX/n = I`.
pub fn orthonormal_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DesignMatrix {
    let q = gaussian_matrix(rng, n, p).qr().q();
    DesignMatrix::from_normalized(q * (n as f64).sqrt())
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
