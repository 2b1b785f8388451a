mod common;

use approx::assert_abs_diff_eq;
use common::*;
use nalgebra::DMatrix;
use sparse2stage::eigen::{ConeSearchConfig, EigenAuditor};
use sparse2stage::lasso::{soft_threshold, solve, SolverOptions, WeightedLassoProblem};
use sparse2stage::linalg::{design_from_gram, project};
use sparse2stage::two_stage::*;
use sparse2stage::Mode;

fn opts() -> SolverOptions {
    SolverOptions { tol: 1e-10, ..Default::default() }
}

#[test]
fn penalty_level_from_noise() {
    let l = lambda_init_from_noise(1.0, 2.3026, 100, 10).unwrap();
    let direct = 4.0 * ((2.0 * 2.3026 + 2.0 * 10f64.ln()) / 100.0).sqrt();
    assert_abs_diff_eq!(l, direct, epsilon = 1e-15);
    assert_abs_diff_eq!(l, 1.21396, epsilon = 1e-4);
    let p = 50;
    let t = (p as f64).ln();
    assert_abs_diff_eq!(lambda_init_from_noise(1.0, t, p, p).unwrap(), 4.0 * (4.0 * t / p as f64).sqrt(), epsilon = 1e-14);
    assert!(lambda_init_from_noise(0.0, 1.0, 10, 5).is_err());
    assert!(lambda_init_from_noise(1.0, 0.0, 10, 5).is_err());
}

#[test]
fn weights_are_reciprocal_magnitudes() {
    let w = adaptive_weights(&[0.5, 0.0, 2.0]);
    assert_eq!(w[0], 2.0);
    assert!(w[1].is_infinite());
    assert_eq!(w[2], 0.5);
    let mut r = rng(20);
    let d = random_design(&mut r, 30, 8);
    let y = gaussian_vec(&mut r, 30);
    let fit = solve(&WeightedLassoProblem::lasso(&d, &y, 0.3), &opts()).unwrap();
    let w = adaptive_weights(&fit.beta);
    for j in 0..8 {
        if fit.beta[j] != 0.0 {
            assert_abs_diff_eq!(1.0 / w[j], fit.beta[j].abs(), epsilon = 1e-14 * fit.beta[j].abs().max(1.0));
        } else {
            assert!(w[j].is_infinite());
        }
    }
}

#[test]
fn empty_initial_fit_gives_zero_adaptive_fit() {
    let mut r = rng(21);
    let d = random_design(&mut r, 20, 5);
    let y = gaussian_vec(&mut r, 20);
    let res = adaptive_lasso(&d, &y, 100.0, 1.0, &opts()).unwrap();
    assert!(res.initial.active_set.is_empty());
    assert!(res.beta.iter().all(|&b| b == 0.0));
    assert!(res.selected.is_empty());
}

#[test]
fn orthonormal_adaptive_is_separable() {
    let mut r = rng(22);
    let d = orthonormal_design(&mut r, 16, 6);
    let y = gaussian_vec(&mut r, 16);
    let (lam, la) = (0.3, 0.2);
    let res = adaptive_lasso(&d, &y, lam, la, &opts()).unwrap();
    let z = d.xt_scaled(&y);
    for j in 0..6 {
        let init = soft_threshold(z[j], lam / 2.0);
        let expect = if init == 0.0 { 0.0 } else { soft_threshold(z[j], lam * la / init.abs() / 2.0) };
        assert_abs_diff_eq!(res.beta[j], expect, epsilon = 1e-9);
    }
}

#[test]
fn huge_adaptive_level_gives_zero() {
    let mut r = rng(23);
    let d = random_design(&mut r, 20, 5);
    let y = gaussian_vec(&mut r, 20);
    let res = adaptive_lasso(&d, &y, 0.1, 1e8, &opts()).unwrap();
    assert!(res.beta.iter().all(|&b| b == 0.0));
}

#[test]
fn adaptive_equals_weighted_solve_with_precomputed_weights() {
    let mut r = rng(24);
    let d = random_design(&mut r, 10, 5);
    let y = gaussian_vec(&mut r, 10);
    let (lam, la) = (0.2, 0.5);
    let res = adaptive_lasso(&d, &y, lam, la, &opts()).unwrap();
    let init = solve(&WeightedLassoProblem::lasso(&d, &y, lam), &opts()).unwrap();
    let w: Vec<f64> = init.beta.iter().map(|b| if *b == 0.0 { f64::INFINITY } else { 1.0 / b.abs() }).collect();
    let direct = solve(&WeightedLassoProblem::weighted(&d, &y, lam, la, w), &opts()).unwrap();
    assert!(max_abs_diff(&res.beta, &direct.beta) <= 1e-8);
    assert!(res.selected.iter().all(|j| res.initial.active_set.contains(j)));
}

#[test]
fn strict_threshold_support() {
    assert_eq!(threshold_support(&[0.5, -0.2, 0.0], 0.3), vec![0]);
    assert_eq!(threshold_support(&[0.5, -0.2, 0.0], 0.5), Vec::<usize>::new());
    assert_eq!(threshold_support(&[0.5, -0.2, 0.0], 0.0), vec![0, 1]);
}

#[test]
fn threshold_above_sup_norm_gives_zero_fit() {
    let mut r = rng(25);
    let d = random_design(&mut r, 12, 4);
    let y = gaussian_vec(&mut r, 12);
    let beta = [0.4, -0.9, 0.0, 0.1];
    let pr = threshold_refit(&d, &y, &beta, 0.9).unwrap();
    assert!(pr.subset.is_empty());
    assert!(pr.fitted.iter().all(|&v| v == 0.0));
    assert!(threshold_refit(&d, &y, &beta, -0.1).is_err());
}

#[test]
fn zero_threshold_refit_is_projection_on_lasso_support() {
    let mut r = rng(26);
    let d = orthonormal_design(&mut r, 12, 5);
    let y = d.predict(&[3.0, 0.0, -2.0, 0.0, 1.0]);
    let res = thresholded_lasso(&d, &y, 0.5, 0.0, &opts()).unwrap();
    assert_eq!(res.selected, vec![0, 2, 4]);
    let pr = project(&d, &[0, 2, 4], &y).unwrap();
    assert!(max_abs_diff(&res.refit.as_ref().unwrap().fitted, &pr.fitted) <= 1e-12);
    assert!(max_abs_diff(&res.beta, &[3.0, 0.0, -2.0, 0.0, 1.0]) <= 1e-9);
}

#[test]
fn identity_gram_tuning_levels_are_the_constants() {
    let d = design_from_gram(&DMatrix::identity(4, 4), 4).unwrap();
    let a = EigenAuditor::new(d.gram().clone(), ConeSearchConfig::default());
    let eig = tuning_eigen(&a, &[2]).unwrap();
    let c = TuningConstants { c_aa: 1.5, c_bb: 2.5, c_cc: 0.5 };
    let b0 = [0.0, 0.0, -3.0, 0.0];
    let rep = tuning_conditions(Mode::Noisy, 0.4, &[2], Some(&b0), &eig, 4, c).unwrap();
    assert_abs_diff_eq!(rep.lambda_thres.unwrap(), 1.5 * 0.4, epsilon = 1e-9);
    assert_abs_diff_eq!(rep.lambda_adap_bb.unwrap(), 2.5 * 0.4, epsilon = 1e-9);
    assert_abs_diff_eq!(rep.harmonic_mean.unwrap(), 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(rep.lambda_adap_cc.unwrap(), 1.5, epsilon = 1e-15);
}

#[test]
fn example_design_tuning_recomposes_from_eigen_outputs() {
    let g = sparse2stage::irrep::example_design(2, 5, 0.5, &[0.6, 0.8], &[1.0, 0.0, 0.0]).unwrap();
    let a = EigenAuditor::new(g, ConeSearchConfig::default());
    let s0 = [0, 1];
    let eig = tuning_eigen(&a, &s0).unwrap();
    let b0 = [1.0, -2.0, 0.0, 0.0, 0.0];
    let rep = tuning_conditions(Mode::Noisy, 0.3, &s0, Some(&b0), &eig, 5, TuningConstants::default()).unwrap();
    let phi6 = a.restricted(6.0, &s0, 4).unwrap().phi_sq;
    let pm6 = a.restricted_min(6.0, &s0, 4).unwrap().phi();
    let ls = a.sparse_max(2, sparse2stage::eigen::EnumMode::Exact).unwrap().value;
    assert_abs_diff_eq!(rep.lambda_thres.unwrap(), 0.3 / phi6, epsilon = 1e-12);
    assert_abs_diff_eq!(rep.lambda_adap_bb.unwrap(), 0.3 * ls / pm6.powi(3), epsilon = 1e-12);
    // ((1 + 1/4)/2)^(-1/2)
    assert_abs_diff_eq!(rep.harmonic_mean.unwrap(), (0.625f64).powf(-0.5), epsilon = 1e-14);
    assert!(rep.harmonic_mean.unwrap() <= 2.0);
}

#[test]
fn harmonic_mean_cases() {
    assert_abs_diff_eq!(harmonic_mean_abs(&[2.0, 2.0], &[0, 1]).unwrap(), 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(harmonic_mean_abs(&[1.0, 1.0 / 3.0], &[0, 1]).unwrap(), 0.4472135955, epsilon = 1e-10);
    assert_abs_diff_eq!(harmonic_mean_abs(&[1.0; 7], &[0, 2, 4, 6]).unwrap(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(harmonic_mean_abs(&[0.0, -4.0], &[1]).unwrap(), 4.0, epsilon = 1e-15);
    assert!(harmonic_mean_abs(&[1.0], &[]).is_err());
}

#[test]
fn empty_oracle_set_has_no_spectral_levels() {
    let a = EigenAuditor::new(DMatrix::identity(3, 3), ConeSearchConfig::fast());
    let eig = tuning_eigen(&a, &[]).unwrap();
    let rep = tuning_conditions(Mode::Noiseless, 0.1, &[], None, &eig, 3, TuningConstants::default()).unwrap();
    assert!(rep.lambda_thres.is_none() && rep.lambda_adap_bb.is_none());
    assert!(!rep.warnings.is_empty());
}

#[test]
fn missing_eigen_values_are_reported() {
    let eig = sparse2stage::eigen::EigenReport::default();
    let err = tuning_conditions(Mode::Noisy, 0.1, &[0], None, &eig, 3, TuningConstants::default()).unwrap_err();
    assert!(matches!(err, sparse2stage::Error::MissingEigenValue(_)));
}
