mod common;

use approx::assert_abs_diff_eq;
use common::*;
use sparse2stage::lasso::*;
use sparse2stage::linalg::dot;

fn opts() -> SolverOptions {
    SolverOptions { tol: 1e-10, ..Default::default() }
}

#[test]
fn large_penalty_gives_zero() {
    let mut r = rng(10);
    let d = random_design(&mut r, 20, 6);
    let y = gaussian_vec(&mut r, 20);
    let xty = d.xt_scaled(&y);
    let lam = 2.0 * xty.iter().fold(0.0f64, |m, v| m.max(v.abs())) / 0.5;
    let w = vec![0.5, 1.0, 2.0, 0.7, 3.0, 1.0];
    let fit = solve(&WeightedLassoProblem::weighted(&d, &y, lam, 1.0, w), &opts()).unwrap();
    assert!(fit.beta.iter().all(|&b| b == 0.0));
    assert!(fit.active_set.is_empty());
}

#[test]
fn orthonormal_design_soft_thresholds() {
    let mut r = rng(11);
    let d = orthonormal_design(&mut r, 12, 5);
    let y = gaussian_vec(&mut r, 12);
    let lam = 0.6;
    let fit = solve(&WeightedLassoProblem::lasso(&d, &y, lam), &opts()).unwrap();
    let z = d.xt_scaled(&y);
    for j in 0..5 {
        assert_abs_diff_eq!(fit.beta[j], soft_threshold(z[j], lam / 2.0), epsilon = 1e-10);
    }
}

#[test]
fn soft_threshold_values() {
    assert_eq!(soft_threshold(3.0, 1.0), 2.0);
    assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
    assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    assert_eq!(soft_threshold(1.0, 1.0), 0.0);
}

/// Coarse grid, then repeated local refinement down to step 1e-4.
fn grid_minimizer(prob: &WeightedLassoProblem, center: &[f64], radius: f64) -> Vec<f64> {
    let p = center.len();
    let mut best = center.to_vec();
    let mut best_f = prob.objective(&best);
    let mut step = radius / 10.0;
    while step >= 1e-4 {
        let mut improved = true;
        while improved {
            improved = false;
            let base = best.clone();
            let k = 3usize.pow(p as u32);
            for code in 0..k {
                let mut c = code;
                let mut cand = base.clone();
                for v in cand.iter_mut() {
                    *v += (c % 3) as f64 * step - step;
                    c /= 3;
                }
                let f = prob.objective(&cand);
                if f < best_f - 1e-15 {
                    best_f = f;
                    best = cand;
                    improved = true;
                }
            }
        }
        step /= 2.0;
    }
    // snap to exact zeros the grid passes through
    for j in 0..p {
        let mut z = best.clone();
        z[j] = 0.0;
        if prob.objective(&z) <= best_f {
            best_f = prob.objective(&z);
            best = z;
        }
    }
    best
}

#[test]
fn small_instance_matches_grid_refinement() {
    let mut r = rng(12);
    let d = random_design(&mut r, 6, 3);
    let y = gaussian_vec(&mut r, 6);
    let prob = WeightedLassoProblem::lasso(&d, &y, 0.5);
    let fit = solve(&prob, &opts()).unwrap();
    let grid = grid_minimizer(&prob, &[0.0; 3], 4.0);
    assert!(max_abs_diff(&fit.beta, &grid) <= 1e-3, "{:?} vs {:?}", fit.beta, grid);
    assert!(fit.objective <= prob.objective(&grid) + 1e-9);
}

#[test]
fn kkt_of_zero_vector() {
    let mut r = rng(13);
    let d = random_design(&mut r, 15, 4);
    let y = gaussian_vec(&mut r, 15);
    let lam = 1e-3;
    let prob = WeightedLassoProblem::lasso(&d, &y, lam);
    let cert = kkt_residual(&prob, &[0.0; 4]);
    let expect = d.xt_scaled(&y).iter().map(|v| 2.0 * v.abs() - lam).fold(f64::MIN, f64::max);
    assert_abs_diff_eq!(cert.max_violation, expect, epsilon = 1e-12);
    assert!(cert.max_violation > 0.0);
}

#[test]
fn kkt_residual_matches_direct_gradient() {
    let mut r = rng(14);
    let (n, p) = (5, 4);
    let d = random_design(&mut r, n, p);
    let y = gaussian_vec(&mut r, n);
    let beta = vec![0.7, 0.0, -0.4, 0.0];
    let w = vec![1.0, 2.0, 0.5, 1.5];
    let (lam, lw) = (0.3, 1.2);
    let prob = WeightedLassoProblem::weighted(&d, &y, lam, lw, w.clone());
    let cert = kkt_residual(&prob, &beta);
    let fit = d.predict(&beta);
    let res: Vec<f64> = fit.iter().zip(&y).map(|(f, v)| f - v).collect();
    for j in (0..p).filter(|&j| beta[j] != 0.0) {
        let col: Vec<f64> = d.x().column(j).iter().copied().collect();
        let grad = 2.0 * dot(&col, &res) / n as f64;
        assert_abs_diff_eq!(cert.stationarity[j], grad + lam * lw * w[j] * beta[j].signum(), epsilon = 1e-12);
    }
    let direct = (0..p)
        .map(|j| {
            let col: Vec<f64> = d.x().column(j).iter().copied().collect();
            let g = 2.0 * dot(&col, &res) / n as f64;
            let pen = lam * lw * w[j];
            if beta[j] != 0.0 { (g + pen * beta[j].signum()).abs() } else { (g.abs() - pen).max(0.0) }
        })
        .fold(0.0, f64::max);
    assert_abs_diff_eq!(cert.max_violation, direct, epsilon = 1e-12);
}

#[test]
fn zero_weight_is_unpenalized_and_infinite_weight_excluded() {
    let mut r = rng(15);
    let d = random_design(&mut r, 30, 5);
    let beta_true = [2.0, 0.0, -1.0, 0.0, 0.5];
    let y: Vec<f64> = d.predict(&beta_true).iter().zip(gaussian_vec(&mut r, 30)).map(|(f, e)| f + 0.3 * e).collect();
    let w = vec![0.0, 1.0, 1.0, 1.0, f64::INFINITY];
    let fit = solve(&WeightedLassoProblem::weighted(&d, &y, 0.4, 1.0, w), &opts()).unwrap();
    assert_eq!(fit.beta[4], 0.0);
    // the unpenalized coordinate solves its own normal equation
    assert!(fit.kkt.stationarity[0].abs() <= 1e-8);
    assert!(fit.beta[0] != 0.0);
    assert!(fit.converged);
}

#[test]
fn product_of_penalty_scales_is_what_matters() {
    let mut r = rng(16);
    let d = random_design(&mut r, 25, 8);
    let y = gaussian_vec(&mut r, 25);
    let w: Vec<f64> = (0..8).map(|j| 0.5 + 0.2 * j as f64).collect();
    let a = solve(&WeightedLassoProblem::weighted(&d, &y, 0.4, 1.0, w.clone()), &opts()).unwrap();
    let b = solve(&WeightedLassoProblem::weighted(&d, &y, 0.8, 0.5, w), &opts()).unwrap();
    assert!(max_abs_diff(&a.beta, &b.beta) <= 1e-8);
}

#[test]
fn invalid_problems_are_rejected() {
    let mut r = rng(17);
    let d = random_design(&mut r, 6, 3);
    let y = gaussian_vec(&mut r, 6);
    let bad = [
        WeightedLassoProblem::weighted(&d, &y, -1.0, 1.0, vec![1.0; 3]),
        WeightedLassoProblem::weighted(&d, &y, 1.0, 0.0, vec![1.0; 3]),
        WeightedLassoProblem::weighted(&d, &y, 1.0, 1.0, vec![1.0, -1.0, 1.0]),
        WeightedLassoProblem::weighted(&d, &y, 1.0, 1.0, vec![1.0; 2]),
    ];
    for prob in &bad {
        let e = solve(prob, &opts()).unwrap_err();
        assert_eq!(e.exit_code(), 2, "{e}");
    }
    let short = &y[..5];
    assert!(solve(&WeightedLassoProblem::lasso(&d, short, 1.0), &opts()).is_err());
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let mut r = rng(18);
    let d = random_design(&mut r, 40, 20);
    let y = gaussian_vec(&mut r, 40);
    let fit = solve(&WeightedLassoProblem::lasso(&d, &y, 0.01), &SolverOptions { tol: 1e-14, max_iter: 1, warm_start: None }).unwrap();
    assert!(!fit.converged);
    assert!(matches!(fit.ensure_converged(), Err(sparse2stage::Error::NotConverged { .. })));
}

#[test]
fn warm_start_reaches_the_same_solution() {
    let mut r = rng(19);
    let d = random_design(&mut r, 30, 10);
    let y = gaussian_vec(&mut r, 30);
    let cold = solve(&WeightedLassoProblem::lasso(&d, &y, 0.3), &opts()).unwrap();
    let start: Vec<f64> = cold.beta.iter().map(|b| b * 0.5 + 0.1).collect();
    let warm = solve(&WeightedLassoProblem::lasso(&d, &y, 0.3), &SolverOptions { warm_start: Some(start), ..opts() }).unwrap();
    assert!(max_abs_diff(&cold.beta, &warm.beta) <= 1e-7);
    assert!((cold.objective - warm.objective).abs() <= 1e-10);
}
