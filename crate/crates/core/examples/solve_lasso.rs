//! Fits a plain and a weighted Lasso on a simulated design and prints the
//! KKT certificate of each fit.
//!
//! ```text
//! cargo run --example solve_lasso
//! ```

use sparse2stage::harness::{generate, BetaSpec, Family, ScenarioConfig, TuningSpec};
use sparse2stage::lasso::{solve, SolverOptions, WeightedLassoProblem};

fn main() -> sparse2stage::Result<()> {
    let cfg = ScenarioConfig {
        n: 80,
        p: 30,
        s_true: 4,
        family: Family::Equicorrelated { rho: 0.4 },
        beta: BetaSpec::Magnitude { magnitude: 3.0, decay: 0.7, support: None, seed: None },
        sigma: 1.0,
        misspecification: 0.0,
        t: 3.0,
        lambda_init: None,
        seed: 11,
        replications: 1,
        mode: None,
        tuning: TuningSpec::default(),
        cone: None,
    };
    let sc = generate(&cfg)?;
    let y = sc.response(0);
    let opts = SolverOptions::default();

    let lasso = solve(&WeightedLassoProblem::lasso(&sc.design, &y, sc.lambda_init), &opts)?;
    println!("lambda_init = {:.4}", sc.lambda_init);
    println!("lasso: active {:?}, objective {:.6}, kkt {:.2e}", lasso.active_set, lasso.objective, lasso.kkt.max_violation);

    // leave the first true coordinate unpenalized and exclude the last column
    let mut w = vec![1.0; sc.design.p()];
    w[0] = 0.0;
    w[sc.design.p() - 1] = f64::INFINITY;
    let weighted = solve(&WeightedLassoProblem::weighted(&sc.design, &y, sc.lambda_init, 1.5, w), &opts)?;
    println!("weighted: active {:?}, objective {:.6}, kkt {:.2e}", weighted.active_set, weighted.objective, weighted.kkt.max_violation);

    println!("true beta on support:");
    for &j in &sc.s_true {
        println!("  {j:>2}: true {:+.3}  lasso {:+.3}  weighted {:+.3}", sc.beta_true[j], lasso.beta[j], weighted.beta[j]);
    }
    Ok(())
}
