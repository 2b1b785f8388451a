//! Adaptive and thresholded Lasso on one noisy draw, with tuning levels
//! taken from the oracle set of the scenario.
//!
//! ```text
//! cargo run --example two_stage
//! ```

use sparse2stage::harness::{BetaSpec, Family, ScenarioConfig, ScenarioContext, TuningSpec};
use sparse2stage::lasso::SolverOptions;
use sparse2stage::two_stage::{adaptive_lasso, thresholded_lasso};

fn main() -> sparse2stage::Result<()> {
    let cfg = ScenarioConfig {
        n: 100,
        p: 40,
        s_true: 5,
        family: Family::Gaussian,
        beta: BetaSpec::Magnitude { magnitude: 8.0, decay: 0.6, support: None, seed: None },
        sigma: 1.0,
        misspecification: 0.0,
        t: 3.0,
        lambda_init: None,
        seed: 3,
        replications: 1,
        mode: None,
        tuning: TuningSpec::default(),
        cone: None,
    };
    let ctx = ScenarioContext::build(&cfg)?;
    let sc = &ctx.scenario;
    let y = sc.response(0);
    let opts = SolverOptions::default();
    println!("S_true = {:?}, S0 = {:?}, bias = {:.4}", sc.s_true, ctx.oracle.s0, ctx.oracle.bias);
    println!("lambda_init = {:.4}, delta = {:.4}, lambda_adap = {:.4}", ctx.lambda_init(), ctx.delta, ctx.lambda_adap);

    let adap = adaptive_lasso(&sc.design, &y, ctx.lambda_init(), ctx.lambda_adap, &opts)?;
    println!("initial  selects {:?}", adap.initial.active_set);
    println!("adaptive selects {:?}", adap.selected);

    let thr = thresholded_lasso(&sc.design, &y, ctx.lambda_init(), ctx.delta, &opts)?;
    println!("threshold selects {:?}", thr.selected);
    for &j in &thr.selected {
        println!("  {j:>2}: refit {:+.3}  b0 {:+.3}", thr.beta[j], ctx.oracle.b0[j]);
    }
    Ok(())
}
