//! Oracle set search on a target with one small coefficient: as the penalty
//! grows the small coefficient stops paying for its variance.
//!
//! ```text
//! cargo run --example oracle_set
//! ```

use sparse2stage::eigen::{ConeSearchConfig, EigenAuditor};
use sparse2stage::harness::{generate, BetaSpec, Family, ScenarioConfig, TuningSpec};
use sparse2stage::oracle::{oracle_scalars, oracle_search};
use sparse2stage::Mode;

fn main() -> sparse2stage::Result<()> {
    let mut values = vec![0.0; 20];
    values[0] = 3.0;
    values[1] = -2.0;
    values[2] = 0.3;
    let cfg = ScenarioConfig {
        n: 60,
        p: 20,
        s_true: 3,
        family: Family::Equicorrelated { rho: 0.3 },
        beta: BetaSpec::Values { values },
        sigma: 0.0,
        misspecification: 0.0,
        t: 3.0,
        lambda_init: Some(0.1),
        seed: 1,
        replications: 1,
        mode: Some(Mode::Noiseless),
        tuning: TuningSpec::default(),
        cone: None,
    };
    let sc = generate(&cfg)?;
    let audit = EigenAuditor::new(sc.design.gram().clone(), ConeSearchConfig::fast());
    for lambda in [0.05, 0.2, 0.8] {
        let sol = oracle_search(&sc.design, &sc.f0, &sc.s_true, lambda, Mode::Noiseless, &audit)?;
        let sca = oracle_scalars(&sol, &audit)?;
        println!(
            "lambda {lambda:<5} S0 = {:?}  bias = {:.5}  delta_oracle^2 = {:.5}",
            sol.s0, sol.bias, sca.delta_oracle_sq
        );
    }
    Ok(())
}
