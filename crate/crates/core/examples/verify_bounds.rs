//! Checks every finite-sample bound on a scenario and lists the records per
//! family. Pass `--suite` to run the full default suite instead (minutes).
//!
//! ```text
//! cargo run --release --example verify_bounds [scenario.json | --suite]
//! ```

use std::fs::File;

use sparse2stage::harness::bounds::Status;
use sparse2stage::harness::{default_suite, run_suite, verify_bounds, ScenarioConfig, ScenarioContext};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/noiseless_small.json").into());
    if arg == "--suite" {
        let rep = run_suite(&default_suite())?;
        println!("{} noisy and {} noiseless scenarios", rep.noisy_scenarios, rep.noiseless_scenarios);
        for (fam, c) in &rep.summary {
            println!("{fam:?}: {} checked, {} failed", c.checked, c.fail);
        }
        return Ok(());
    }
    let cfg: ScenarioConfig = serde_json::from_reader(File::open(&arg)?)?;
    let ctx = ScenarioContext::build(&cfg)?;
    let (report, _) = verify_bounds(&ctx, cfg.replications)?;
    println!("{}: S0 = {:?}, bias = {:.4}", report.context.label, report.context.s0, report.context.bias);
    for (fam, c) in &report.summary {
        println!("{fam:?}: {} checked, {} pass, {} fail, {} skipped, {} off event", c.checked, c.pass, c.fail, c.skipped, c.off_event);
    }
    for r in report.records().filter(|r| r.status == Status::Fail) {
        println!("FAIL {} [{}]: {:?} > {:?}", r.name, r.fit, r.lhs, r.rhs);
    }
    Ok(())
}
