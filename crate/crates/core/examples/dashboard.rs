//! Mean errors against their nominal rates as the sample size grows.
//!
//! ```text
//! cargo run --release --example dashboard
//! ```

use std::fs::File;

use sparse2stage::harness::{dashboard, ScenarioConfig, Sweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/gaussian_noisy.json");
    let base: ScenarioConfig = serde_json::from_reader(File::open(path)?)?;
    let dash = dashboard(&base, &Sweep::SampleSize { values: vec![100, 200, 400] }, 10)?;
    println!("{:>6} {:>9} {:>20} {:>10} {:>10} {:>8}", "n", "method", "metric", "mean", "rate", "ratio");
    for r in dash.rows.iter().filter(|r| r.metric != "false_positives_s0") {
        println!("{:>6} {:>9} {:>20} {:>10.4} {:>10.4} {:>8.3}", r.sweep_value, r.method, r.metric, r.mean, r.rate, r.ratio);
    }
    Ok(())
}
