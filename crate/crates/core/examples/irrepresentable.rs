//! The weighted irrepresentable condition on the block example design, and
//! a noiseless weighted Lasso that respects it.
//!
//! ```text
//! cargo run --example irrepresentable
//! ```

use sparse2stage::irrep::{irrep_report, worst_case_design};
use sparse2stage::lasso::{solve, SolverOptions, WeightedLassoProblem};
use sparse2stage::linalg::design_from_gram;

fn main() -> sparse2stage::Result<()> {
    let (s, p, rho) = (3, 8, 0.6);
    let set: Vec<usize> = (0..s).collect();
    for w in [vec![1.0; p], vec![1.0, 1.0, 1.0, 4.0, 4.0, 4.0, 4.0, 4.0], vec![2.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0]] {
        let gram = worst_case_design(s, p, rho, &w)?;
        let rep = irrep_report(&gram, &set, &w)?;
        let closed = rho * w[..s].iter().map(|v| v * v).sum::<f64>().sqrt() / w[s..].iter().cloned().fold(f64::INFINITY, f64::min);
        println!("w = {w:?}");
        println!("  measure {:.6} (closed form {closed:.6}), holds: {}", rep.measure, rep.condition_holds);

        let design = design_from_gram(&gram, 400)?;
        let f0 = design.predict(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let fit = solve(&WeightedLassoProblem::weighted(&design, &f0, 0.2, 1.0, w.clone()), &SolverOptions::default())?;
        println!("  noiseless weighted fit selects {:?}", fit.active_set);
    }
    Ok(())
}
