//! Spectral audit of an equicorrelated design: sparse eigenvalues, restricted
//! eigenvalues along the cone constant, and the ordering between them.
//!
//! ```text
//! cargo run --example eigen_audit
//! ```

use sparse2stage::eigen::{ConeSearchConfig, EigenAuditor, EnumMode};
use sparse2stage::linalg::design_from_gram;
use nalgebra::DMatrix;

fn main() -> sparse2stage::Result<()> {
    let p = 10;
    let rho = 0.5;
    let sigma = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho });
    let design = design_from_gram(&sigma, 200)?;
    let audit = EigenAuditor::new(design.gram().clone(), ConeSearchConfig::default());
    let s = [0, 1, 2];

    let (lmin, lmax) = audit.set_extremes(&s)?;
    println!("Lambda_min(S) = {lmin:.6}, Lambda_max(S) = {lmax:.6}");
    for k in [1, 3, 5] {
        let sp = audit.sparse_max(k, EnumMode::Exact)?;
        println!("Lambda_sparse({k}) = {:.6} on {:?}", sp.value, sp.argset);
    }
    let n = 6;
    println!("phi_sparse(S, {n}) = {:.6}", audit.sparse_min(&s, n, EnumMode::Exact)?.value);
    for l in [1.0, 2.0, 6.0] {
        let at = audit.restricted_at(l, &s)?;
        let wide = audit.restricted(l, &s, n)?;
        let min = audit.restricted_min(l, &s, n)?;
        println!(
            "L = {l}: phi(L,S) = {:.6}, phi(L,S,{n}) = {:.6}, phi_min = {:.6}, certified >= {:.6}",
            at.phi(),
            wide.phi(),
            min.phi(),
            wide.certified_lower_sq.sqrt()
        );
    }
    Ok(())
}
