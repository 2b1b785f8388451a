//! Spectral auditing of a Gram matrix `Σ̂ = XᵀX/n`.
//!
//! Quantities follow the usual sparse-regression conventions. `Λ` symbols
//! are square roots of eigenvalues; restricted eigenvalues are reported both
//! as `φ` and `φ²`.
//!
//! * `Λ_min(S)`, `Λ_max(S)`: extreme singular values of `X_S/√n`.
//! * `Λ_sparse(N)`: the largest `Λ_max` over all `N`-subsets.
//! * `φ_sparse(S, N)`: the smallest `Λ_min` over `N`-supersets of `S`.
//! * `φ²(L, S, N)`: the smallest ratio `βᵀΣ̂β / ‖β_𝒩‖²` over supersets
//!   `𝒩 ⊇ S` with `|𝒩| ≤ N` and `β` in the restriction cone of `(L, S, 𝒩)`.
//! * `φ²_min(L, S, N)`: the smallest `φ²(L, 𝒩)` over `N`-supersets `𝒩 ⊇ S`.
//!
//! The restriction cone requires `‖β_{𝒩ᶜ}‖₁ ≤ L √|𝒩| ‖β_𝒩‖₂` plus an ordering
//! constraint whose reading is selectable through [`ConeReading`].
//!
//! Sparse eigenvalues are enumerated exactly when the subset count is at most
//! [`EXACT_BUDGET`] and otherwise estimated greedily. Restricted eigenvalues
//! are non-convex programs; they are estimated by multi-start projected
//! descent per candidate superset, so every reported `φ²` is an upper bound
//! on the true value. The certified lower bound is `Λ²_min` of the full Gram
//! matrix.
//!
//! Candidate results are memoized per `(L, S, 𝒩)` and seeded from a hash of
//! that key, so each candidate value is a pure function of its inputs. This
//! keeps the chain `φ_min(L,S,N) ≤ φ(L,S,N) ≤ φ(L,S) ≤ Λ_min(S)` exact for the
//! estimates, not just for the true values, and makes results independent of
//! the thread count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complement, eig_extremes, min_eigenpair, sorted_unique, submatrix};
use crate::subsets::{binomial, count_supersets_up_to, mix64, random_superset, supersets_up_to, union_sorted, Combinations};

/// Largest subset count enumerated exactly for sparse eigenvalues.
pub const EXACT_BUDGET: f64 = 1e6;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConeReading {
    /// `max_{𝒩ᶜ}|β_j| ≤ min_{j ∈ 𝒩∖S}|β_j|`: outside entries are no larger
    /// than the added entries of `𝒩`.
    #[default]
    LargestOutside,
    /// `max_{𝒩ᶜ}|β_j| ≤ min_{j ∉ 𝒩∖S}|β_j|` taken verbatim, which forces equal
    /// magnitudes on `𝒩ᶜ` bounded by `min_S |β_j|`.
    Literal,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ConeSearchConfig {
    pub restarts: usize,
    pub max_descent_steps: usize,
    pub step_shrink: f64,
    pub seed: u64,
    /// Candidate supersets are enumerated exhaustively up to this count.
    pub exhaustive_budget: usize,
    /// Random candidates drawn when the budget is exceeded.
    pub sampled_candidates: usize,
    pub reading: ConeReading,
}

impl Default for ConeSearchConfig {
    fn default() -> Self {
        ConeSearchConfig {
            restarts: 64,
            max_descent_steps: 500,
            step_shrink: 0.5,
            seed: 42,
            exhaustive_budget: 10_000,
            sampled_candidates: 256,
            reading: ConeReading::LargestOutside,
        }
    }
}

impl ConeSearchConfig {
    /// A lighter search for simulation sweeps.
    pub fn fast() -> Self {
        ConeSearchConfig { restarts: 4, max_descent_steps: 150, sampled_candidates: 48, exhaustive_budget: 256, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "snake_case")]
pub enum EnumMode {
    Auto,
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactEnum,
    Greedy,
    MultistartUpper,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SparseEigen {
    pub n: usize,
    /// Base set (empty for `Λ_sparse`).
    pub set: Vec<usize>,
    /// `Λ` value (square root of an eigenvalue).
    pub value: f64,
    pub method: Method,
    /// The maximizing (or minimizing) subset.
    pub argset: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RestrictedEigen {
    pub l: f64,
    pub set: Vec<usize>,
    pub n: usize,
    pub phi_sq: f64,
    pub certified_lower_sq: f64,
    pub method: Method,
    pub exhaustive: bool,
    pub candidates: usize,
    pub argmin_set: Vec<usize>,
    /// Minimizer normalized to `‖β_{argmin_set}‖₂ = 1`.
    pub argmin: Vec<f64>,
}

impl RestrictedEigen {
    pub fn phi(&self) -> f64 {
        self.phi_sq.max(0.0).sqrt()
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    value: f64,
    beta: Vec<f64>,
}

type RKey = (u64, Vec<usize>, usize);

/// Eigen computations on one Gram matrix with memoization.
pub struct EigenAuditor {
    gram: DMatrix<f64>,
    cfg: ConeSearchConfig,
    lambda_min_full: f64,
    lambda_max_full: f64,
    step0: f64,
    candidates: Mutex<HashMap<(u64, Vec<usize>, Vec<usize>), Arc<Candidate>>>,
    restricted: Mutex<HashMap<RKey, RestrictedEigen>>,
    restricted_min: Mutex<HashMap<RKey, RestrictedEigen>>,
    sparse_max: Mutex<HashMap<(usize, EnumMode), SparseEigen>>,
    sparse_min: Mutex<HashMap<(Vec<usize>, usize, EnumMode), SparseEigen>>,
}

fn check_l(l: f64) -> Result<()> {
    if l >= 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!("cone constant L = {l} must be finite and >= 0")))
    }
}

impl EigenAuditor {
    pub fn new(gram: DMatrix<f64>, cfg: ConeSearchConfig) -> Self {
        let (lo, hi) = eig_extremes(&gram);
        let row_sum = (0..gram.nrows())
            .map(|i| gram.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        EigenAuditor {
            step0: 0.5 / row_sum.max(1e-12),
            gram,
            cfg,
            lambda_min_full: lo,
            lambda_max_full: hi,
            candidates: Mutex::default(),
            restricted: Mutex::default(),
            restricted_min: Mutex::default(),
            sparse_max: Mutex::default(),
            sparse_min: Mutex::default(),
        }
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn config(&self) -> &ConeSearchConfig {
        &self.cfg
    }

    pub fn p(&self) -> usize {
        self.gram.nrows()
    }

    fn check_set(&self, s: &[usize]) -> Result<Vec<usize>> {
        let s = sorted_unique(s);
        if let Some(&j) = s.iter().find(|&&j| j >= self.p()) {
            return Err(Error::InvalidProblem(format!("index {j} out of range for p = {}", self.p())));
        }
        Ok(s)
    }

    /// `Λ_max` of the full Gram matrix.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max_full.max(0.0).sqrt()
    }

    /// `Λ_min` of the full Gram matrix.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min_full.max(0.0).sqrt()
    }

    /// `(Λ_min(S), Λ_max(S))`.
    pub fn set_extremes(&self, s: &[usize]) -> Result<(f64, f64)> {
        let s = self.check_set(s)?;
        if s.is_empty() {
            return Err(Error::InvalidProblem("extremes of an empty set are undefined".into()));
        }
        let (lo, hi) = eig_extremes(&submatrix(&self.gram, &s, &s));
        Ok((lo.max(0.0).sqrt(), hi.max(0.0).sqrt()))
    }

    fn block_min(&self, s: &[usize]) -> f64 {
        min_eigenpair(&submatrix(&self.gram, s, s)).0.max(0.0)
    }

    fn block_max(&self, s: &[usize]) -> f64 {
        eig_extremes(&submatrix(&self.gram, s, s)).1.max(0.0)
    }

    /// `Λ_sparse(N)`.
    pub fn sparse_max(&self, n: usize, mode: EnumMode) -> Result<SparseEigen> {
        let p = self.p();
        if n == 0 || n > p {
            return Err(Error::InvalidProblem(format!("sparse size N = {n} must lie in 1..={p}")));
        }
        if let Some(v) = self.sparse_max.lock().unwrap().get(&(n, mode)) {
            return Ok(v.clone());
        }
        let count = binomial(p, n);
        let exact = match mode {
            EnumMode::Exact if count > EXACT_BUDGET => {
                return Err(Error::CombinatorialBudgetExceeded { count, budget: EXACT_BUDGET })
            }
            EnumMode::Exact => true,
            EnumMode::Greedy => false,
            EnumMode::Auto => count <= EXACT_BUDGET,
        };
        let (value, argset) = if exact {
            (0..p)
                .into_par_iter()
                .filter_map(|first| {
                    let rest: Vec<usize> = (first + 1..p).collect();
                    Combinations::new(&rest, n - 1)
                        .map(|tail| {
                            let set = union_sorted(&[first], &tail);
                            (self.block_max(&set), set)
                        })
                        .reduce(pick_max)
                })
                .reduce_with(pick_max)
                .expect("at least one subset")
        } else {
            // grow from every starting column by best marginal increase
            (0..p)
                .into_par_iter()
                .map(|start| {
                    let mut set = vec![start];
                    while set.len() < n {
                        let pool = complement(&set, p);
                        let (_, best) = pool
                            .iter()
                            .map(|&j| {
                                let cand = union_sorted(&set, &[j]);
                                (self.block_max(&cand), cand)
                            })
                            .reduce(pick_max)
                            .expect("pool is non-empty");
                        set = best;
                    }
                    (self.block_max(&set), set)
                })
                .reduce_with(pick_max)
                .expect("p >= 1")
        };
        let out = SparseEigen {
            n,
            set: vec![],
            value: value.sqrt(),
            method: if exact { Method::ExactEnum } else { Method::Greedy },
            argset,
        };
        self.sparse_max.lock().unwrap().insert((n, mode), out.clone());
        Ok(out)
    }

    /// `φ_sparse(S, N)`.
    pub fn sparse_min(&self, s: &[usize], n: usize, mode: EnumMode) -> Result<SparseEigen> {
        let s = self.check_set(s)?;
        let p = self.p();
        if n < s.len().max(1) || n > p {
            return Err(Error::InvalidProblem(format!("sparse size N = {n} must lie in {}..={p}", s.len().max(1))));
        }
        let key = (s.clone(), n, mode);
        if let Some(v) = self.sparse_min.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let pool = complement(&s, p);
        let count = binomial(pool.len(), n - s.len());
        let exact = match mode {
            EnumMode::Exact if count > EXACT_BUDGET => {
                return Err(Error::CombinatorialBudgetExceeded { count, budget: EXACT_BUDGET })
            }
            EnumMode::Exact => true,
            EnumMode::Greedy => false,
            EnumMode::Auto => count <= EXACT_BUDGET,
        };
        let (value, argset) = if exact {
            let sets: Vec<Vec<usize>> = Combinations::new(&pool, n - s.len()).map(|a| union_sorted(&s, &a)).collect();
            sets.into_par_iter()
                .map(|set| (self.block_min(&set), set))
                .reduce_with(pick_min)
                .expect("at least one superset")
        } else {
            let starts: Vec<Vec<usize>> = if s.is_empty() { (0..p).map(|j| vec![j]).collect() } else { vec![s.clone()] };
            starts
                .into_par_iter()
                .map(|mut set| {
                    while set.len() < n {
                        let free = complement(&set, p);
                        set = free
                            .iter()
                            .map(|&j| {
                                let cand = union_sorted(&set, &[j]);
                                (self.block_min(&cand), cand)
                            })
                            .reduce(pick_min)
                            .expect("pool is non-empty")
                            .1;
                    }
                    (self.block_min(&set), set)
                })
                .reduce_with(pick_min)
                .expect("at least one start")
        };
        let out = SparseEigen {
            n,
            set: s,
            value: value.sqrt(),
            method: if exact { Method::ExactEnum } else { Method::Greedy },
            argset,
        };
        self.sparse_min.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// `φ²(L, S, N)` estimate.
    pub fn restricted(&self, l: f64, s: &[usize], n: usize) -> Result<RestrictedEigen> {
        check_l(l)?;
        let s = self.check_set(s)?;
        let p = self.p();
        if n < s.len() || n > p || n == 0 {
            return Err(Error::InvalidProblem(format!("N = {n} must satisfy max(|S|, 1) <= N <= p = {p}")));
        }
        let key = (l.to_bits(), s.clone(), n);
        if let Some(v) = self.restricted.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let started = std::time::Instant::now();
        let pool = complement(&s, p);
        let count = count_supersets_up_to(s.len(), pool.len(), n);
        let exhaustive = count <= self.cfg.exhaustive_budget as f64;
        let mut family = if exhaustive {
            supersets_up_to(&s, &pool, n)
        } else {
            let mut fam = vec![s.clone()];
            fam.extend(self.greedy_path(&s, n));
            let mut rng = ChaCha8Rng::seed_from_u64(mix64(
                [self.cfg.seed, 0xC0DE, l.to_bits()].into_iter().chain(s.iter().map(|&j| j as u64)),
            ));
            for _ in 0..self.cfg.sampled_candidates {
                fam.push(random_superset(&mut rng, &s, &pool, n - s.len()));
            }
            fam
        };
        if s.is_empty() {
            // the empty candidate carries no ratio; start from singletons
            family.retain(|c| !c.is_empty());
        }
        dedup_keep_order(&mut family);
        let (value, idx, beta) = family
            .par_iter()
            .enumerate()
            .map(|(i, cand)| {
                let c = self.candidate(l, &s, cand);
                (c.value, i, c.beta.clone())
            })
            .reduce_with(|a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a })
            .expect("candidate family is non-empty");
        let out = RestrictedEigen {
            l,
            set: s,
            n,
            phi_sq: value,
            certified_lower_sq: self.lambda_min_full.max(0.0),
            method: if exhaustive && l == 0.0 { Method::ExactEnum } else { Method::MultistartUpper },
            exhaustive,
            candidates: family.len(),
            argmin_set: family[idx].clone(),
            argmin: beta,
        };
        log::debug!("phi({l}, {:?}, {n}) over {} candidates in {:?}", out.set, out.candidates, started.elapsed());
        self.restricted.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// `φ²(L, S) = φ²(L, S, |S|)`.
    pub fn restricted_at(&self, l: f64, s: &[usize]) -> Result<RestrictedEigen> {
        let n = sorted_unique(s).len();
        self.restricted(l, s, n)
    }

    /// `φ²_min(L, S, N)` estimate.
    pub fn restricted_min(&self, l: f64, s: &[usize], n: usize) -> Result<RestrictedEigen> {
        check_l(l)?;
        let s = self.check_set(s)?;
        let p = self.p();
        if n < s.len() || n > p || n == 0 {
            return Err(Error::InvalidProblem(format!("N = {n} must satisfy max(|S|, 1) <= N <= p = {p}")));
        }
        let key = (l.to_bits(), s.clone(), n);
        if let Some(v) = self.restricted_min.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let started = std::time::Instant::now();
        let pool = complement(&s, p);
        let count = binomial(pool.len(), n - s.len());
        let exhaustive = count <= self.cfg.exhaustive_budget as f64;
        let mut family: Vec<Vec<usize>> = if exhaustive {
            Combinations::new(&pool, n - s.len()).map(|a| union_sorted(&s, &a)).collect()
        } else {
            let mut fam: Vec<Vec<usize>> = self.greedy_path(&s, n).into_iter().filter(|c| c.len() == n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(mix64(
                [self.cfg.seed, 0x5EED, l.to_bits()].into_iter().chain(s.iter().map(|&j| j as u64)),
            ));
            for _ in 0..self.cfg.sampled_candidates {
                fam.push(random_superset(&mut rng, &s, &pool, n - s.len()));
            }
            fam
        };
        dedup_keep_order(&mut family);
        let mut results: Vec<(f64, Vec<usize>, Vec<f64>)> = family
            .par_iter()
            .map(|cand| {
                let c = self.candidate(l, cand, cand);
                (c.value, cand.clone(), c.beta.clone())
            })
            .collect();

        // The minimizer of φ(L, S, N), padded to N coordinates, is feasible
        // for φ(L, 𝒩') with a ratio no larger than φ²(L, S, N).
        if self.cfg.reading == ConeReading::LargestOutside {
            let r = self.restricted(l, &s, n)?;
            let lifted = pad_with_largest(&r.argmin_set, &r.argmin, n);
            let norm_sq: f64 = lifted.iter().map(|&j| r.argmin[j] * r.argmin[j]).sum();
            let value = quad(&self.gram, &r.argmin) / norm_sq;
            let scale = norm_sq.sqrt();
            results.push((value, lifted, r.argmin.iter().map(|v| v / scale).collect()));
        }
        let (value, argmin_set, argmin) = results
            .into_iter()
            .reduce(|a, b| if b.0 < a.0 { b } else { a })
            .expect("non-empty family");
        let out = RestrictedEigen {
            l,
            set: s,
            n,
            phi_sq: value,
            certified_lower_sq: self.lambda_min_full.max(0.0),
            method: if exhaustive && l == 0.0 { Method::ExactEnum } else { Method::MultistartUpper },
            exhaustive,
            candidates: family.len(),
            argmin_set,
            argmin,
        };
        log::debug!("phi_min({l}, {:?}, {n}) over {} candidates in {:?}", out.set, out.candidates, started.elapsed());
        self.restricted_min.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// `D = Λ²_sparse(s*) · s₀ / (φ²(2, S₀) · s*)`.
    pub fn condition_d(&self, s_star: usize, s0: &[usize]) -> Result<f64> {
        let s0 = self.check_set(s0)?;
        if s0.is_empty() || s_star == 0 {
            return Err(Error::InvalidProblem("condition D needs non-empty S0 and s* >= 1".into()));
        }
        let ls = self.sparse_max(s_star.min(self.p()), EnumMode::Auto)?.value;
        let phi = self.restricted_at(2.0, &s0)?.phi_sq;
        Ok(ls * ls * s0.len() as f64 / (phi * s_star as f64))
    }

    /// Multi-start value of `min{βᵀΣ̂β : 𝒩 ⊇ S, |𝒩| = 2|S|, ‖β_{𝒩ᶜ}‖₂ ≤ 1, ‖β_𝒩‖₂ = 1}`,
    /// a lower-bound program for `φ²(L, S, 2|S|)`. The minimizer of the latter
    /// for `seed_l` is used as an extra start.
    pub fn alternate_lower(&self, s: &[usize], seed_l: f64) -> Result<f64> {
        let s = self.check_set(s)?;
        let p = self.p();
        if s.is_empty() {
            return Err(Error::InvalidProblem("alternate program needs a non-empty set".into()));
        }
        let n = (2 * s.len()).min(p);
        let pool = complement(&s, p);
        let count = binomial(pool.len(), n - s.len());
        let mut family: Vec<Vec<usize>> = if count <= self.cfg.exhaustive_budget as f64 {
            Combinations::new(&pool, n - s.len()).map(|a| union_sorted(&s, &a)).collect()
        } else {
            let mut fam: Vec<Vec<usize>> = self.greedy_path(&s, n).into_iter().filter(|c| c.len() == n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(mix64([self.cfg.seed, 0xA17].into_iter().chain(s.iter().map(|&j| j as u64))));
            for _ in 0..self.cfg.sampled_candidates {
                fam.push(random_superset(&mut rng, &s, &pool, n - s.len()));
            }
            fam
        };
        let main = self.restricted(seed_l, &s, n)?;
        let lifted = pad_with_largest(&main.argmin_set, &main.argmin, n);
        family.insert(0, lifted.clone());
        dedup_keep_order(&mut family);

        let value = family
            .par_iter()
            .map(|cand| {
                let outs = complement(cand, p);
                // exact projection onto {‖β_𝒩‖₂ = 1} × {‖β_{𝒩ᶜ}‖₂ ≤ 1}
                let project = |b: &mut [f64]| -> bool {
                    let inner = cand.iter().map(|&j| b[j] * b[j]).sum::<f64>().sqrt();
                    if !(inner > 1e-300) || !inner.is_finite() {
                        return false;
                    }
                    cand.iter().for_each(|&j| b[j] /= inner);
                    let norm: f64 = outs.iter().map(|&j| b[j] * b[j]).sum::<f64>().sqrt();
                    if norm > 1.0 {
                        outs.iter().for_each(|&j| b[j] /= norm);
                    }
                    true
                };
                let mut rng = ChaCha8Rng::seed_from_u64(mix64(
                    [self.cfg.seed, 0xA17].into_iter().chain(cand.iter().map(|&j| j as u64)),
                ));
                let mut starts = vec![embed(&self.eigvec_on(cand), cand, p)];
                if *cand == lifted {
                    starts.push(main.argmin.clone());
                }
                for _ in 1..self.cfg.restarts {
                    starts.push(random_start(&mut rng, p));
                }
                starts
                    .into_iter()
                    .filter_map(|mut b| project(&mut b).then(|| self.descend(b, &project, None).0))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min);
        Ok(value.max(0.0))
    }

    fn eigvec_on(&self, set: &[usize]) -> Vec<f64> {
        min_eigenpair(&submatrix(&self.gram, set, set)).1.iter().copied().collect()
    }

    /// Supersets of `s` grown one column at a time by smallest `Λ_min`.
    fn greedy_path(&self, s: &[usize], n: usize) -> Vec<Vec<usize>> {
        let p = self.p();
        let mut cur = s.to_vec();
        let mut path = Vec::new();
        while cur.len() < n {
            let pool = complement(&cur, p);
            cur = pool
                .iter()
                .map(|&j| {
                    let cand = union_sorted(&cur, &[j]);
                    (self.block_min(&cand), cand)
                })
                .reduce(pick_min)
                .expect("pool is non-empty")
                .1;
            path.push(cur.clone());
        }
        path
    }

    /// Per-candidate value `min βᵀΣ̂β/‖β_𝒩‖²` over the cone of `(L, S, 𝒩)`.
    fn candidate(&self, l: f64, s: &[usize], ins: &[usize]) -> Arc<Candidate> {
        let key = (l.to_bits(), s.to_vec(), ins.to_vec());
        if let Some(c) = self.candidates.lock().unwrap().get(&key) {
            return c.clone();
        }
        let c = Arc::new(self.search_candidate(l, s, ins));
        self.candidates.lock().unwrap().insert(key, c.clone());
        c
    }

    fn search_candidate(&self, l: f64, s: &[usize], ins: &[usize]) -> Candidate {
        let p = self.p();
        let (lam, vec) = min_eigenpair(&submatrix(&self.gram, ins, ins));
        let seed_beta = embed(&vec.iter().copied().collect::<Vec<_>>(), ins, p);
        let mut best = Candidate { value: lam.max(0.0), beta: seed_beta.clone() };
        let outs = complement(ins, p);
        if l == 0.0 || outs.is_empty() {
            return best;
        }
        let free: Vec<usize> = ins.iter().copied().filter(|j| s.binary_search(j).is_err()).collect();
        let rad = l * (ins.len() as f64).sqrt();
        let reading = self.cfg.reading;
        let project = |b: &mut [f64]| -> bool {
            if !normalize_on(b, ins) {
                return false;
            }
            match reading {
                ConeReading::LargestOutside => {
                    let cap = free.iter().map(|&j| b[j].abs()).fold(f64::INFINITY, f64::min);
                    project_l1_box(b, &outs, rad, cap);
                }
                ConeReading::Literal => {
                    let cap = s.iter().map(|&j| b[j].abs()).fold(f64::INFINITY, f64::min).min(rad / outs.len() as f64);
                    let mean = outs.iter().map(|&j| b[j].abs()).sum::<f64>() / outs.len() as f64;
                    let c = mean.clamp(0.0, cap);
                    for &j in &outs {
                        b[j] = if b[j] < 0.0 { -c } else { c };
                    }
                }
            }
            true
        };
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(
            [self.cfg.seed, l.to_bits(), reading as u64, u64::MAX]
                .into_iter()
                .chain(s.iter().map(|&j| j as u64))
                .chain([u64::MAX])
                .chain(ins.iter().map(|&j| j as u64)),
        ));
        let mut starts = vec![seed_beta];
        for _ in 1..self.cfg.restarts.max(1) {
            starts.push(random_start(&mut rng, p));
        }
        for mut b in starts {
            if !project(&mut b) {
                continue;
            }
            let (value, beta) = self.descend(b, &project, Some(ins));
            if value < best.value {
                best = Candidate { value: value.max(0.0), beta };
            }
        }
        best
    }

    /// Projected descent of `βᵀΣ̂β` with backtracking; `project` restores
    /// feasibility. With `ratio_on = Some(𝒩)` the iterate is kept at
    /// `‖β_𝒩‖₂ = 1` by rescaling and the step follows the gradient of the
    /// scale-invariant ratio `βᵀΣ̂β / ‖β_𝒩‖²`, `2(Σ̂β − f β_𝒩)`.
    fn descend(&self, mut beta: Vec<f64>, project: &dyn Fn(&mut [f64]) -> bool, ratio_on: Option<&[usize]>) -> (f64, Vec<f64>) {
        let g = &self.gram;
        let mut gb = matvec(g, &beta);
        let mut f = crate::linalg::dot(&beta, &gb);
        let mut eta = self.step0;
        let mut stall = 0;
        for _ in 0..self.cfg.max_descent_steps {
            let mut dir = gb.clone();
            if let Some(set) = ratio_on {
                set.iter().for_each(|&j| dir[j] -= f * beta[j]);
            }
            let mut trial: Vec<f64> = beta.iter().zip(&dir).map(|(b, d)| b - 2.0 * eta * d).collect();
            if !project(&mut trial) {
                eta *= self.cfg.step_shrink;
                continue;
            }
            let gt = matvec(g, &trial);
            let ft = crate::linalg::dot(&trial, &gt);
            if ft < f {
                stall = if f - ft < 1e-13 * (f.abs() + 1e-12) { stall + 1 } else { 0 };
                beta = trial;
                gb = gt;
                f = ft;
                eta = (eta / self.cfg.step_shrink).min(self.step0 * 1e6);
                if stall >= 8 {
                    break;
                }
            } else {
                eta *= self.cfg.step_shrink;
                if eta < self.step0 * 1e-12 {
                    break;
                }
            }
        }
        (f, beta)
    }
}

fn pick_max(a: (f64, Vec<usize>), b: (f64, Vec<usize>)) -> (f64, Vec<usize>) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

fn pick_min(a: (f64, Vec<usize>), b: (f64, Vec<usize>)) -> (f64, Vec<usize>) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

fn dedup_keep_order(v: &mut Vec<Vec<usize>>) {
    let mut seen = std::collections::HashSet::new();
    v.retain(|c| seen.insert(c.clone()));
}

fn matvec(g: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let p = b.len();
    let mut out = vec![0.0; p];
    for (k, &bk) in b.iter().enumerate() {
        if bk != 0.0 {
            for (o, gik) in out.iter_mut().zip(g.column(k).iter()) {
                *o += bk * gik;
            }
        }
    }
    out
}

fn quad(g: &DMatrix<f64>, b: &[f64]) -> f64 {
    crate::linalg::dot(b, &matvec(g, b))
}

fn embed(v: &[f64], set: &[usize], p: usize) -> Vec<f64> {
    let mut out = vec![0.0; p];
    for (k, &j) in set.iter().enumerate() {
        out[j] = v[k];
    }
    out
}

fn random_start(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    let scale: f64 = rng.random::<f64>();
    (0..p).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Scales `b` so that `‖b_set‖₂ = 1`; false if `b_set` vanishes.
fn normalize_on(b: &mut [f64], set: &[usize]) -> bool {
    let norm = set.iter().map(|&j| b[j] * b[j]).sum::<f64>().sqrt();
    if !(norm > 1e-300) || !norm.is_finite() {
        return false;
    }
    b.iter_mut().for_each(|v| *v /= norm);
    true
}

/// Euclidean projection of `b[idx]` onto `{‖x‖₁ ≤ rad, ‖x‖_∞ ≤ cap}`.
pub fn project_l1_box(b: &mut [f64], idx: &[usize], rad: f64, cap: f64) {
    for &j in idx {
        b[j] = b[j].clamp(-cap, cap);
    }
    let l1: f64 = idx.iter().map(|&j| b[j].abs()).sum();
    if l1 <= rad {
        return;
    }
    // after clipping, shrinking by θ then re-clipping equals the joint projection
    let mass = |theta: f64| idx.iter().map(|&j| (b[j].abs() - theta).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, idx.iter().map(|&j| b[j].abs()).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > rad {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for &j in idx {
        b[j] = b[j].signum() * (b[j].abs() - hi).max(0.0);
    }
}

/// `set` padded to `n` elements with the largest `|β_j|` outside it
/// (ties to the smaller index).
fn pad_with_largest(set: &[usize], beta: &[f64], n: usize) -> Vec<usize> {
    let mut outside = complement(set, beta.len());
    outside.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()).then(a.cmp(&b)));
    let need = n.saturating_sub(set.len());
    union_sorted(set, &outside[..need.min(outside.len())])
}

/// Serializable summary of audited quantities; the CLI emits this shape.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct EigenReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub set_extremes: Vec<SetExtremes>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sparse_max: Vec<SparseEigen>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sparse_min: Vec<SparseEigen>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub restricted: Vec<RestrictedEigen>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub restricted_min: Vec<RestrictedEigen>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub condition_d: Vec<ConditionD>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SetExtremes {
    pub set: Vec<usize>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConditionD {
    pub s_star: usize,
    pub s0: Vec<usize>,
    pub value: f64,
}

impl EigenReport {
    /// Checks the ordering chain among the entries present. Returns one
    /// message per violation beyond `tol`.
    pub fn ordering_violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.restricted {
            if let Some(e) = self.set_extremes.iter().find(|e| e.set == r.set) {
                if r.phi_sq > e.lambda_min * e.lambda_min + tol {
                    out.push(format!("phi^2({}, {:?}, {}) exceeds Lambda_min^2 of the set", r.l, r.set, r.n));
                }
            }
            if let Some(base) = self.restricted.iter().find(|b| b.l == r.l && b.set == r.set && b.n == r.set.len()) {
                if r.phi_sq > base.phi_sq + tol {
                    out.push(format!("phi^2({}, {:?}, {}) exceeds phi^2(L, S)", r.l, r.set, r.n));
                }
            }
            if r.phi_sq + tol < 0.0 {
                out.push(format!("phi^2({}, {:?}, {}) is negative", r.l, r.set, r.n));
            }
        }
        for m in &self.restricted_min {
            if let Some(r) = self.restricted.iter().find(|r| r.l == m.l && r.set == m.set && r.n == m.n) {
                if m.phi_sq > r.phi_sq + tol {
                    out.push(format!("phi_min^2({}, {:?}, {}) exceeds phi^2", m.l, m.set, m.n));
                }
            }
        }
        out
    }
}
