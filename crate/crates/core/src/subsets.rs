//! Enumeration and sampling of index subsets.

use rand::seq::index::sample;
use rand::Rng;

/// `C(n, k)` as a float; saturates to `+∞` instead of overflowing.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Lexicographic `k`-combinations of `items`.
pub struct Combinations<'a> {
    items: &'a [usize],
    idx: Vec<usize>,
    done: bool,
}

impl<'a> Combinations<'a> {
    pub fn new(items: &'a [usize], k: usize) -> Self {
        Combinations { items, idx: (0..k).collect(), done: k > items.len() }
    }
}

impl Iterator for Combinations<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| self.items[i]).collect();
        let (n, k) = (self.items.len(), self.idx.len());
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < n - k + i {
                self.idx[i] += 1;
                for t in i + 1..k {
                    self.idx[t] = self.idx[t - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// All supersets of `base` with size in `base.len()..=max_size`, ordered by
/// size and then lexicographically. `pool` must be the complement of `base`.
pub fn supersets_up_to(base: &[usize], pool: &[usize], max_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for extra in 0..=max_size.saturating_sub(base.len()).min(pool.len()) {
        for add in Combinations::new(pool, extra) {
            out.push(union_sorted(base, &add));
        }
    }
    out
}

/// Number of sets [`supersets_up_to`] would return.
pub fn count_supersets_up_to(base_len: usize, pool_len: usize, max_size: usize) -> f64 {
    (0..=max_size.saturating_sub(base_len).min(pool_len)).map(|k| binomial(pool_len, k)).sum()
}

pub fn union_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// `base` plus `extra` distinct elements drawn uniformly from `pool`.
pub fn random_superset<R: Rng + ?Sized>(rng: &mut R, base: &[usize], pool: &[usize], extra: usize) -> Vec<usize> {
    let picks = sample(rng, pool.len(), extra.min(pool.len()));
    let add: Vec<usize> = picks.iter().map(|i| pool[i]).collect();
    union_sorted(base, &add)
}

/// Order-sensitive 64-bit mix of a sequence of words (SplitMix64 finalizer).
pub fn mix64(words: impl IntoIterator<Item = u64>) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for w in words {
        h ^= w;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_are_lexicographic_and_complete() {
        let items = [0, 1, 2, 3];
        let all: Vec<_> = Combinations::new(&items, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(Combinations::new(&items, 0).count(), 1);
        assert_eq!(Combinations::new(&items, 5).count(), 0);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(60, 5), 5_461_512.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
    }

    #[test]
    fn superset_count_matches_enumeration() {
        let base = [1];
        let pool = [0, 2, 3, 4];
        let sets = supersets_up_to(&base, &pool, 3);
        assert_eq!(sets.len() as f64, count_supersets_up_to(1, 4, 3));
        assert!(sets.iter().all(|s| s.contains(&1) && s.len() <= 3));
    }
}
