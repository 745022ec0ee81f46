//! Average ranks with tie groups.

use crate::Real;

/// Ranks of `values` (1-based, ties averaged) stored doubled so they stay
/// integral, plus the size of every tie group. Values within
/// [`Real::tie_tolerance`] of the first member of a sorted run are tied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    pub doubled: Vec<u64>,
    pub tie_sizes: Vec<usize>,
}

impl Ranking {
    pub fn rank<F: Real>(&self, i: usize) -> F {
        F::from_u64(self.doubled[i]).expect("rank fits") * F::lit(0.5)
    }

    pub fn ranks<F: Real>(&self) -> Vec<F> {
        (0..self.doubled.len()).map(|i| self.rank(i)).collect()
    }

    /// `Σ (t³ - t)` over tie groups.
    pub fn tie_term(&self) -> u64 {
        self.tie_sizes.iter().map(|&t| (t as u64).pow(3) - t as u64).sum()
    }

    pub fn all_tied(&self) -> bool {
        self.tie_sizes.len() == 1 && self.doubled.len() > 1
    }
}

pub fn rank<F: Real>(values: &[F]) -> Ranking {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("no NaN"));
    let mut doubled = vec![0u64; n];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < n {
        let head = values[order[i]];
        let mut j = i + 1;
        while j < n && F::approx_eq(values[order[j]], head) {
            j += 1;
        }
        // positions i+1 ..= j share rank (i + 1 + j) / 2
        let d = (i + 1 + j) as u64;
        for &k in &order[i..j] {
            doubled[k] = d;
        }
        tie_sizes.push(j - i);
        i = j;
    }
    Ranking { doubled, tie_sizes }
}
