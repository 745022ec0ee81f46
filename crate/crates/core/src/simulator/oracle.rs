//! Brute-force reference p-values by full enumeration.
//!
//! Deliberately independent of the stats module: ranks are recomputed here
//! by pairwise comparison with exact equality, and every null distribution
//! is enumerated explicitly rather than tabulated.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub statistic: f64,
    pub p_two_sided: f64,
}

/// Average ranks, 1-based: `#{v < x} + (#{v == x} + 1) / 2`.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&x| {
            let below = values.iter().filter(|&&v| v < x).count() as f64;
            let equal = values.iter().filter(|&&v| v == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Every sign assignment of the `|d|` ranks; the p-value doubles the
/// smaller tail of the `W+` distribution.
pub fn oracle_wilcoxon(deltas: &[f64]) -> Result<OracleResult> {
    let nonzero: Vec<f64> = deltas.iter().copied().filter(|&d| d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Err(Error::NoNonZeroPairs);
    }
    if n > 20 {
        return Err(Error::TooLarge("wilcoxon oracle (n > 20)"));
    }
    let ranks = average_ranks(&nonzero.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let observed: f64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        le += u64::from(w <= observed);
        ge += u64::from(w >= observed);
    }
    let total = (1u64 << n) as f64;
    Ok(OracleResult {
        statistic: observed,
        p_two_sided: (2.0 * le.min(ge) as f64 / total).min(1.0),
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Next k-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Every split of the pooled sample into groups of the original sizes;
/// `p = P(|U - n_a n_b / 2| >= |u - n_a n_b / 2|)`.
pub fn oracle_mwu(a: &[f64], b: &[f64]) -> Result<OracleResult> {
    let (na, nb) = (a.len(), b.len());
    if na == 0 || nb == 0 {
        return Err(Error::InsufficientData("oracle needs two non-empty samples".into()));
    }
    let n = na + nb;
    if binomial(n, na) > 200_000 {
        return Err(Error::TooLarge("mann-whitney oracle (more than 200000 assignments)"));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    let offset = (na * (na + 1)) as f64 / 2.0;
    let centre = (na * nb) as f64 / 2.0;
    let observed = ranks[..na].iter().sum::<f64>() - offset;
    let target = (observed - centre).abs();
    let mut comb: Vec<usize> = (0..na).collect();
    let (mut hits, mut total) = (0u64, 0u64);
    loop {
        let u = comb.iter().map(|&i| ranks[i]).sum::<f64>() - offset;
        hits += u64::from((u - centre).abs() >= target);
        total += 1;
        if !next_combination(&mut comb, n) {
            break;
        }
    }
    Ok(OracleResult {
        statistic: observed,
        p_two_sided: hits as f64 / total as f64,
    })
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Lexicographic next permutation of indices.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Every ordering of the y ranks against the x ranks; counts `|ρ|` at least
/// the observed one, with a relative slack of `1e-12` for rounding.
pub fn oracle_spearman(x: &[f64], y: &[f64]) -> Result<OracleResult> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::InvalidArgument("oracle needs equal lengths".into()));
    }
    if n > 8 {
        return Err(Error::TooLarge("spearman oracle (n > 8)"));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    if rx.iter().all(|&r| r == rx[0]) || ry.iter().all(|&r| r == ry[0]) {
        return Err(Error::RankCorrelationUndefined);
    }
    let observed = pearson(&rx, &ry);
    let target = observed.abs() * (1.0 - 1e-12);
    let mut perm: Vec<usize> = (0..n).collect();
    let (mut hits, mut total) = (0u64, 0u64);
    loop {
        let py: Vec<f64> = perm.iter().map(|&i| ry[i]).collect();
        hits += u64::from(pearson(&rx, &py).abs() >= target);
        total += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(OracleResult {
        statistic: observed,
        p_two_sided: hits as f64 / total as f64,
    })
}

/// `min(1, 2 Σ_{i <= min(b, c)} C(b + c, i) / 2^(b + c))` in exact integers.
pub fn oracle_mcnemar(b: u64, c: u64) -> Result<OracleResult> {
    let n = (b + c) as usize;
    if n > 120 {
        return Err(Error::TooLarge("mcnemar oracle (n > 120)"));
    }
    let k = b.min(c) as usize;
    if n == 0 {
        return Ok(OracleResult {
            statistic: 0.0,
            p_two_sided: 1.0,
        });
    }
    let tail: u128 = (0..=k).map(|i| binomial(n, i)).sum();
    let p = 2.0 * tail as f64 / (1u128 << n) as f64;
    Ok(OracleResult {
        statistic: k as f64,
        p_two_sided: p.min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilcoxon_examples() {
        assert_eq!(oracle_wilcoxon(&[1.0, 2.0, 3.0]).unwrap().p_two_sided, 0.25);
        assert_eq!(
            oracle_wilcoxon(&[-1.0, -2.0, -3.0, -4.0, -5.0]).unwrap().p_two_sided,
            0.0625
        );
        assert!(oracle_wilcoxon(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn mwu_examples() {
        let r = oracle_mwu(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert!((r.p_two_sided - 2.0 / 6.0).abs() < 1e-15);
        assert_eq!(oracle_mwu(&[1.0], &[1.0]).unwrap().p_two_sided, 1.0);
        assert!((oracle_mwu(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap().p_two_sided - 0.1).abs() < 1e-15);
    }

    #[test]
    fn spearman_examples() {
        let r = oracle_spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]).unwrap();
        assert!((r.p_two_sided - 2.0 / 24.0).abs() < 1e-15);
        let r = oracle_spearman(&[1.0, 2.0, 3.0], &[2.0, 1.0, 3.0]).unwrap();
        let allowed = [2.0 / 6.0, 4.0 / 6.0, 1.0];
        assert!(allowed.iter().any(|p| (r.p_two_sided - p).abs() < 1e-15));
        assert!(oracle_spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).is_err());
    }

    #[test]
    fn mcnemar_examples() {
        assert_eq!(oracle_mcnemar(0, 10).unwrap().p_two_sided, 2.0 / 1024.0);
        assert_eq!(oracle_mcnemar(4, 4).unwrap().p_two_sided, 1.0);
    }

    #[test]
    fn combinations_are_complete() {
        let mut c = vec![0, 1, 2];
        let mut count = 1;
        while next_combination(&mut c, 6) {
            count += 1;
        }
        assert_eq!(count, 20);
    }
}
