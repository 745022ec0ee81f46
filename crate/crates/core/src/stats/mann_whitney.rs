//! Mann-Whitney U test and Cliff's delta.

use super::rank::rank;
use super::special::erfc;
use super::{Approximation, Method, StatResult};
use crate::{Error, Real, Result};

/// `n_a * n_b` at or below which the exact permutation distribution is used.
pub const MWU_EXACT_LIMIT: usize = 10_000;

/// `(#{a > b} - #{a < b}) / (n_a n_b)` over all cross pairs.
pub fn cliffs_delta<F: Real>(a: &[F], b: &[F]) -> Result<F> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData(
            "Cliff's delta needs two non-empty samples".into(),
        ));
    }
    let mut sorted = b.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    let (mut greater, mut less) = (0u64, 0u64);
    for &x in a {
        let tol = F::tie_tolerance(x, x);
        let below = sorted.partition_point(|&y| y < x - tol);
        let not_above = sorted.partition_point(|&y| y <= x + tol);
        greater += below as u64;
        less += (sorted.len() - not_above) as u64;
    }
    let pairs = F::from_count(a.len()) * F::from_count(b.len());
    Ok((F::from_u64(greater).expect("fits") - F::from_u64(less).expect("fits")) / pairs)
}

pub fn mann_whitney_u<F: Real>(a: &[F], b: &[F]) -> Result<StatResult<F>> {
    mann_whitney_u_with(a, b, MWU_EXACT_LIMIT)
}

/// `U` of sample `a` from joint average ranks. When `n_a * n_b <=
/// exact_limit` the p-value is `P(|U - E U| >= |u - E U|)` over every
/// assignment of the pooled (tied) ranks to the groups; otherwise the normal
/// approximation with tie and continuity correction is used. The effect size
/// is Cliff's δ of `a` over `b`.
pub fn mann_whitney_u_with<F: Real>(a: &[F], b: &[F], exact_limit: usize) -> Result<StatResult<F>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData(
            "Mann-Whitney U needs two non-empty samples".into(),
        ));
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<F> = a.iter().chain(b).copied().collect();
    let ranking = rank(&pooled);
    let ra2: u64 = ranking.doubled[..na].iter().sum();
    let half = F::lit(0.5);
    let u = F::from_u64(ra2).expect("fits") * half - F::from_count(na * (na + 1)) * half;
    let delta = cliffs_delta(a, b)?;

    let (p, approximation) = if na * nb <= exact_limit {
        (exact_p(&ranking.doubled, na, ra2), Approximation::Exact)
    } else {
        let (naf, nbf, nf) = (F::from_count(na), F::from_count(nb), F::from_count(n));
        let mu = naf * nbf * half;
        let tie = F::from_u64(ranking.tie_term()).expect("fits") / (nf * (nf - F::one()));
        let var = naf * nbf / F::lit(12.0) * ((nf + F::one()) - tie);
        let p = if var <= F::zero() {
            F::one()
        } else {
            let dev = ((u - mu).abs() - half).max(F::zero());
            erfc(dev / var.sqrt() / F::lit(std::f64::consts::SQRT_2))
        };
        (p.min(F::one()), Approximation::NormalApprox)
    };

    Ok(StatResult {
        method: Method::MannWhitneyU,
        statistic: u,
        p_two_sided: p,
        effect_size: delta,
        n_used: n,
        n_excluded: 0,
        approximation,
        degenerate: false,
    })
}

/// Counts size-`k` subsets of the pooled doubled ranks by their sum, using
/// the smaller group. Counts are kept in `f64` (exact below 2^53).
fn exact_p<F: Real>(doubled: &[u64], na: usize, ra2: u64) -> F {
    let n = doubled.len();
    let nb = n - na;
    let total2: u64 = doubled.iter().sum();
    // work with the smaller group; its centred sum has the same magnitude
    let (k, obs2) = if na <= nb { (na, ra2) } else { (nb, total2 - ra2) };
    let centre2 = (k as u64) * (n as u64 + 1);
    let obs_dev = obs2.abs_diff(centre2);

    let mut sorted = doubled.to_vec();
    sorted.sort_unstable();
    // prefix[j]: sum of the j smallest ranks; bounds the reachable sums of
    // every j-subset of the first i elements
    let prefix: Vec<usize> = std::iter::once(0)
        .chain(sorted.iter().scan(0usize, |acc, &r| {
            *acc += r as usize;
            Some(*acc)
        }))
        .collect();
    let max_sum = prefix[n] - prefix[n - k];
    let width = max_sum + 1;
    // dp[j * width + s]: subsets of size j with doubled-rank sum s
    let mut dp = vec![0f64; (k + 1) * width];
    dp[0] = 1.0;
    for (i, &r) in sorted.iter().enumerate() {
        let r = r as usize;
        let top = (i + 1).min(k);
        let bottom = k.saturating_sub(n - i - 1).max(1);
        for j in (bottom..=top).rev() {
            let (lo, hi) = dp.split_at_mut(j * width);
            let prev = &lo[(j - 1) * width..j * width];
            let cur = &mut hi[..width];
            let from = prefix[j - 1];
            let to = prefix[i] - prefix[i + 1 - j];
            for (c, p) in cur[from + r..=to + r].iter_mut().zip(&prev[from..=to]) {
                *c += p;
            }
        }
    }
    let row = &dp[k * width..];
    let (mut hit, mut all) = (0f64, 0f64);
    for (s, &c) in row.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        all += c;
        if (s as u64).abs_diff(centre2) >= obs_dev {
            hit += c;
        }
    }
    F::lit((hit / all).min(1.0))
}
