//! Spearman rank correlation.

use super::rank::rank;
use super::special::student_t_two_sided;
use super::{Approximation, Method, StatResult};
use crate::{Error, Real, Result};

/// Largest `n` for which the p-value is computed over all `n!` pairings.
pub const SPEARMAN_PERMUTATION_MAX_N: usize = 9;

/// ρ is the Pearson correlation of average ranks. For `n <= 9` the p-value
/// is the share of all `n!` re-pairings of the y ranks with `|ρ|` at least
/// the observed one; beyond that it uses `t = ρ sqrt((n-2)/(1-ρ²))` against
/// Student's t with `n - 2` degrees of freedom.
pub fn spearman_rho<F: Real>(x: &[F], y: &[F]) -> Result<StatResult<F>> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "spearman needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData("spearman needs at least 3 pairs".into()));
    }
    let (rx, ry) = (rank(x), rank(y));
    if rx.all_tied() || ry.all_tied() {
        return Err(Error::RankCorrelationUndefined);
    }
    // doubled ranks centred on n + 1 are integers
    let centre = (n + 1) as i64;
    let cx: Vec<i64> = rx.doubled.iter().map(|&r| r as i64 - centre).collect();
    let cy: Vec<i64> = ry.doubled.iter().map(|&r| r as i64 - centre).collect();
    let sxy: i64 = cx.iter().zip(&cy).map(|(a, b)| a * b).sum();
    let sxx: i64 = cx.iter().map(|a| a * a).sum();
    let syy: i64 = cy.iter().map(|b| b * b).sum();
    let to = |v: i64| F::from_i64(v).expect("fits");
    let rho = (to(sxy) / (to(sxx) * to(syy)).sqrt()).max(-F::one()).min(F::one());

    let (p, approximation) = if n <= SPEARMAN_PERMUTATION_MAX_N {
        (permutation_p(&cx, &cy, sxy), Approximation::Permutation)
    } else {
        let one = F::one();
        let df = F::from_count(n - 2);
        let denom = one - rho * rho;
        let p = if denom <= F::zero() {
            F::zero()
        } else {
            student_t_two_sided(rho * (df / denom).sqrt(), df)
        };
        (p, Approximation::TApprox)
    };

    Ok(StatResult {
        method: Method::SpearmanRho,
        statistic: rho,
        p_two_sided: p,
        effect_size: rho,
        n_used: n,
        n_excluded: 0,
        approximation,
        degenerate: false,
    })
}

/// Heap's algorithm over all orderings of `cy`.
fn permutation_p<F: Real>(cx: &[i64], cy: &[i64], observed: i64) -> F {
    let n = cy.len();
    let target = observed.abs();
    let mut perm = cy.to_vec();
    let mut c = vec![0usize; n];
    let dot = |p: &[i64]| -> i64 { cx.iter().zip(p).map(|(a, b)| a * b).sum() };
    let mut hits = u64::from(dot(&perm).abs() >= target);
    let mut total = 1u64;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += 1;
            if dot(&perm).abs() >= target {
                hits += 1;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    F::from_u64(hits).expect("fits") / F::from_u64(total).expect("fits")
}
