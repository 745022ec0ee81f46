//! Wilcoxon signed-rank test on paired differences.

use super::rank::rank;
use super::special::erfc;
use super::{Approximation, Method, StatResult};
use crate::metrics::is_zero_delta;
use crate::{Error, Real, Result};

/// Above this many non-zero pairs the exact null distribution is not
/// tabulated even if the configured cutoff asks for it.
const EXACT_HARD_LIMIT: usize = 120;

/// Zero differences are dropped, `|d|` is ranked with averaged ties and the
/// statistic is `W+`. With at most `exact_cutoff` non-zero pairs the p-value
/// comes from the exact sign-flip distribution of the (tied) ranks;
/// otherwise from the normal approximation with tie and continuity
/// correction. The effect size is the rank-biserial `(W+ - W-) / (W+ + W-)`.
pub fn wilcoxon_signed_rank<F: Real>(deltas: &[F], exact_cutoff: usize) -> Result<StatResult<F>> {
    let nonzero: Vec<F> = deltas.iter().copied().filter(|&d| !is_zero_delta(d)).collect();
    let n = nonzero.len();
    if n == 0 {
        return Err(Error::NoNonZeroPairs);
    }
    let abs: Vec<F> = nonzero.iter().map(|d| d.abs()).collect();
    let ranking = rank(&abs);
    let w_plus2: u64 = nonzero
        .iter()
        .zip(&ranking.doubled)
        .filter(|(d, _)| **d > F::zero())
        .map(|(_, &r)| r)
        .sum();
    let total2 = (n * (n + 1)) as u64;
    let w_plus = F::from_u64(w_plus2).expect("fits") * F::lit(0.5);
    let effect = (F::from_u64(2 * w_plus2).expect("fits") - F::from_u64(total2).expect("fits"))
        / F::from_u64(total2).expect("fits");

    let (p, approximation) = if n <= exact_cutoff && n <= EXACT_HARD_LIMIT {
        (exact_p::<F>(&ranking.doubled, w_plus2), Approximation::Exact)
    } else {
        let nf = F::from_count(n);
        let one = F::one();
        let mu = nf * (nf + one) / F::lit(4.0);
        let var = nf * (nf + one) * (F::lit(2.0) * nf + one) / F::lit(24.0)
            - F::from_u64(ranking.tie_term()).expect("fits") / F::lit(48.0);
        let dev = ((w_plus - mu).abs() - F::lit(0.5)).max(F::zero());
        let p = if var <= F::zero() {
            one
        } else {
            erfc(dev / var.sqrt() / F::lit(std::f64::consts::SQRT_2))
        };
        (p.min(one), Approximation::NormalApprox)
    };

    Ok(StatResult {
        method: Method::WilcoxonSignedRank,
        statistic: w_plus,
        p_two_sided: p,
        effect_size: effect,
        n_used: n,
        n_excluded: deltas.len() - n,
        approximation,
        degenerate: false,
    })
}

/// `min(1, 2 min(P(W+ <= w), P(W+ >= w)))` under random signs, counted over
/// sums of doubled ranks.
fn exact_p<F: Real>(doubled: &[u64], observed2: u64) -> F {
    let max: usize = doubled.iter().sum::<u64>() as usize;
    let mut counts = vec![0u128; max + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach).rev() {
            let c = counts[s];
            if c != 0 {
                counts[s + r] += c;
            }
        }
        reach += r;
    }
    let obs = observed2 as usize;
    let lower: u128 = counts[..=obs].iter().sum();
    let upper: u128 = counts[obs..].iter().sum();
    let total = 1u128 << doubled.len();
    let tail = lower.min(upper);
    let p = F::from_u128(2 * tail).expect("fits") / F::from_u128(total).expect("fits");
    p.min(F::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_negative_five() {
        let r = wilcoxon_signed_rank(&[-1.0, -2.0, -3.0, -4.0, -5.0], 25).unwrap();
        assert_eq!(r.effect_size, -1.0);
        assert_eq!(r.p_two_sided, 0.0625);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.approximation, Approximation::Exact);
    }

    #[test]
    fn small_mixed_case() {
        // |d| ranks 1.5, 3, 4, 1.5; W+ = 8.5 of 10. Sign flips with W+ >= 8.5:
        // {3,4,1.5}, {1.5,3,4}, {1.5,3,4,1.5} -> 3 of 16; lower tail larger.
        let r = wilcoxon_signed_rank::<f64>(&[1.0, 2.0, 3.0, -1.0], 25).unwrap();
        assert_eq!(r.statistic, 8.5);
        assert_eq!(r.p_two_sided, 2.0 * 3.0 / 16.0);
        assert!((r.effect_size - 0.7).abs() < 1e-15);
    }

    #[test]
    fn zeros_are_excluded() {
        let mut d = vec![-0.1; 115];
        d.extend(vec![0.05; 31]);
        d.extend(vec![0.0; 23]);
        let r = wilcoxon_signed_rank(&d, 25).unwrap();
        assert_eq!((r.n_used, r.n_excluded), (146, 23));
        assert_eq!(r.approximation, Approximation::NormalApprox);
        assert!(r.p_two_sided < 1e-10);
    }

    #[test]
    fn no_nonzero_pairs() {
        assert!(matches!(
            wilcoxon_signed_rank(&[0.0, 0.0], 25),
            Err(Error::NoNonZeroPairs)
        ));
    }

    #[test]
    fn negation_flips_effect_only() {
        let d = [0.3, -0.1, 0.7, 0.2, -0.4, 0.9, 0.15];
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        for cutoff in [0, 25] {
            let a = wilcoxon_signed_rank(&d, cutoff).unwrap();
            let b = wilcoxon_signed_rank(&neg, cutoff).unwrap();
            assert_eq!(a.effect_size, -b.effect_size);
            assert!((a.p_two_sided - b.p_two_sided).abs() < 1e-15);
        }
    }
}
