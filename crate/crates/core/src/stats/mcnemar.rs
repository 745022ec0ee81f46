//! Exact McNemar test on discordant pair counts.

use super::special::ln_gamma;
use super::{Approximation, Method, StatResult};
use crate::Real;

/// `b`: pairs correct only under the first condition, `c`: only under the
/// second. `p = min(1, 2 P(Bin(b + c, 1/2) <= min(b, c)))`. With no
/// discordant pairs `p = 1` and the result is marked degenerate. The effect
/// size is `(b - c) / (b + c)`.
pub fn mcnemar_exact<F: Real>(b: u64, c: u64) -> StatResult<F> {
    let n = b + c;
    let k = b.min(c);
    let (p, effect, degenerate) = if n == 0 {
        (F::one(), F::zero(), true)
    } else {
        let tail = binomial_half_cdf::<F>(n, k);
        let eff = (F::from_u64(b).expect("fits") - F::from_u64(c).expect("fits")) / F::from_u64(n).expect("fits");
        ((F::lit(2.0) * tail).min(F::one()), eff, false)
    };
    StatResult {
        method: Method::McnemarExact,
        statistic: F::from_u64(k).expect("fits"),
        p_two_sided: p,
        effect_size: effect,
        n_used: n as usize,
        n_excluded: 0,
        approximation: Approximation::Exact,
        degenerate,
    }
}

/// `P(Bin(n, 1/2) <= k)`.
fn binomial_half_cdf<F: Real>(n: u64, k: u64) -> F {
    if n <= 1000 {
        // pmf recursion from 0.5^n, which stays normal for n <= 1000
        let mut term = F::lit(0.5).powi(n as i32);
        let mut sum = term;
        for i in 0..k {
            term = term * F::from_u64(n - i).expect("fits") / F::from_u64(i + 1).expect("fits");
            sum = sum + term;
        }
        sum
    } else {
        let nf = F::from_u64(n).expect("fits");
        let ln_half = F::lit(0.5).ln();
        let mut sum = F::zero();
        for i in 0..=k {
            let fi = F::from_u64(i).expect("fits");
            let ln_choose = ln_gamma(nf + F::one()) - ln_gamma(fi + F::one()) - ln_gamma(nf - fi + F::one());
            sum = sum + (ln_choose + nf * ln_half).exp();
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_counts_give_one() {
        let r = mcnemar_exact::<f64>(7, 7);
        assert_eq!(r.p_two_sided, 1.0);
        assert!(!r.degenerate);
    }

    #[test]
    fn one_sided_discordance() {
        let r = mcnemar_exact::<f64>(0, 10);
        assert_eq!(r.p_two_sided, 2.0 / 1024.0);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.effect_size, -1.0);
    }

    #[test]
    fn five_versus_fifteen() {
        // 2 * (1 + 20 + 190 + 1140 + 4845 + 15504) / 2^20
        let want = 2.0 * 21_700.0 / 1_048_576.0;
        let r = mcnemar_exact::<f64>(5, 15);
        assert!((r.p_two_sided - want).abs() < 1e-15);
        assert!((r.p_two_sided - 0.0414).abs() < 1e-4);
    }

    #[test]
    fn no_discordance_is_flagged() {
        let r = mcnemar_exact::<f64>(0, 0);
        assert_eq!(r.p_two_sided, 1.0);
        assert!(r.degenerate);
    }

    #[test]
    fn large_n_branches_agree() {
        let a: f64 = binomial_half_cdf(1000, 480);
        let b = {
            let nf = 1000.0_f64;
            (0..=480u64)
                .map(|i| {
                    let fi = i as f64;
                    (ln_gamma(nf + 1.0) - ln_gamma(fi + 1.0) - ln_gamma(nf - fi + 1.0) + nf * 0.5f64.ln()).exp()
                })
                .sum::<f64>()
        };
        assert!(((a - b) / a).abs() < 1e-10);
        assert!(mcnemar_exact::<f64>(600, 700).p_two_sided < 0.01);
    }
}
