use crate::Real;

pub fn mean<F: Real>(xs: &[F]) -> F {
    if xs.is_empty() {
        return F::nan();
    }
    xs.iter().fold(F::zero(), |a, &x| a + x) / F::from_count(xs.len())
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two
/// values.
pub fn sample_sd<F: Real>(xs: &[F]) -> F {
    if xs.len() < 2 {
        return F::zero();
    }
    let m = mean(xs);
    let ss = xs.iter().fold(F::zero(), |a, &x| a + (x - m) * (x - m));
    (ss / F::from_count(xs.len() - 1)).sqrt()
}

/// Linear-interpolation quantile of sorted data (position `q * (n - 1)`).
pub fn quantile_sorted<F: Real>(sorted: &[F], q: F) -> F {
    match sorted.len() {
        0 => F::nan(),
        1 => sorted[0],
        n => {
            let pos = q * F::from_count(n - 1);
            let lo = pos.floor();
            let i = lo.to_usize().unwrap_or(0).min(n - 1);
            let frac = pos - lo;
            if i + 1 >= n {
                sorted[n - 1]
            } else {
                sorted[i] + (sorted[i + 1] - sorted[i]) * frac
            }
        }
    }
}

pub fn quantile<F: Real>(xs: &[F], q: F) -> F {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    quantile_sorted(&v, q)
}

pub fn median<F: Real>(xs: &[F]) -> F {
    quantile(xs, F::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(mean(&xs), 2.5);
        assert_eq!(median(&xs), 2.5);
        assert_eq!(quantile(&xs, 0.25), 1.75);
        assert_eq!(quantile(&xs, 0.75), 3.25);
        assert!((sample_sd(&xs) - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(quantile(&[7.0], 0.9), 7.0);
        assert!(mean::<f64>(&[]).is_nan());
    }
}
