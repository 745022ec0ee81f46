//! Benjamini-Hochberg false discovery rate adjustment.

use crate::Real;

/// Step-up adjusted p-values in input order:
/// `adj_(i) = min_{j >= i} min(1, m p_(j) / j)` over the ascending sort.
pub fn benjamini_hochberg<F: Real>(p_values: &[F]) -> Vec<F> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).expect("no NaN").then(a.cmp(&b)));
    let mf = F::from_count(m);
    let mut adjusted = vec![F::zero(); m];
    let mut running = F::one();
    for (pos, &idx) in order.iter().enumerate().rev() {
        let scaled = (mf * p_values[idx] / F::from_count(pos + 1)).min(F::one());
        running = running.min(scaled);
        adjusted[idx] = running.max(p_values[idx]);
    }
    adjusted
}
