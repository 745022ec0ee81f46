//! Fleiss' and Cohen's kappa.

use std::hash::Hash;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleissKappa<F> {
    pub p_bar: F,
    pub p_e: F,
    pub kappa: F,
    pub items: usize,
    pub raters: usize,
}

/// `P_i = (Σ_j n_ij² - n) / (n (n - 1))` for one item rated by `n` raters.
pub fn per_item_agreement<F: Real>(counts: &[usize], n: usize) -> Result<F> {
    if n < 2 {
        return Err(Error::InvalidArgument("agreement needs at least 2 raters".into()));
    }
    let total: usize = counts.iter().sum();
    if total != n {
        return Err(Error::InvalidArgument(format!(
            "item has {total} ratings, expected {n}"
        )));
    }
    let sq: usize = counts.iter().map(|c| c * c).sum();
    Ok(F::from_count(sq - n) / F::from_count(n * (n - 1)))
}

/// `(P̄ - P̄_e) / (1 - P̄_e)`, rejecting `P̄_e = 1`.
pub fn kappa_from_agreement<F: Real>(p_bar: F, p_e: F) -> Result<F> {
    if (F::one() - p_e).abs() <= F::tie_tolerance(p_e, F::one()) {
        return Err(Error::KappaUndefined);
    }
    Ok((p_bar - p_e) / (F::one() - p_e))
}

/// Fleiss' κ over an items × categories count table with a constant number
/// of raters per item.
pub fn fleiss_kappa<F: Real>(table: &[Vec<usize>]) -> Result<FleissKappa<F>> {
    let first = table
        .first()
        .ok_or_else(|| Error::InsufficientData("fleiss kappa needs at least one item".into()))?;
    let n: usize = first.iter().sum();
    let k = first.len();
    if table.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidArgument(
            "rating table rows differ in category count".into(),
        ));
    }
    let mut p_sum = F::zero();
    let mut totals = vec![0usize; k];
    for row in table {
        p_sum = p_sum + per_item_agreement::<F>(row, n)?;
        for (t, c) in totals.iter_mut().zip(row) {
            *t += c;
        }
    }
    let items = F::from_count(table.len());
    let p_bar = p_sum / items;
    let all = F::from_count(table.len() * n);
    let p_e = totals
        .iter()
        .map(|&t| F::from_count(t) / all)
        .fold(F::zero(), |acc, p| acc + p * p);
    let kappa = kappa_from_agreement(p_bar, p_e)?;
    Ok(FleissKappa {
        p_bar,
        p_e,
        kappa,
        items: table.len(),
        raters: n,
    })
}

/// Cohen's κ for two raters labelling the same items.
pub fn cohens_kappa<F: Real, L: Eq + Hash + Clone>(a: &[L], b: &[L]) -> Result<F> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "label lists differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InsufficientData("cohen's kappa needs at least one item".into()));
    }
    let mut margins: IndexMap<L, (usize, usize)> = IndexMap::new();
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        margins.entry(x.clone()).or_default().0 += 1;
        margins.entry(y.clone()).or_default().1 += 1;
        agree += usize::from(x == y);
    }
    let n = F::from_count(a.len());
    let p_o = F::from_count(agree) / n;
    let p_e = margins.values().fold(F::zero(), |acc, &(ca, cb)| {
        acc + F::from_count(ca) / n * (F::from_count(cb) / n)
    });
    kappa_from_agreement(p_o, p_e)
}
