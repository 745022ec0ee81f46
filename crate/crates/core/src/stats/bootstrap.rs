//! Paired percentile bootstrap for accuracy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::descriptive::{mean, quantile_sorted, sample_sd};
use super::rng::{stream, uniform_index};
use crate::{Error, Real, Result};

/// Accuracies are fractions in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI<F> {
    pub point_estimate: F,
    pub mean: F,
    pub sd: F,
    pub ci_low: F,
    pub ci_high: F,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedBootstrap<F> {
    pub zero_shot: BootstrapCI<F>,
    pub agentic: BootstrapCI<F>,
    /// Per-replicate `(zero_shot, agentic)` accuracies in replicate order.
    #[serde(skip)]
    pub replicates: Vec<(F, F)>,
}

/// Question indices drawn with replacement for replicate `rep`.
pub fn resample_indices(seed: u64, rep: usize, q: usize) -> Vec<usize> {
    let mut rng = stream(seed, rep as u64);
    (0..q).map(|_| uniform_index(&mut rng, q)).collect()
}

/// Resamples questions `reps` times and applies each index vector to both
/// condition's flag lists. Replicates run in parallel on the current rayon
/// pool; replicate `i` draws from stream `(seed, i)`.
pub fn paired_bootstrap_accuracy<F: Real>(
    zero_shot: &[bool],
    agentic: &[bool],
    reps: usize,
    seed: u64,
) -> Result<PairedBootstrap<F>> {
    let q = zero_shot.len();
    if q == 0 {
        return Err(Error::InsufficientData("bootstrap needs at least one question".into()));
    }
    if agentic.len() != q {
        return Err(Error::InvalidArgument(format!(
            "paired flags differ in length: {q} vs {}",
            agentic.len()
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("bootstrap_reps must be positive".into()));
    }
    let qf = F::from_count(q);
    let replicates: Vec<(F, F)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let (mut a, mut b) = (0usize, 0usize);
            for i in resample_indices(seed, rep, q) {
                a += usize::from(zero_shot[i]);
                b += usize::from(agentic[i]);
            }
            (F::from_count(a) / qf, F::from_count(b) / qf)
        })
        .collect();
    let summarize = |flags: &[bool], pick: fn(&(F, F)) -> F| {
        let mut values: Vec<F> = replicates.iter().map(pick).collect();
        let m = mean(&values);
        let sd = sample_sd(&values);
        values.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
        BootstrapCI {
            point_estimate: F::from_count(flags.iter().filter(|&&f| f).count()) / qf,
            mean: m,
            sd,
            ci_low: quantile_sorted(&values, F::lit(0.025)),
            ci_high: quantile_sorted(&values, F::lit(0.975)),
            reps,
            seed,
        }
    };
    Ok(PairedBootstrap {
        zero_shot: summarize(zero_shot, |r| r.0),
        agentic: summarize(agentic, |r| r.1),
        replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_correct() {
        let flags = vec![true; 20];
        let b = paired_bootstrap_accuracy::<f64>(&flags, &flags, 200, 3).unwrap();
        assert_eq!(b.agentic.mean, 1.0);
        assert_eq!(b.agentic.sd, 0.0);
        assert_eq!((b.agentic.ci_low, b.agentic.ci_high), (1.0, 1.0));
    }

    #[test]
    fn deterministic_and_paired() {
        let zs: Vec<bool> = (0..50).map(|i| i % 3 != 0).collect();
        let ag: Vec<bool> = (0..50).map(|i| i % 5 != 0).collect();
        let a = paired_bootstrap_accuracy::<f64>(&zs, &ag, 300, 11).unwrap();
        let b = paired_bootstrap_accuracy::<f64>(&zs, &ag, 300, 11).unwrap();
        assert_eq!(a, b);
        // identical flags give identical replicates because indices are shared
        let same = paired_bootstrap_accuracy::<f64>(&zs, &zs, 300, 11).unwrap();
        assert!(same.replicates.iter().all(|(x, y)| x == y));
        assert_eq!(same.replicates.len(), 300);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(paired_bootstrap_accuracy::<f64>(&[], &[], 10, 0).is_err());
        assert!(paired_bootstrap_accuracy::<f64>(&[true], &[true, false], 10, 0).is_err());
        assert!(paired_bootstrap_accuracy::<f64>(&[true], &[true], 0, 0).is_err());
    }
}
