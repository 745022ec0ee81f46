//! Hypothesis tests, effect sizes, agreement coefficients and the paired
//! bootstrap. All tests are two-sided.

pub mod bootstrap;
pub mod descriptive;
pub mod fdr;
pub mod kappa;
pub mod mann_whitney;
pub mod mcnemar;
pub mod rank;
pub mod rng;
pub mod spearman;
pub mod special;
pub mod wilcoxon;

use serde::{Deserialize, Serialize};

pub use bootstrap::{paired_bootstrap_accuracy, resample_indices, BootstrapCI, PairedBootstrap};
pub use fdr::benjamini_hochberg;
pub use kappa::{cohens_kappa, fleiss_kappa, kappa_from_agreement, per_item_agreement, FleissKappa};
pub use mann_whitney::{cliffs_delta, mann_whitney_u, mann_whitney_u_with, MWU_EXACT_LIMIT};
pub use mcnemar::mcnemar_exact;
pub use spearman::{spearman_rho, SPEARMAN_PERMUTATION_MAX_N};
pub use wilcoxon::wilcoxon_signed_rank;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    WilcoxonSignedRank,
    MannWhitneyU,
    SpearmanRho,
    McnemarExact,
}

/// How the p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approximation {
    Exact,
    NormalApprox,
    TApprox,
    Permutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatResult<F> {
    pub method: Method,
    pub statistic: F,
    pub p_two_sided: F,
    /// Rank-biserial r, Cliff's δ, ρ, or the signed discordance share for
    /// McNemar.
    pub effect_size: F,
    pub n_used: usize,
    pub n_excluded: usize,
    pub approximation: Approximation,
    /// Set when the statistic is degenerate and `p` is 1 by convention.
    #[serde(default)]
    pub degenerate: bool,
}
