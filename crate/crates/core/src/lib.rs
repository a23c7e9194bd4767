//! Nonlinear independent component analysis for continuous-time signals.
//!
//! The crate simulates statistically independent source processes, mixes
//! them through invertible nonlinearities, and recovers the sources by
//! minimizing a signature-cumulant independence contrast. Recovery quality
//! is scored by the monomial discordance of Kendall concordance matrices.
//!
//! Module map:
//! - [`algebra`]: truncated free tensor algebra (words, shuffle and
//!   concatenation products, exp/log of formal series);
//! - [`signature`]: path signatures, expected signatures, signature
//!   cumulants and the independence contrast;
//! - [`sources`]: samplers for the contrastive source classes plus
//!   separability and contrastivity diagnostics;
//! - [`mixing`]: invertible mixing maps, demixing candidate families and
//!   the monomial-transformation test;
//! - [`optimize`]: grid search, Nelder–Mead and Adam on finite-difference
//!   gradients over the contrast objective;
//! - [`metrics`]: Kendall correlation, concordance matrices and the
//!   monomial discordance;
//! - [`io`]: the CSV/JSON interchange formats shared with the CLI.

pub mod algebra;
pub mod error;
pub mod metrics;
pub mod rng;
pub mod signature;

pub use algebra::{shuffle, TensorSeries, Word};
pub use error::{Error, Result};
pub use metrics::{
    concordance_matrix, kendall_tau, monomial_discordance, ConcordanceMatrix, ConcordanceMode,
};
pub use signature::{
    classical_contrast, contrast_ic, contrast_report, cross_index_set, expected_signature,
    normalize_unit_amplitude, path_signature, signature_cumulants, standardized_cumulants,
    ContrastOptions, ContrastReport, PathEnsemble, SamplePath,
};
