//! Auditing gender bias in instruction-guided speech synthesis.
//!
//! The prompt space crosses status, career and persona descriptors into
//! instructions. A classifier's judgments come back as a ledger, from which
//! the crate derives per-descriptor gender rates, pairwise and triple
//! interaction terms with permutation p-values, and encoder-side association
//! effect sizes.

pub mod encoder;
pub mod error;
pub mod interaction;
pub mod ledger;
pub mod prompt_space;
pub mod report;
pub mod seed;

pub use error::{Error, Result};
