//! Marketing-mix modeling toolkit.
//!
//! The pipeline runs from synthetic or ingested monthly data through OLS and
//! stepwise regression, principal-component extraction with quartimax
//! rotation, a factor regression whose coefficients become a linear
//! objective in predictor Z scores, a bounded LP allocation, and a PC-pattern
//! causal graph over all variables.

pub mod causal;
pub mod data;
pub mod example;
pub mod factor;
pub mod linalg;
pub mod mixopt;
pub mod pipeline;
pub mod report;
pub mod scenario;
pub mod stats;
pub mod synth;
