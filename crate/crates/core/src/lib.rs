//! Public-private distribution learning.
//!
//! Candidate hypotheses are generated from public samples with grid-based
//! sample compression schemes, then one is selected with a pure
//! differentially private Scheffé tournament run on private samples.
//!
//! The crate is organised by stage:
//!
//! - [`distributions`]: Gaussian, mixture, product and finite distributions,
//!   densities, sampling and total variation distance.
//! - [`compression`]: public-data candidate generation, encoders and decoders.
//! - [`selection`]: Scheffé statistics and the exponential mechanism.
//! - [`pipeline`]: the end-to-end learners and the experiment harness.
//! - [`yatracos`]: the finite-domain minimum-distance learner with SmallDB.
//! - [`lowerbound`]: the flat-Gaussian hard family and its no-free-lunch
//!   quantities.

// `!(x > 0.0)` is how NaN gets rejected; index loops mirror the linear algebra.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod audit;
pub mod compression;
pub mod distributions;
pub mod error;
pub mod lowerbound;
pub mod pipeline;
pub mod rng;
pub mod selection;
pub mod yatracos;

pub use audit::{AuditEvent, AuditLog, Stage};
pub use compression::{CandidateSet, CompressionScheme, Encoding, GridSpec, Provenance};
pub use distributions::{
    DataRole, Dataset, Distribution, FiniteDist, GaussianParams, MixtureParams, ProductParams,
    TvEstimate, TvMethod,
};
pub use error::{Error, Result};
pub use pipeline::{LearnOutcome, LearnerConfig};
pub use rng::RngSeed;
pub use selection::{PrivacyBudget, SelectionResult};
