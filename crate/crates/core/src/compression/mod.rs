//! Candidate generation from public data: grid-correction compression
//! schemes for Gaussians, and their lifts to mixtures and products.

mod bits;
mod combine;
mod fit;
mod gaussian_grid;
mod grid;
mod list;
mod set;

pub use bits::Bits;
pub use combine::{kmeans, mixture_candidates, product_candidates, simplex_grid, MixtureGrid};
pub use fit::{gaussian_fit, robust_gaussian_fit, RIDGE};
pub use gaussian_grid::{encode_gaussian, gaussian_candidate_grid, Anchor, GaussianGrid};
pub use grid::{Axis, GridSpec};
pub use list::{compression_from_list_learner, packing_list_size, ListEncoding};
pub use set::{
    CandidateSet, CompressionScheme, DecoderId, Encoding, Provenance, DEFAULT_CANDIDATE_CAP,
};
