//! Lattice decoding by sampling.
//!
//! The crate decodes integer least-squares problems `y = H x + n` by
//! drawing (or deterministically expanding) randomized roundings of the
//! successive-cancellation recursion. The pieces:
//!
//! * [`matrix`], [`qr`], [`lll`], [`complex`], [`system`] - small dense
//!   linear algebra: QR with positive diagonal, lattice reduction,
//!   complex-to-real embedding and the regularized (MMSE) extension.
//! * [`gaussian`] - per-level discrete Gaussian rounding tables.
//! * [`decoder`] - successive cancellation, randomized sampling, its
//!   derandomized tree expansion, and fixed-complexity two-stage decoding.
//! * [`tuning`] - closed-form and root-solved parameter choices linking
//!   sample size, concentration and decoding radius.
//! * [`labeling`], [`llr`] - Gray bit maps and candidate-list soft output.
//! * [`oracle`] - exhaustive references the fast paths are tested against.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! `*64`/`*32` aliases below pick a concrete scalar.

pub mod complex;
pub mod decoder;
pub mod error;
pub mod gaussian;
pub mod labeling;
pub mod llr;
pub mod lll;
pub mod matrix;
pub mod oracle;
pub mod qr;
pub mod scalar;
pub mod system;
pub mod tuning;

pub use decoder::{
    derandomized_decode, derandomized_decode_with_stats, fsd_order, randomized_decode, sic_decode,
    two_stage_decode, two_stage_decode_with_stats, Candidate, CandidateList, DecodeStats,
    DerandConfig, DerandMode, RandomizedOutcome,
};
pub use error::{Error, Result};
pub use gaussian::SamplerParams;
pub use labeling::BitLabeling;
pub use llr::{list_llr, list_llr_with_clamp, list_llr_with_prior, LlrVector, DEFAULT_LLR_CLAMP};
pub use matrix::{IntMatrix, Matrix};
pub use oracle::{
    enumerate_radius, exact_map_llr, exact_sampling_probability, maxlog_llr, ml_sphere_decode,
    ConstellationBox, EXHAUSTIVE_GUARD,
};
pub use qr::{qr_decompose, QrFactors};
pub use scalar::Real;
pub use system::{mmse_extend, ExtendedSystem};

pub type Matrix64 = matrix::Matrix<f64>;
pub type Matrix32 = matrix::Matrix<f32>;
pub type CMatrix64 = complex::CMatrix<f64>;
pub type CMatrix32 = complex::CMatrix<f32>;
pub type QrFactors64 = qr::QrFactors<f64>;
pub type Candidate64 = decoder::Candidate<f64>;
pub type CandidateList64 = decoder::CandidateList<f64>;
pub type DerandConfig64 = decoder::DerandConfig<f64>;
pub type SamplerParams64 = gaussian::SamplerParams<f64>;
pub type LlrVector64 = llr::LlrVector<f64>;
