//! Monte-Carlo harness around the `sampdec-core` decoders: QAM modulation,
//! flat-fading channel generation, reproducible parallel experiment
//! engines, and file plumbing for the `sampdec` binary.

pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod modulation;
pub mod persist;
pub mod pipeline;

pub use config::{DecoderKind, DecoderSpec, ExperimentConfig, Preprocessing, RhoChoice};
pub use error::{CliError, Result};
pub use experiment::{run_llr_sweep, run_paired_dominance, run_ser_experiment, ExperimentResult};
