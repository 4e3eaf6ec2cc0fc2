//! Generalized LDPC coding toolkit.
//!
//! The crate builds generalized Tanner graphs (a regular LDPC base graph in
//! which a chosen subset of single parity checks is replaced by stronger
//! component-code constraints), decodes them with belief propagation under
//! flooding or check-node-sequential schedules, trains tabular Q-learning
//! policies that pick the check-node order, and measures frame error rate
//! and message complexity with a seeded Monte-Carlo harness.
//!
//! Numeric kernels (channel LLRs, message passing, action values) are
//! generic over the scalar type through [`scalar::LlrScalar`]; the aliases
//! at the crate root fix `f64`, which is what the command-line tools and
//! the experiment harness use.

pub mod alist;
pub mod channel;
pub mod component;
pub mod config;
pub mod decoder;
pub mod gf2;
pub mod graph;
pub mod harness;
pub mod random;
pub mod rl;
pub mod scalar;
pub mod seeds;

pub use component::ComponentCode;
pub use decoder::{DecodeResult, Schedule};
pub use graph::{BaseGraph, ExpandedParityMatrix, GeneralizationPlan, GeneralizedTannerGraph};
pub use rl::Hyperparams;

/// Saturation bound for every log-likelihood ratio in the toolkit: channel
/// outputs, messages, and posteriors are clamped to ±L_MAX.
pub const L_MAX: f64 = 30.0;

/// Scalar type used by the concrete aliases below and by the harness.
pub type Llr = f64;

/// Belief-propagation decoder over `f64` messages.
pub type Decoder = decoder::BpDecoder<Llr>;

/// Message state of one decode over `f64` messages.
pub type MessageState = decoder::MessageState<Llr>;

/// Tabular action-value store over `f64` entries.
pub type QTable = rl::QTable<Llr>;
