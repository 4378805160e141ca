//! Online informative sampling over semantic feature streams.
//!
//! The sampler keeps a bounded set of the most distinctive records seen so
//! far (surprise scoring against the current set, admission above the mean
//! nearest-neighbour distance, greedy k-center eviction). The [`srum`]
//! module scores a finished sample against human-picked references.

pub mod cli;
pub mod distance;
mod error;
pub mod featstream;
pub mod kcenter;
pub mod sampler;
pub mod srum;
pub mod types;

pub use distance::DistanceKind;
pub use error::{Error, Result};
pub use sampler::{Sampler, SamplerConfig, StepOutcome};
pub use srum::{LabelMap, SrumParams, SrumReport};
pub use types::{average_pool, max_normalize, FeatureVector, FrameRecord, StreamHeader};
