//! Spectrum allocation between secondary users (SUs) and licensed primary-user
//! (PU) bands as a one-to-one matching game.
//!
//! Every SU senses every band, scores it with the log a-posteriori ratio of
//! PU activity, and proposes to bands in order of how confident it is that
//! the band is vacant. Proposals carry a utility that mixes that confidence
//! with the achievable rate; proposals with non-positive utility are
//! dropped before the deferred-acceptance rounds start. Inactive PUs hold
//! the best offer seen so far, active PUs refuse everything.
//!
//! The numerical core is generic over the floating-point type (see
//! [`Scalar`]); the aliases below fix it to `f64`, which is what the
//! harness and CLI use.

pub mod detection;
pub mod error;
pub mod fuzz;
pub mod harness;
pub mod matching;
pub mod matrix;
pub mod metrics;
pub mod preferences;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use detection::Hypothesis;
pub use matching::Matching;
pub use metrics::Algorithm;
pub use preferences::{ListPolicy, ProposalOrder};

pub type ScenarioConfig = scenario::ScenarioConfig<f64>;
pub type NetworkInstance = scenario::NetworkInstance<f64>;
pub type ObservationMatrix = detection::ObservationMatrix<f64>;
pub type DetectionMatrix = detection::DetectionMatrix<f64>;
pub type ProposalTable = preferences::ProposalTable<f64>;
pub type PuUtilityFn = preferences::PuUtilityFn<f64>;
pub type TrialMetrics = metrics::TrialMetrics<f64>;
pub type Matrix = matrix::Matrix<f64>;

pub type ScenarioConfig32 = scenario::ScenarioConfig<f32>;
pub type NetworkInstance32 = scenario::NetworkInstance<f32>;
pub type ProposalTable32 = preferences::ProposalTable<f32>;
pub type PuUtilityFn32 = preferences::PuUtilityFn<f32>;
