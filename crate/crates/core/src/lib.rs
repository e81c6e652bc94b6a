//! Hypothesis selection over finite discrete distributions.
//!
//! Given candidates `H_0..H_{n-1}` and draws from an unknown `P`, the
//! selectors here return an index `i` with `tv(P, H_i) <= C * OPT + eps`
//! where `OPT = min_i tv(P, H_i)`. All numeric code is generic over
//! [`Scalar`]; the aliases below fix it to `f64`.

pub mod baseline;
pub mod dist;
pub mod error;
pub mod expected;
pub mod harness;
pub mod instances;
pub mod knownopt;
pub mod preprocess;
pub mod rng;
pub mod scalar;
pub mod threshold;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Distribution = dist::DiscreteDistribution<f64>;
pub type Hypotheses = dist::HypothesisSet<f64>;
pub type Table = dist::SemiDistanceTable<f64>;
pub type Planted = instances::PlantedInstance<f64>;
pub type HardInstance = instances::HardExpectedInstance<f64>;
pub type Mixture = expected::MixtureOutput<f64>;
