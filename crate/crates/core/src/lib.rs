//! Multiplicative (Gibbs) measures on integer partitions and the extreme
//! value statistics of their largest parts.
//!
//! The numeric core is generic over [`Real`] (`f32`, `f64`); the aliases
//! below fix `f64`, which is what the experiment harness uses. Exact
//! partition counts use arbitrary-precision integers.

pub mod asymptotics;
pub mod counts;
pub mod error;
pub mod measure;
pub mod oracle;
pub mod partition;
pub mod sampler;
pub mod scalar;
pub mod special;
pub mod weights;

pub use error::{Error, Result};
pub use measure::{MultiplicativeMeasure, Statistics, TailProfile};
pub use partition::Partition;
pub use scalar::Real;
pub use weights::{LatticeCountTable, WeightKind, WeightSequence};

pub type Weights = WeightSequence<f64>;
pub type Measure = MultiplicativeMeasure<f64>;
pub type Rescaling = asymptotics::RescalingSpec<f64>;
pub type Weights32 = WeightSequence<f32>;
pub type Measure32 = MultiplicativeMeasure<f32>;
pub type Rescaling32 = asymptotics::RescalingSpec<f32>;
