//! Community detection in tripartite hypergraphs.
//!
//! A tripartite hypergraph has three disjoint node sets (red, green, blue) and
//! hyperedges that join exactly one node of each color. Communities are found
//! per color by minimizing a two-part description length: the bits needed to
//! send the community summary (memberships plus the community connectivity
//! tensor) and the bits needed to recover the exact hyperedges given that
//! summary.
//!
//! The crate provides:
//!
//! - [`TripartiteHypergraph`] and [`Partition`] with their text/JSON formats,
//! - the description-length engine in [`mdl`], including an incrementally
//!   maintained [`MdlState`] for single-node moves,
//! - the local-moving/coarsening optimizer in [`optimizer`],
//! - planted-partition generators in [`synth`],
//! - NMI-based evaluation in [`metrics`],
//! - an exhaustive minimizer for tiny inputs in [`oracle`],
//! - the parameter sweep harness in [`sweep`].
//!
//! All real-valued computations are generic over the scalar type through
//! [`Real`]; the `*64` aliases below fix it to `f64`, which is what the CLI and
//! the tolerance-bearing tests use.

pub mod error;
pub mod hypergraph;
pub mod mdl;
pub mod metrics;
pub mod num;
pub mod optimizer;
pub mod oracle;
pub mod partition;
pub mod sweep;
pub mod synth;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use hypergraph::{Color, Hyperedge, TripartiteHypergraph};
pub use mdl::{MdlState, Quality, Target};
pub use metrics::ConfusionMatrix;
pub use num::Real;
pub use optimizer::{DetectionResult, OptimizerConfig};
pub use partition::{canonicalize, Partition};
pub use synth::GeneratorConfig;

/// Description lengths in `f64` bits.
pub type Quality64 = Quality<f64>;
/// Incremental description-length state with `f64` bookkeeping.
pub type MdlState64<'g> = MdlState<'g, f64>;
/// Optimizer settings with an `f64` acceptance threshold.
pub type OptimizerConfig64 = OptimizerConfig<f64>;
/// Detection output with `f64` description lengths.
pub type DetectionResult64 = DetectionResult<f64>;
/// Description lengths in `f32` bits. Too coarse for the 1e-9 tolerances, but
/// usable for quick scoring.
pub type Quality32 = Quality<f32>;
