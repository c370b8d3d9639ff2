//! Simulation and verification toolkit for rank-1 inhomogeneous random
//! graphs near criticality.
//!
//! The crate is organised bottom-up:
//!
//! - [`weights`]: weight vectors and their moment checks;
//! - [`graphgen`]: graph samplers with the capacity coupling;
//! - [`explorer`]: the breadth-first walk and component statistics;
//! - [`sbs`]: size-biased sampling without replacement and exact oracles;
//! - [`theory`]: closed-form predictions;
//! - [`harness`]: seeded Monte Carlo experiments.

pub mod error;
pub mod explorer;
pub mod fenwick;
pub mod graphgen;
pub mod harness;
pub mod rng;
pub mod sbs;
pub mod stats;
pub mod theory;
pub mod weights;

#[cfg(test)]
mod oracles;
#[cfg(test)]
mod properties;

pub use error::{Error, Result};
pub use explorer::{component_stats, explore, ComponentStats, ExplorationTrace};
pub use graphgen::{
    critical_p, sample_capacity_matrix, sample_fast, sample_reference, CapacityMatrix, EdgeLaw, GraphSample,
    ModelVariant, SamplerOptions,
};
pub use harness::{EventId, ExperimentConfig, ExperimentReport, ParamKind, ReplicationRow};
pub use sbs::{ConjectureReport, MeanCurve, MonotonicityReport, SbsDraw};
pub use theory::{predict, Prediction};
pub use weights::{ConditionsReport, MomentTargets, ToleranceProfile, WeightSpec, WeightVector};
