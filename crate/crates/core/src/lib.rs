//! Likelihood-free inference with ABC-SMC and adaptively weighted summary
//! statistics.
//!
//! Each generation of the sampler chooses the weights of a weighted
//! Euclidean ABC distance so that the k-nearest-neighbour estimate of the
//! Hellinger distance between the prior and the accepted particles is as
//! large as possible.
//!
//! The crate is split by concern:
//!
//! * [`divergence`]: kNN estimators of α-divergences and the Hellinger distance.
//! * [`models`]: the uniform toy model and Gillespie simulations of the
//!   death, dimerization and diffusion networks.
//! * [`summaries`]: summary vectors, weight vectors, weighted distance.
//! * [`smc`]: the ABC-SMC engine with a pluggable weight strategy.
//! * [`adapt`]: the Hellinger objective over weights and its optimizer.
//! * [`baselines`]: uniform, 1/σ, semi-automatic projection, subset selection.
//! * [`harness`]: configuration, metrics, artifacts, table reproductions.

pub mod adapt;
pub mod baselines;
pub mod divergence;
mod error;
pub mod harness;
pub mod models;
pub mod rng;
pub mod smc;
pub mod summaries;

pub use divergence::{DivergenceEstimate, SampleSet};
pub use error::{Error, Result};
pub use harness::config::{ExperimentConfig, Method, ModelId};
pub use models::{Model, ObservationSchedule, ReactionNetwork, Trajectory};
pub use smc::{KernelSpec, Particle, Population, PriorSpec};
pub use summaries::{SummaryVector, WeightVector};
