//! Simulation and analysis of heat-bath Glauber dynamics for the Ising model
//! through its information-percolation representation.
//!
//! The dynamics is a deterministic function of an initial configuration and
//! a random [`UpdateSequence`]. It can be evaluated forward in time
//! ([`forward`]) or backward from a target time ([`backward`]), where each
//! site's history either ends at an oblivious update or branches to its
//! neighbors. Connected histories form clusters ([`clusters`]) that are
//! classified by whether they carry information about the initial state.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backward;
pub mod clusters;
pub mod error;
pub mod experiment;
pub mod forward;
pub mod graph;
pub mod mixing;
pub mod replicas;
pub mod rule;
pub mod seeding;
pub mod stats;
pub mod update_stream;
pub mod zn;

pub use error::{Error, Result};
pub use graph::{Graph, GraphSpec, VertexSet};
pub use rule::{HeatBathRule, Spin, SpinConfig, Theta};
pub use update_stream::{UpdateEvent, UpdateSequence};
