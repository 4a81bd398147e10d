//! Learn lifted STRIPS domains from labeled state graphs.
//!
//! The pipeline: a [`graphio::LabeledGraph`] is translated by [`encode`] into
//! clauses for a fixed object count, [`solve`] minimizes the model cost
//! lexicographically, and [`learner`] sweeps object counts and re-checks every
//! decoded model against [`semantics::expand`] with [`isocheck`].

pub mod encode;
pub mod generators;
pub mod graphio;
pub mod isocheck;
pub mod learner;
pub mod model;
pub mod par;
pub mod report;
pub mod semantics;
pub mod solve;

pub use graphlift_sat as sat;
