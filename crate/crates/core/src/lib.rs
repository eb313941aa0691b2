//! Beyond-worst-case parity synthesis on finite MDPs.
//!
//! Decides `S(p1) ∧ AS(p2)` and `S(p1) ∧ P~c(p2)` (and the reachability
//! variants `S(p) ∧ AS(◇T)`, `S(p) ∧ P~c(◇T)`), builds witness strategies and
//! checks them exactly or by seeded simulation.

pub mod bwc;
pub mod components;
pub mod fixtures;
pub mod games;
pub mod graph;
mod linalg;
pub mod model;
pub mod oracle;
pub mod reach;
pub mod strategies;
pub mod verify;

pub use graph::StateSet;
pub use model::{parse_mdp, serialize_mdp, Mdp, Owner, PriorityView, Rational};
