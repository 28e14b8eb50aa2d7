//! Correlation polytopes of local-friendliness scenarios.
//!
//! The crate builds, classifies and certifies the three nested correlation
//! sets of a scenario in which some parties can query an enclosed observer
//! (their "friend"): the Bell-local polytope, the local-friendliness (LF)
//! polytope, and the no-signalling polytope. Everything on the geometry
//! side is exact: arbitrary-precision rational linear programming with
//! verifiable certificates, double-description conversions between vertex
//! and facet representations, and constructive extraction of local
//! hidden-variable models from LF-compatible behaviours where the theory
//! guarantees one exists.

pub mod behaviour;
pub mod geometry;
pub mod lhv;
pub mod polytopes;
pub mod quantum;
pub mod rational;
pub mod scenario;

pub use rational::Rat;
pub use scenario::Scenario;
