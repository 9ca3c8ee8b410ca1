//! Exact polyhedral models for cyclic binary on/off sequences whose on-runs
//! and off-runs have per-period length bounds.
//!
//! The crate enumerates the feasible sequences, builds several linear
//! formulations of their convex hull over exact rationals, and checks
//! integrality, hull, validity and facet properties of those formulations.

pub mod conjecture;
pub mod cuts;
pub mod error;
pub mod disjunctive;
pub mod expanded;
pub mod instance;
pub mod netflow;
pub mod rat;
pub mod ratpoly;
pub mod suites;
pub mod yzform;

pub use error::{Error, Result};
pub use instance::{Instance, YZPoint};
pub use rat::Rat;
