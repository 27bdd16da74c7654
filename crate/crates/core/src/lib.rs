//! Exact verification workbench for the bunkbed inequality
//! ℙ(u ↔ v) ≥ ℙ(u ↔ v′) on bunkbed graphs, with a focus on complete graphs.

pub mod auxiliary;
pub mod cli;
pub mod component;
pub mod counting;
pub mod engine;
pub mod error;
pub mod graph;
pub mod montecarlo;
pub mod rational;
pub mod unionfind;
pub mod verifier;

pub use error::{Error, Result};
pub use graph::{BunkbedGraph, Configuration, EdgeProbabilityVector, Level, Network, OriginalGraph};
pub use rational::Rational;
