//! Simulation of a two-qubit autonomous entanglement engine at all times.

pub mod error;
pub mod liouville;
pub mod model;

pub use error::{EngineError, Result};
pub mod analytic;
pub mod observables;
pub mod metrics;
pub mod kur;
pub mod validate;
