//! Numerical Calabi invariant of area-preserving disk diffeomorphisms.
//!
//! Maps are carried as [`flow::MapBundle`]s: a time-one map together with the
//! Hamiltonian isotopy that produced it. From the bundle the invariant is
//! computed three ways (action function average, chord-winding double
//! integral, Hamiltonian time integral), alongside boundary rotation numbers
//! and the experiments built on them.

pub mod arithmetic;
pub mod calabi;
pub mod circle;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod flow;
pub mod geometry;
pub mod mapzoo;
pub mod quadrature;

pub use error::{CalabiError, Result};
pub use exec::Execution;
