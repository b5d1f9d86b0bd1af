//! Numerical laboratory for the parallel Kac's walk on real and complex
//! unit spheres, the discretized scrambler circuits built from it, the
//! coupling constructions that drive its mixing analysis, and a
//! statistical harness that turns runs into pass/fail verdicts.

pub mod analysis;
pub mod bits;
pub mod circuit;
pub mod coupling;
pub mod error;
pub mod haar;
pub mod matching;
pub mod partition;
pub mod rng;
pub mod state;
pub mod walk;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use state::{Field, StateVector};
