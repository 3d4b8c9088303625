//! Thermodynamic formalism on subshifts of finite type: transfer operators,
//! pressure, two-variable zeta functions, periodic-orbit statistics and
//! spectral decay diagnostics.

pub mod decay;
pub mod error;
pub mod linalg;
pub mod orbits;
pub mod potential;
pub mod roots;
pub mod sft;
pub mod transfer;
pub mod zeta;

pub use error::{Axis, Error, Result};
pub use potential::{ComplexParams, Potential, Roof};
pub use sft::{PeriodicWord, Point, SubshiftSpec, SymbolicMetric, Word};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
