//! Kalman canonical decomposition of linear quantum systems.
pub mod decomposition;
pub mod error;
pub mod fixtures;
pub mod gramians;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod subspaces;
pub mod symplectic;

pub use error::{Error, Result};
pub use model::{QuadratureSystem, SlhModel};
pub use symplectic::{ComplexMatrix, RealMatrix, ToleranceConfig};
