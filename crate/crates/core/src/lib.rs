//! Chord-diagram algebra, the tree and two-triple matrices of the Vassiliev
//! spectral sequence for the knot-space 1-cocycle, Kontsevich–Knizhnik–
//! Zamolodchikov form machinery, and numerical integrators for the
//! Kontsevich integral and its 1-cocycle along loops of long knots.

pub mod cli;
pub mod diagrams;
pub mod error;
pub mod integrator;
pub mod kzforms;
pub mod par;
pub mod ratlinalg;
pub mod relations;
pub mod vassiliev;

pub use error::{Error, Result};
