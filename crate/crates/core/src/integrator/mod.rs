//! Numerical integrals over piecewise-linear Morse knots and paths of them:
//! the low-degree Kontsevich integral, the 1-cocycle integral along a path,
//! its braid-slab variant, the rotation loop with a reduced oracle, and the
//! hump correction.
//!
//! Every integral groups its integrand by the normal form of the diagrams
//! modulo the one- and two-term relations before summing, so the small
//! denominators near critical altitudes cancel pointwise.

pub mod braid;
pub mod correction;
pub mod frame;
pub mod knot;
pub mod kontsevich;
pub mod normal;
pub mod oracle;
pub mod pairlog;
pub mod path;
pub mod quadrature;
pub mod tables;
pub mod vector;
pub mod z1;

pub use braid::{z1_braid, Braid};
pub use correction::{correct_z1, z_hat, z_hat1, z_infinity};
pub use knot::{validate_morse, MorseKnot};
pub use oracle::{gramain, reduced_gramain_oracle};
pub use path::KnotPath;
pub use quadrature::QuadratureConfig;
pub use vector::{eval_functional, NumericVector};
pub use z1::{z1, z1_window, z1_with, Z1Options};
