//! Finite-group lattice experiments for dimension-free Poincaré-type
//! inequalities: lattice functions, multiplier families, mixed norms,
//! free-group algebras, inequality evaluators, ratio search and metric
//! distortion.

pub mod distortion;
pub mod error;
pub mod freealg;
pub mod inequality;
pub mod lattice;
pub mod matrix;
pub mod norms;
pub mod numeric;
pub mod operators;
pub mod search;
pub mod sparse;
pub mod subsets;

pub use error::{Error, Result};
pub use lattice::{GroupShape, LatticeFunction, MultiIndex, ResourceCaps, Side, SubsetMask};
pub use matrix::CMatrix;
pub use norms::NormSpec;
