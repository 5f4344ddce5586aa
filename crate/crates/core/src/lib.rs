//! Jet-based verification of conformally and projectively invariant
//! operators, their compatibility complexes, and Weyl-tensor algebra.

pub mod conformal;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod jet;
pub mod linalg;
pub mod np;
pub mod projective;
pub mod suites;
pub mod tensor;

pub use error::{Error, Result};
pub use jet::{Elementary, Jet, Scalar};
pub use tensor::{Bundle, Flavor, MetricPack, ShapeSpec, Symmetry, TensorJet, Variance};
