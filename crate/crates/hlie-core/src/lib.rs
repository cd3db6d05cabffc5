//! Two-step metric nilpotent Lie algebras with constant J-spectrum.
//!
//! A two-step metric nilpotent Lie algebra of type `(p, q)` is stored through
//! the images `J(Z₁), …, J(Z_p)` of an orthonormal basis of its commutator,
//! each a skew-symmetric `q×q` matrix. The crate provides:
//!
//! - exact arithmetic on admissible eigenvalue multisets ([`multiset`]);
//! - skew-symmetric spectra, eigenspaces and subspace geometry ([`linalg`]);
//! - the algebra type, bracket evaluation and the standard-algebra
//!   constructor from a subspace of `so(ℝ^q)` ([`algebra`]);
//! - verification of the hierarchy H-type ⇒ H-like ⇒ constant J-spectrum,
//!   cone membership and J-unitarity ([`verify`]);
//! - direct sums, tensor products, central sums, submersion quotients and
//!   block subspace sums ([`construct`]);
//! - the classification of J-rank-two H-like algebras with explicit witness
//!   isometries ([`classify`]);
//! - numerical search for subspaces of cones over conjugacy classes
//!   ([`search`]).

pub use nalgebra;

pub mod algebra;
pub mod classify;
pub mod construct;
pub mod error;
mod exactmat;
pub mod linalg;
pub mod multiset;
pub mod scalar;
pub mod search;
pub mod verify;

pub use algebra::MetricAlgebra;
pub use error::{HlieError, Result};
pub use linalg::{SkewMatrix, Subspace, SymMatrix};
pub use multiset::AdmissibleMultiset;
pub use scalar::Scalar;
