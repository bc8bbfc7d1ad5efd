//! Free-boundary minimal surfaces in the unit ball.
//!
//! The crate builds discrete `k`-surfaces in `B^n`, drives them to area
//! critical points with the boundary constrained to the sphere, and checks the
//! sharp lower bound `|Σ| >= |B^k|` and related identities numerically.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod mesh;
pub mod minimizer;
pub mod vector;
pub mod verifier;

pub use error::{Error, Result};
pub use field::FieldSample;
pub use mesh::{unit_ball_volume, OrthoFrame, SimplicialSurface};
pub use minimizer::{SolveOptions, SolveStats};
pub use vector::AmbientVector;
pub use verifier::{AttestedSurface, VerificationReport};
