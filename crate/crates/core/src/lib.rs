//! Spray geometry, Frölicher–Nijenhuis calculus and projective
//! metrizability checks on the slashed tangent bundle.

pub mod calculus;
pub mod expr;
pub mod geodesics;
pub mod involutivity;
pub mod metrizability;
pub mod numeric;
pub mod presets;
pub mod spray;

pub use calculus::{ScalarForm, VectorValuedForm};
pub use expr::{Expr, Point, Var, ZeroVerdict};
pub use spray::{Classification, Connection, CurvatureTensor, JacobiEndomorphism, Spray, SprayError};
