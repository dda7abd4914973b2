//! Finite-dimensional toolkit for multiplicative partial isometries.
//!
//! Given a partial isometry `W` on `Cⁿ ⊗ Cⁿ` (and optionally a positive
//! invertible `Q`), the crate checks the multiplicativity axioms, builds the
//! leg algebras `A` and `Â` with their comultiplications, the base algebras
//! `N`, `L`, `N̂`, `L̂` together with the distinguished weights and the
//! anti-isomorphism between them, the manageability operator `W̃`, and the
//! antipode with its polar decomposition. Every theorem that can be checked
//! at desk scale is reported as a numeric residual.
//!
//! Conventions used throughout:
//!
//! * The basis `e_i ⊗ e_k` of a two-leg space is flattened to `i·n₂ + k`
//!   (first leg most significant, 0-based).
//! * `H̄` is stored as `Cⁿ` where `ξ̄` carries the conjugated coordinates of
//!   `ξ`. Consequently `m^⊤` is the plain matrix transpose.
//! * Inner products are linear in the first argument: `⟨x, y⟩ = y* x`.
//! * Residuals are relative Frobenius gaps `‖lhs − rhs‖ / max(1, ‖lhs‖)`.

pub mod antipode;
pub mod axioms;
pub mod base;
pub mod check;
pub mod coalgebra;
pub mod corpus;
pub mod error;
pub mod functional;
pub mod linalg;
pub mod manage;
pub mod subspace;
pub mod suite;
pub mod tensor;
pub mod tol;

pub use check::{Check, Checks};
pub use error::{Error, Result};
pub use functional::{Functional, Side};
pub use subspace::{Membership, OperatorSubspace};
pub use tensor::{Flavor, LegSpec, Operator, TensorSpace};
pub use tol::Tolerances;

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;

/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
