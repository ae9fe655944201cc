//! Symbolic and numeric calculus on higher order tangent bundles `T^rM`.
//!
//! The crate is organised bottom-up:
//!
//! - [`expr`]: expression trees over jet coordinates (parsing, rendering,
//!   symbolic partial derivatives, compiled numeric evaluation).
//! - [`jet`]: the jet space data model with Liouville fields, tangent
//!   structures, the total derivative, semisprays, Lie brackets and
//!   Frölicher–Nijenhuis brackets of vector fields with (1,1) tensors.
//! - [`variational`]: Poincaré–Cartan forms, energy, regularity and the
//!   Euler–Lagrange semispray of an order-`k` Lagrangian.
//! - [`finsler`]: Zermelo conditions, angular tensors, homogeneity of forms
//!   and semisprays, projective equivalence and metrizability residuals.
//! - [`fnverify`]: randomized verification of the bracket identities.
//! - [`worked`]: Riemannian, biharmonic and second order Finsler builders and
//!   a fixed-step integrator for semisprays.

pub mod error;
pub mod expr;
pub mod finsler;
pub mod fnverify;
pub mod jet;
pub mod linalg;
pub mod report;
pub mod sample;
pub mod variational;
pub mod worked;

pub use error::{Error, Result};
pub use expr::{CoordId, DomainError, Expr, ParseError, Program};
pub use jet::{JetPoint, JetSpace, OneForm, SemiBasicForm, Semispray, Tensor11, TwoForm, VectorField};
