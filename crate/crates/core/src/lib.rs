#![no_std]

//! Exact symbolic variational calculus on jet bundles.
//!
//! Expressions are canonical sums of monomials in jet coordinates with exact
//! rational coefficients. On top of them the crate computes Euler–Lagrange
//! source equations, first-variation splittings with their boundary currents,
//! conserved currents of symmetries, natural lifts of base vector fields on
//! tensor bundles, and the generalized divergence whose vanishing
//! characterizes natural locally variational equations.
//!
//! The crate only needs `alloc`. IO, model files and the command line live in
//! `noether-cli`.
//!
//! ```
//! use noether_core::{catalog, variational, Jets};
//!
//! let model = catalog::builtin_model("laplace-1d").unwrap();
//! let jets = Jets::new(&model.bundle);
//! let lagrangian = model.lagrangian.as_ref().unwrap();
//! let source = variational::euler_lagrange(&jets, lagrangian).unwrap();
//! assert!(variational::is_locally_variational(&jets, &source).unwrap());
//! ```

extern crate alloc;
#[cfg(test)]
extern crate std;

mod atom;
mod bundle;
pub mod catalog;
mod error;
mod expr;
mod jet;
pub mod natural;
mod parse;
mod rational;
pub mod variational;

pub use atom::{Atom, Comp, Component, FieldId, MultiIndex};
pub use bundle::{
    BundleSpec, Density, EvolutionaryField, FieldDecl, FieldKind, HorizontalForm, SourceEquation,
    DEFAULT_ORDER_BOUND,
};
pub use error::{Error, Result};
pub use expr::{adjugate_entry, det_polynomial, Expression, Monomial};
pub use jet::{jet_coordinates, Jets};
pub use parse::{format_atom, format_expression, parse_expression};
pub use rational::Rational;
