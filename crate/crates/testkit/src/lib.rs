//! Test support for `noether-core`: seeded random inputs and an independent
//! numerical check of Euler–Lagrange forms.

pub mod numeric;
pub mod random;

pub use numeric::{check_euler_lagrange, Probe, VariationCheck};
pub use random::{
    dirichlet_density, jet_variables, random_density, random_field, random_form,
    random_jet_polynomial, random_lagrangian, random_polynomial, rng, scalar_bundle, Shape,
};
