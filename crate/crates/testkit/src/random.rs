//! Seeded random expressions, forms and vector fields.

use std::collections::BTreeMap;

use noether_core::variational::euler_lagrange;
use noether_core::{
    Atom, BundleSpec, Comp, Component, Density, EvolutionaryField, Expression, FieldDecl,
    FieldKind, HorizontalForm, Jets, Monomial, MultiIndex, Rational,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Scalar fields `u` (and `v` when `two_fields`) over `n` base coordinates.
pub fn scalar_bundle(n: usize, two_fields: bool) -> BundleSpec {
    let mut fields = vec![FieldDecl::new("u", FieldKind::Scalar)];
    if two_fields {
        fields.push(FieldDecl::new("v", FieldKind::Scalar));
    }
    BundleSpec::new(n, fields).unwrap()
}

/// Shape of random polynomials.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_order: usize,
    pub max_degree: usize,
    pub max_terms: usize,
    /// Probability that a factor is a base coordinate rather than a jet variable.
    pub base_weight: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_order: 2,
            max_degree: 3,
            max_terms: 4,
            base_weight: 0.2,
        }
    }
}

fn multi_indices(n: usize, max_order: usize) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::empty()];
    let mut frontier = vec![MultiIndex::empty()];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for m in &frontier {
            let lo = m.indices().last().copied().unwrap_or(1);
            for i in lo..=n as u8 {
                next.push(m.with(i));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// All dynamic jet variables up to `max_order`.
pub fn jet_variables(bundle: &BundleSpec, max_order: usize) -> Vec<Atom> {
    let idx = multi_indices(bundle.dim(), max_order);
    let mut out = Vec::new();
    for c in bundle.components() {
        for m in &idx {
            out.push(c.jet(m.clone()));
        }
    }
    out
}

fn coefficient(rng: &mut ChaCha8Rng) -> Rational {
    let num = loop {
        let k = rng.gen_range(-4i64..=4);
        if k != 0 {
            break k;
        }
    };
    Rational::new(num as i128, rng.gen_range(1i128..=3))
}

pub fn random_polynomial(rng: &mut ChaCha8Rng, bundle: &BundleSpec, shape: Shape) -> Expression {
    let vars = jet_variables(bundle, shape.max_order);
    let n_terms = rng.gen_range(1..=shape.max_terms);
    let mut terms = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let degree = if shape.max_degree > 1 && rng.gen_bool(0.75) {
            rng.gen_range(2..=shape.max_degree)
        } else {
            1
        };
        let mut m = Monomial::one();
        for _ in 0..degree {
            let a = if rng.gen_bool(shape.base_weight) {
                Atom::Base(rng.gen_range(1..=bundle.dim() as u8))
            } else {
                vars.choose(rng).unwrap().clone()
            };
            m.mul_atom(&a, 1);
        }
        terms.push((m, coefficient(rng)));
    }
    Expression::from_terms(terms)
}

/// A random polynomial that depends on at least one jet variable.
pub fn random_jet_polynomial(
    rng: &mut ChaCha8Rng,
    bundle: &BundleSpec,
    shape: Shape,
) -> Expression {
    loop {
        let e = random_polynomial(rng, bundle, shape);
        if e.contains(Atom::is_jet) {
            return e;
        }
    }
}

pub fn random_density(rng: &mut ChaCha8Rng, bundle: &BundleSpec, shape: Shape) -> Density {
    Density::new(random_jet_polynomial(rng, bundle, shape))
}

/// A random density whose Euler–Lagrange form is not identically zero.
pub fn random_lagrangian(rng: &mut ChaCha8Rng, bundle: &BundleSpec, shape: Shape) -> Density {
    let jets = Jets::new(bundle);
    loop {
        let l = random_density(rng, bundle, shape);
        if !euler_lagrange(&jets, &l).unwrap().is_zero() {
            return l;
        }
    }
}

pub fn random_form(rng: &mut ChaCha8Rng, bundle: &BundleSpec, shape: Shape) -> HorizontalForm {
    HorizontalForm::new(
        (0..bundle.dim())
            .map(|_| random_polynomial(rng, bundle, shape))
            .collect(),
    )
}

pub fn random_field(rng: &mut ChaCha8Rng, bundle: &BundleSpec, shape: Shape) -> EvolutionaryField {
    let comps: BTreeMap<Component, Expression> = bundle
        .components()
        .into_iter()
        .map(|c| {
            let e = if rng.gen_bool(0.2) {
                Expression::zero()
            } else {
                random_polynomial(rng, bundle, shape)
            };
            (c, e)
        })
        .collect();
    EvolutionaryField::new(bundle, comps).unwrap()
}

/// `½ Σ_i u_{;i}²` on a single scalar field.
pub fn dirichlet_density(bundle: &BundleSpec) -> Density {
    let c = Component::new(noether_core::FieldId(0), Comp::scalar());
    let parts: Vec<Expression> = (1..=bundle.dim() as u8)
        .map(|i| {
            let a = c.jet(MultiIndex::from_indices([i]));
            Expression::atom_pow(a, 2).scale(Rational::new(1, 2))
        })
        .collect();
    Density::new(Expression::sum(parts.iter()))
}
