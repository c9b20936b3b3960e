//! Finite-difference check of Euler–Lagrange forms against the action.
//!
//! A random polynomial section `φ` on a box around a random centre and a
//! variation `h` vanishing to fourth order on the boundary are chosen. Then
//! `d/dε ∫ L(j(φ + εh))` is computed by Richardson-extrapolated central
//! differences and Gauss–Legendre quadrature, and compared with
//! `∫ Σ_α E_α(jφ) h^α` evaluated from the symbolic source.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use noether_core::{
    det_polynomial, Atom, BundleSpec, Component, Density, FieldKind, MultiIndex, SourceEquation,
};
use rand::Rng;

use crate::random::rng;

/// Dense polynomial in up to three variables with `f64` coefficients.
#[derive(Clone, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<[u32; 3], f64>,
}

impl Poly {
    pub fn constant(c: f64) -> Poly {
        let mut p = Poly::default();
        p.terms.insert([0; 3], c);
        p
    }

    pub fn monomial(c: f64, exps: [u32; 3]) -> Poly {
        let mut p = Poly::default();
        p.terms.insert(exps, c);
        p
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (k, v) in &o.terms {
            *p.terms.entry(*k).or_insert(0.0) += v;
        }
        p
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut p = Poly::default();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                let k = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                *p.terms.entry(k).or_insert(0.0) += x * y;
            }
        }
        p
    }

    pub fn derivative(&self, i: usize) -> Poly {
        let mut p = Poly::default();
        for (k, v) in &self.terms {
            if k[i] > 0 {
                let mut k2 = *k;
                k2[i] -= 1;
                *p.terms.entry(k2).or_insert(0.0) += v * k[i] as f64;
            }
        }
        p
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, v)| {
                v * (0..y.len())
                    .map(|i| y[i].powi(k[i] as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

fn random_poly(r: &mut impl Rng, n: usize, degree: u32, scale: f64) -> Poly {
    let mut p = Poly::default();
    let mut exps = vec![[0u32; 3]];
    for i in 0..n {
        let mut next = Vec::new();
        for e in &exps {
            for d in 0..=degree {
                let mut e2 = *e;
                e2[i] = d;
                next.push(e2);
            }
        }
        exps = next;
    }
    for e in exps.into_iter().filter(|e| e.iter().sum::<u32>() <= degree) {
        p = p.add(&Poly::monomial(r.gen_range(-scale..scale), e));
    }
    p
}

/// `Π_i (1 - 4 y_i²)^4`: vanishes to fourth order on the boundary of `[-½, ½]^n`.
fn bump(n: usize) -> Poly {
    let mut b = Poly::constant(1.0);
    for i in 0..n {
        let mut e = [0u32; 3];
        e[i] = 2;
        let f = Poly::constant(1.0).add(&Poly::monomial(-4.0, e));
        for _ in 0..4 {
            b = b.mul(&f);
        }
    }
    b
}

/// A random section and compactly supported variation on a bundle.
pub struct Probe {
    bundle: BundleSpec,
    centre: Vec<f64>,
    section: BTreeMap<Component, Poly>,
    variation: BTreeMap<Component, Poly>,
}

impl Probe {
    /// Metric components are kept near `1.5·δ_ab`, so they stay positive definite on the box.
    pub fn new(bundle: &BundleSpec, seed: u64) -> Probe {
        let mut r = rng(seed);
        let n = bundle.dim();
        let centre: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let b = bump(n);
        let mut section = BTreeMap::new();
        let mut variation = BTreeMap::new();
        for c in bundle.all_components() {
            let kind = bundle.field(c.field).kind;
            let p = if kind == FieldKind::Symmetric2 {
                let idx = c.comp.indices();
                let base = if idx[0] == idx[1] { 1.5 } else { 0.0 };
                Poly::constant(base).add(&random_poly(&mut r, n, 2, 0.15))
            } else {
                random_poly(&mut r, n, 3, 1.0)
            };
            section.insert(c.clone(), p);
            if bundle.is_dynamic(c.field) {
                let scale = if kind == FieldKind::Symmetric2 {
                    0.3
                } else {
                    1.0
                };
                variation.insert(c, b.mul(&random_poly(&mut r, n, 1, scale)));
            }
        }
        Probe {
            bundle: bundle.clone(),
            centre,
            section,
            variation,
        }
    }

    fn differentiate(p: &Poly, derivs: &MultiIndex) -> Poly {
        derivs
            .indices()
            .iter()
            .fold(p.clone(), |acc, &i| acc.derivative(i as usize - 1))
    }

    /// Values of every atom of `atoms` at local coordinate `y` for `φ + εh`.
    fn assignment(&self, atoms: &[Atom], y: &[f64], eps: f64) -> BTreeMap<Atom, f64> {
        let mut out = BTreeMap::new();
        let value = |c: &Component, d: &MultiIndex| {
            let mut v = Self::differentiate(&self.section[c], d).eval(y);
            if let Some(h) = self.variation.get(c) {
                v += eps * Self::differentiate(h, d).eval(y);
            }
            v
        };
        for a in atoms {
            match a {
                Atom::Base(i) => {
                    let i = *i as usize - 1;
                    out.insert(a.clone(), self.centre[i] + y[i]);
                }
                Atom::Jet {
                    field,
                    comp,
                    derivs,
                } => {
                    out.insert(
                        a.clone(),
                        value(&Component::new(*field, comp.clone()), derivs),
                    );
                }
                Atom::Root { field, dim } => {
                    let mut zero = BTreeMap::new();
                    for c in self.bundle.comps_of(FieldKind::Symmetric2) {
                        let comp = Component::new(*field, c);
                        zero.insert(
                            comp.jet(MultiIndex::empty()),
                            value(&comp, &MultiIndex::empty()),
                        );
                    }
                    let det = det_polynomial(*field, *dim).evaluate(&zero).unwrap();
                    out.insert(a.clone(), det.sqrt());
                    out.extend(zero);
                }
                _ => panic!("atom {a:?} has no numeric value on a section"),
            }
        }
        out
    }

    fn integrate(&self, f: impl Fn(&[f64]) -> f64, nodes: usize) -> f64 {
        let q = GaussLegendre::new(NonZeroUsize::new(nodes).unwrap());
        let pts: Vec<(f64, f64)> = q.iter().map(|(x, w)| (x / 2.0, w / 2.0)).collect();
        match self.bundle.dim() {
            1 => pts.iter().map(|(x, w)| w * f(&[*x])).sum(),
            2 => pts
                .iter()
                .flat_map(|(x, wx)| pts.iter().map(move |(y, wy)| (*x, *y, wx * wy)))
                .map(|(x, y, w)| w * f(&[x, y]))
                .sum(),
            3 => {
                let mut acc = 0.0;
                for (x, wx) in &pts {
                    for (y, wy) in &pts {
                        for (z, wz) in &pts {
                            acc += wx * wy * wz * f(&[*x, *y, *z]);
                        }
                    }
                }
                acc
            }
            _ => unimplemented!("quadrature in dimension > 3"),
        }
    }

    pub fn action(&self, l: &Density, eps: f64) -> f64 {
        let atoms: Vec<Atom> = l.coeff.atoms().into_iter().collect();
        self.integrate(
            |y| l.coeff.evaluate(&self.assignment(&atoms, y, eps)).unwrap(),
            NODES,
        )
    }

    /// `d/dε S[φ + εh]` at `ε = 0`, fourth-order accurate in the step.
    pub fn action_derivative(&self, l: &Density) -> f64 {
        let s = |e| self.action(l, e);
        let h = STEP;
        (8.0 * (s(h) - s(-h)) - (s(2.0 * h) - s(-2.0 * h))) / (12.0 * h)
    }

    /// `∫ Σ_α T_α(jφ) h^α`.
    pub fn paired_source(&self, t: &SourceEquation) -> f64 {
        let mut atoms = std::collections::BTreeSet::new();
        for (_, e) in t.iter() {
            atoms.extend(e.atoms());
        }
        let atoms: Vec<Atom> = atoms.into_iter().collect();
        self.integrate(
            |y| {
                let vals = self.assignment(&atoms, y, 0.0);
                t.iter()
                    .map(|(c, e)| e.evaluate(&vals).unwrap() * self.variation[c].eval(y))
                    .sum()
            },
            NODES,
        )
    }
}

const NODES: usize = 16;
const STEP: f64 = 1e-3;

/// Outcome of one finite-difference comparison.
#[derive(Clone, Copy, Debug)]
pub struct VariationCheck {
    pub finite_difference: f64,
    pub symbolic: f64,
}

impl VariationCheck {
    pub fn error(&self) -> f64 {
        (self.finite_difference - self.symbolic).abs() / self.symbolic.abs().max(1.0)
    }
}

pub fn check_euler_lagrange(
    bundle: &BundleSpec,
    l: &Density,
    t: &SourceEquation,
    seed: u64,
) -> VariationCheck {
    let probe = Probe::new(bundle, seed);
    VariationCheck {
        finite_difference: probe.action_derivative(l),
        symbolic: probe.paired_source(t),
    }
}
