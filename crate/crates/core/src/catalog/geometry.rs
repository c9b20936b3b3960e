//! Riemannian quantities written out in jet coordinates of a metric field.
//!
//! This is plain tensor calculus with total derivatives standing in for
//! partial derivatives of a section. It does not touch the Euler operator and
//! serves as an independent check on the generalized divergence.

#![allow(clippy::needless_range_loop)]

use alloc::vec::Vec;

use crate::atom::{Atom, Comp, Component, FieldId, MultiIndex};
use crate::bundle::{BundleSpec, FieldKind, SourceEquation};
use crate::error::{Error, Result};
use crate::expr::{adjugate_entry, Expression};
use crate::jet::Jets;
use crate::rational::Rational;

/// Components of a metric field together with its inverse and Christoffel
/// symbols (indices are 0-based here).
pub struct Metric<'a> {
    jets: Jets<'a>,
    field: FieldId,
    n: usize,
    inv: Vec<Vec<Expression>>,
    gamma: Vec<Vec<Vec<Expression>>>,
}

impl<'a> Metric<'a> {
    pub fn new(jets: Jets<'a>, field: FieldId) -> Result<Self> {
        let bundle = jets.bundle();
        if bundle.field(field).kind != FieldKind::Symmetric2 {
            return Err(Error::UnsupportedBundle(
                "metric must be a symmetric2 field".into(),
            ));
        }
        let n = bundle.dim();
        let s_inv2 = Expression::atom_pow(bundle.root(field), -2);
        let inv: Vec<Vec<Expression>> = (1..=n as u8)
            .map(|a| {
                (1..=n as u8)
                    .map(|b| &adjugate_entry(field, n as u8, a, b) * &s_inv2)
                    .collect()
            })
            .collect();
        let mut m = Metric {
            jets,
            field,
            n,
            inv,
            gamma: Vec::new(),
        };
        let half = Rational::new(1, 2);
        let mut gamma = Vec::with_capacity(n);
        for a in 0..n {
            let mut row = Vec::with_capacity(n);
            for b in 0..n {
                let mut col = Vec::with_capacity(n);
                for c in 0..n {
                    let mut acc = Expression::zero();
                    for k in 0..n {
                        let lower = &(&m.dg(k, b, c) + &m.dg(k, c, b)) - &m.dg(b, c, k);
                        acc = &acc + &(&m.inv[a][k] * &lower);
                    }
                    col.push(acc.scale(half));
                }
                row.push(col);
            }
            gamma.push(row);
        }
        m.gamma = gamma;
        Ok(m)
    }

    pub fn g(&self, a: usize, b: usize) -> Expression {
        Expression::atom(Atom::jet(
            self.field,
            Comp::pair(a as u8 + 1, b as u8 + 1),
            MultiIndex::empty(),
        ))
    }

    /// `∂_k g_{ab}`.
    pub fn dg(&self, a: usize, b: usize, k: usize) -> Expression {
        Expression::atom(Atom::jet(
            self.field,
            Comp::pair(a as u8 + 1, b as u8 + 1),
            MultiIndex::from_indices([k as u8 + 1]),
        ))
    }

    pub fn inv(&self, a: usize, b: usize) -> &Expression {
        &self.inv[a][b]
    }

    /// `Γ^a_{bc}`.
    pub fn christoffel(&self, a: usize, b: usize, c: usize) -> &Expression {
        &self.gamma[a][b][c]
    }

    pub fn sqrtdet(&self) -> Expression {
        Expression::atom(self.jets.bundle().root(self.field))
    }

    fn d(&self, e: &Expression, k: usize) -> Result<Expression> {
        self.jets.total_derivative(e, k + 1)
    }

    /// `R^a_{bcd} = ∂_c Γ^a_{db} - ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} - Γ^a_{de} Γ^e_{cb}`.
    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> Result<Expression> {
        let mut acc = &self.d(&self.gamma[a][d][b], c)? - &self.d(&self.gamma[a][c][b], d)?;
        for e in 0..self.n {
            acc = &acc + &(&self.gamma[a][c][e] * &self.gamma[e][d][b]);
            acc = &acc - &(&self.gamma[a][d][e] * &self.gamma[e][c][b]);
        }
        Ok(acc)
    }

    /// `R_{bd} = R^a_{bad}`.
    pub fn ricci(&self, b: usize, d: usize) -> Result<Expression> {
        let mut acc = Expression::zero();
        for a in 0..self.n {
            self.jets.checkpoint()?;
            acc = &acc + &self.riemann(a, b, a, d)?;
        }
        Ok(acc)
    }

    pub fn scalar_curvature(&self) -> Result<Expression> {
        let mut acc = Expression::zero();
        for b in 0..self.n {
            for d in b..self.n {
                let r = &self.inv[b][d] * &self.ricci(b, d)?;
                acc = if b == d {
                    &acc + &r
                } else {
                    &acc + &r.scale(Rational::integer(2))
                };
            }
        }
        Ok(acc)
    }

    /// `∇_k V^k_i` for a mixed tensor given by `v[k][i]`.
    fn divergence_mixed(&self, v: &[Vec<Expression>], i: usize) -> Result<Expression> {
        let mut acc = Expression::zero();
        for k in 0..self.n {
            acc = &acc + &self.d(&v[k][i], k)?;
            for c in 0..self.n {
                acc = &acc + &(&self.gamma[k][k][c] * &v[c][i]);
                acc = &acc - &(&self.gamma[c][k][i] * &v[k][c]);
            }
        }
        Ok(acc)
    }

    /// `∇_a V^a` for a vector field.
    fn divergence_vector(&self, v: &[Expression]) -> Result<Expression> {
        let mut acc = Expression::zero();
        for a in 0..self.n {
            acc = &acc + &self.d(&v[a], a)?;
            for c in 0..self.n {
                acc = &acc + &(&self.gamma[a][a][c] * &v[c]);
            }
        }
        Ok(acc)
    }
}

fn dynamic_field(bundle: &BundleSpec, kind: FieldKind) -> Result<Option<FieldId>> {
    let ids: Vec<FieldId> = (0..bundle.fields().len() as u16)
        .map(FieldId)
        .filter(|&id| bundle.is_dynamic(id) && bundle.field(id).kind == kind)
        .collect();
    match ids.len() {
        0 => Ok(None),
        1 => Ok(Some(ids[0])),
        _ => Err(Error::UnsupportedBundle(
            "more than one field of the same kind".into(),
        )),
    }
}

/// Covariant divergence of a source on a metric bundle, optionally times a
/// covector bundle.
///
/// With `s = sqrtdet(g)`, `t = T/s` the symmetric tensor underlying the
/// metric part of the source (off-diagonal entries halved) and `j = J/s` the
/// vector underlying the covector part, the result is
/// `2 s ∇_k t^k_i + J^a (∂_a A_i - ∂_i A_a) + s (∇_a j^a) A_i`.
pub fn covariant_divergence_oracle(jets: &Jets, t: &SourceEquation) -> Result<Vec<Expression>> {
    let bundle = jets.bundle();
    let n = bundle.dim();
    if n > 3 {
        return Err(Error::UnsupportedBundle("oracle supports n <= 3".into()));
    }
    let g = dynamic_field(bundle, FieldKind::Symmetric2)?
        .ok_or_else(|| Error::UnsupportedBundle("no metric field".into()))?;
    let a_field = dynamic_field(bundle, FieldKind::Covector)?;
    if dynamic_field(bundle, FieldKind::Scalar)?.is_some() {
        return Err(Error::UnsupportedBundle(
            "scalar fields are not supported".into(),
        ));
    }
    let metric = Metric::new(*jets, g)?;
    let s = metric.sqrtdet();
    let s_inv = Expression::atom_pow(bundle.root(g), -1);
    let comp = |c: Component| {
        t.get(&c)
            .cloned()
            .ok_or_else(|| Error::ComponentMismatch("missing source component".into()))
    };

    let mut t_full = alloc::vec![alloc::vec![Expression::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            let v = comp(Component::new(g, Comp::pair(a as u8 + 1, b as u8 + 1)))?;
            t_full[a][b] = if a == b {
                v
            } else {
                v.scale(Rational::new(1, 2))
            };
        }
    }
    // t^k_i = t^{kb} g_{bi}
    let mut mixed = alloc::vec![alloc::vec![Expression::zero(); n]; n];
    for k in 0..n {
        for i in 0..n {
            let mut acc = Expression::zero();
            for b in 0..n {
                acc = &acc + &(&t_full[k][b] * &metric.g(b, i));
            }
            mixed[k][i] = &acc * &s_inv;
        }
    }

    let mut out = Vec::with_capacity(n);
    let two_s = s.scale(Rational::integer(2));
    let j_vec = match a_field {
        Some(af) => Some(
            (0..n)
                .map(|a| comp(Component::new(af, Comp::vector(a as u8 + 1))))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    for i in 0..n {
        jets.checkpoint()?;
        let mut acc = &two_s * &metric.divergence_mixed(&mixed, i)?;
        if let (Some(af), Some(j)) = (a_field, &j_vec) {
            let a_jet = |a: usize, d: &[usize]| {
                Expression::atom(Atom::jet(
                    af,
                    Comp::vector(a as u8 + 1),
                    MultiIndex::from_indices(d.iter().map(|&k| k as u8 + 1)),
                ))
            };
            for a in 0..n {
                let f_ai = &a_jet(i, &[a]) - &a_jet(a, &[i]);
                acc = &acc + &(&j[a] * &f_ai);
            }
            let j_over_s: Vec<Expression> = j.iter().map(|e| e * &s_inv).collect();
            let div_j = &s * &metric.divergence_vector(&j_over_s)?;
            acc = &acc + &(&div_j * &a_jet(i, &[]));
        }
        out.push(acc);
    }
    Ok(out)
}
