//! Natural lifts of base vector fields and the generalized divergence.
//!
//! A base vector field `D = Dⁱ ∂ᵢ` is represented by formal aux atoms `Dⁱ_{,J}`.
//! Its natural lift to a tensor bundle has vertical part
//! `Δ(D) = -(Lie derivative of the tautological section along D)`, and the
//! generalized divergence of a source equation `T` is the Euler operator of
//! `T(Δ(D))` with respect to the aux atoms.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::atom::{Atom, Comp, Component, MultiIndex};
use crate::bundle::{BundleSpec, Density, EvolutionaryField, FieldKind, SourceEquation};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::jet::Jets;
use crate::variational::{euler_lagrange, euler_operator_aux, integrate_by_parts, source_apply};

/// `(Div T)_i`, so that `Div T(D) = Σ_i (Div T)_i Dⁱ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceCovector {
    pub comps: Vec<Expression>,
}

impl DivergenceCovector {
    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expression::is_zero)
    }
}

/// The evolutionary field `Δ(D)` with components linear in the aux atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxLiftField(pub EvolutionaryField);

fn aux(i: u8) -> Expression {
    Expression::atom(Atom::aux(i, MultiIndex::empty()))
}

fn aux_d(i: u8, j: u8) -> Expression {
    Expression::atom(Atom::aux(i, MultiIndex::from_indices([j])))
}

fn jet(c: &Component, derivs: &[u8]) -> Expression {
    Expression::atom(c.jet(MultiIndex::from_indices(derivs.iter().copied())))
}

/// Vertical part of the canonical lift of a generic base vector field.
///
/// * scalar `u`: `-Dᵏ u_{;k}`
/// * covector `A`: `-(Dᵏ A_{a;k} + A_k Dᵏ_{,a})`
/// * symmetric `g`: `-(Dᵏ g_{ab;k} + g_{kb} Dᵏ_{,a} + g_{ak} Dᵏ_{,b})`
pub fn delta_lift(bundle: &BundleSpec) -> Result<AuxLiftField> {
    let n = bundle.dim() as u8;
    let mut comps = BTreeMap::new();
    for c in bundle.components() {
        let field = c.field;
        let mut parts = Vec::new();
        for k in 1..=n {
            parts.push(&aux(k) * &jet(&c, &[k]));
        }
        match bundle.field(field).kind {
            FieldKind::Scalar => {}
            FieldKind::Covector => {
                let a = c.comp.indices()[0];
                for k in 1..=n {
                    let ak = Component::new(field, Comp::vector(k));
                    parts.push(&jet(&ak, &[]) * &aux_d(k, a));
                }
            }
            FieldKind::Symmetric2 => {
                let (a, b) = (c.comp.indices()[0], c.comp.indices()[1]);
                for k in 1..=n {
                    let kb = Component::new(field, Comp::pair(k, b));
                    let ak = Component::new(field, Comp::pair(a, k));
                    parts.push(&jet(&kb, &[]) * &aux_d(k, a));
                    parts.push(&jet(&ak, &[]) * &aux_d(k, b));
                }
            }
        }
        comps.insert(c, -Expression::sum(parts.iter()));
    }
    Ok(AuxLiftField(EvolutionaryField::new(bundle, comps)?))
}

/// `Div T`: the unique fiberwise-linear part of `T ∘ Δ` modulo `d_h`.
///
/// The Euler operator in the aux atoms gives the components; an independent
/// integration by parts of `T(Δ(D))` must leave the same remainder, which
/// certifies that `T(Δ(D)) - Σ (Div T)_i Dⁱ` is a total divergence.
pub fn generalized_divergence(jets: &Jets, t: &SourceEquation) -> Result<DivergenceCovector> {
    if t.iter().any(|(_, e)| e.contains(Atom::is_aux)) {
        return Err(Error::ComponentMismatch(
            "source equation contains vector-field atoms".into(),
        ));
    }
    let lift = delta_lift(jets.bundle())?;
    let p = source_apply(t, &lift.0)?;
    let comps = euler_operator_aux(jets, &p)?;
    if comps.iter().any(|e| e.contains(Atom::is_aux)) {
        return Err(Error::Invariant(
            "divergence still depends on the vector field".into(),
        ));
    }

    let mut slots = BTreeMap::new();
    for a in p.coeff.atoms() {
        let Atom::Aux { index, derivs } = &a else {
            continue;
        };
        let c = p.coeff.partial(&a)?;
        if c.contains(Atom::is_aux) {
            return Err(Error::Invariant("T(Δ(D)) is not linear in D".into()));
        }
        slots.insert((*index, derivs.clone()), c);
    }
    let (residual, _pi) = integrate_by_parts(jets, slots, |i, idx| {
        Ok(Expression::atom(Atom::aux(*i, idx.clone())))
    })?;
    for (i, e) in comps.iter().enumerate() {
        let r = residual.get(&(i as u8 + 1)).cloned().unwrap_or_default();
        if !(&r - e).is_zero() {
            return Err(Error::Invariant(format!(
                "residual of T∘Δ is not d_h-exact in component {}",
                i + 1
            )));
        }
    }
    Ok(DivergenceCovector { comps })
}

/// Noether's second theorem as a decision procedure: a locally variational
/// `T` is natural iff `Div T = 0`.
///
/// The direct criterion `E(T(Δ(D))) = 0` (the Lie derivative of `T` along
/// every lift) is evaluated as well; disagreement means the variationality
/// hypothesis fails and is reported as an error rather than a verdict.
pub fn is_natural(jets: &Jets, t: &SourceEquation) -> Result<bool> {
    let div = generalized_divergence(jets, t)?;
    let lift = delta_lift(jets.bundle())?;
    let lie = euler_lagrange(jets, &source_apply(t, &lift.0)?)?;
    let by_div = div.is_zero();
    let by_lie = lie.is_zero();
    if by_div != by_lie {
        return Err(Error::Invariant(format!(
            "Div T = 0 is {by_div} but L_Δ(D) T = 0 is {by_lie}; is T locally variational?"
        )));
    }
    Ok(by_div)
}

/// `Σ_i (Div T)_i Dⁱ` as a density in the aux atoms.
pub fn divergence_density(div: &DivergenceCovector) -> Density {
    let parts: Vec<Expression> = div
        .comps
        .iter()
        .enumerate()
        .map(|(i, e)| e * &aux(i as u8 + 1))
        .collect();
    Density::new(Expression::sum(parts.iter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::FieldDecl;
    use crate::parse::parse_expression;

    fn metric1() -> BundleSpec {
        BundleSpec::new(1, alloc::vec![FieldDecl::new("g", FieldKind::Symmetric2)]).unwrap()
    }

    #[test]
    fn scalar_lift_in_one_dimension() {
        let b = BundleSpec::new(1, alloc::vec![FieldDecl::new("u", FieldKind::Scalar)]).unwrap();
        let l = delta_lift(&b).unwrap();
        let c = &b.components()[0];
        assert_eq!(
            l.0.get(c).unwrap(),
            &-(&aux(1) * &parse_expression("u[;1]", &b).unwrap())
        );
    }

    #[test]
    fn metric_lift_in_one_dimension() {
        let b = metric1();
        let l = delta_lift(&b).unwrap();
        let p = |s| parse_expression(s, &b).unwrap();
        let expected = -(&(&aux(1) * &p("g[1,1;1]")) + &(&aux_d(1, 1) * &p("2*g[1,1]")));
        assert_eq!(l.0.get(&b.components()[0]).unwrap(), &expected);
    }

    #[test]
    fn covector_lift_in_two_dimensions() {
        let b = BundleSpec::new(2, alloc::vec![FieldDecl::new("A", FieldKind::Covector)]).unwrap();
        let l = delta_lift(&b).unwrap();
        let p = |s| parse_expression(s, &b).unwrap();
        let expected = -Expression::sum(
            [
                &aux(1) * &p("A[1;1]"),
                &aux(2) * &p("A[1;2]"),
                &p("A[1]") * &aux_d(1, 1),
                &p("A[2]") * &aux_d(2, 1),
            ]
            .iter(),
        );
        assert_eq!(l.0.get(&b.components()[0]).unwrap(), &expected);
    }

    #[test]
    fn divergence_of_constant_metric_source() {
        let b = metric1();
        let j = Jets::new(&b);
        let t = SourceEquation::new(
            &b,
            [(b.components()[0].clone(), Expression::one())]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let div = generalized_divergence(&j, &t).unwrap();
        assert_eq!(
            div.comps,
            alloc::vec![parse_expression("g[1,1;1]", &b).unwrap()]
        );
        assert!(!is_natural(&j, &t).unwrap());
        assert!(is_natural(&j, &SourceEquation::zero(&b)).unwrap());
    }
}
