//! Total derivatives, prolongation of evolutionary fields, and the horizontal
//! differential on `(n-1,0)`-forms.

use core::sync::atomic::{AtomicBool, Ordering};

use alloc::vec::Vec;

use crate::atom::{Atom, MultiIndex};
use crate::bundle::{BundleSpec, Density, EvolutionaryField, HorizontalForm};
use crate::error::{Error, Result};
use crate::expr::Expression;

/// Computation context: the bundle fixing the coordinate universe, plus an
/// optional cooperative cancellation flag polled between rounds of long
/// computations.
#[derive(Clone, Copy)]
pub struct Jets<'a> {
    bundle: &'a BundleSpec,
    cancel: Option<&'a AtomicBool>,
}

impl<'a> Jets<'a> {
    pub fn new(bundle: &'a BundleSpec) -> Self {
        Jets {
            bundle,
            cancel: None,
        }
    }

    pub fn with_cancel(mut self, flag: &'a AtomicBool) -> Self {
        self.cancel = Some(flag);
        self
    }

    pub fn bundle(&self) -> &'a BundleSpec {
        self.bundle
    }

    pub fn dim(&self) -> usize {
        self.bundle.dim()
    }

    pub fn checkpoint(&self) -> Result<()> {
        match self.cancel {
            Some(flag) if flag.load(Ordering::Relaxed) => Err(Error::Cancelled),
            _ => Ok(()),
        }
    }

    fn raise(&self, derivs: &MultiIndex, i: u8) -> Result<MultiIndex> {
        if derivs.order() + 1 > self.bundle.order_bound() {
            return Err(Error::OrderBoundExceeded {
                bound: self.bundle.order_bound(),
            });
        }
        Ok(derivs.with(i))
    }

    /// `D_i e = ∂e/∂x^i + Σ y^α_{I∪{i}} ∂e/∂y^α_I`, extended to aux atoms the
    /// same way and to `sqrtdet` atoms by the chain rule through `det`.
    pub fn total_derivative(&self, e: &Expression, i: usize) -> Result<Expression> {
        if i == 0 || i > self.dim() {
            return Err(Error::IndexOutOfRange {
                pos: 0,
                msg: alloc::format!("total derivative D_{i}"),
            });
        }
        let i = i as u8;
        e.derive(|a| match a {
            Atom::Base(j) => Ok((*j == i).then(Expression::one)),
            Atom::Jet {
                field,
                comp,
                derivs,
            } => Ok(Some(Expression::atom(Atom::jet(
                *field,
                comp.clone(),
                self.raise(derivs, i)?,
            )))),
            Atom::Aux { index, derivs } => Ok(Some(Expression::atom(Atom::aux(
                *index,
                self.raise(derivs, i)?,
            )))),
            Atom::Param(_) | Atom::Root { .. } => Ok(None),
        })
    }

    /// `D_I e = D_{i1} ∘ … ∘ D_{ik} e`.
    pub fn total_derivative_multi(&self, e: &Expression, idx: &MultiIndex) -> Result<Expression> {
        let mut acc = e.clone();
        for &i in idx.indices() {
            if acc.is_zero() {
                break;
            }
            acc = self.total_derivative(&acc, i as usize)?;
        }
        Ok(acc)
    }

    /// Lie derivative of a function along the prolongation of `v`:
    /// `Σ_{α,I} D_I(V^α) · ∂e/∂y^α_I`.
    pub fn prolong_apply(&self, v: &EvolutionaryField, e: &Expression) -> Result<Expression> {
        let mut parts = Vec::new();
        for a in jet_coordinates(self.bundle, e) {
            let Atom::Jet {
                field,
                comp,
                derivs,
            } = &a
            else {
                unreachable!()
            };
            let key = crate::atom::Component::new(*field, comp.clone());
            let Some(va) = v.get(&key) else { continue };
            if va.is_zero() {
                continue;
            }
            let de = e.partial(&a)?;
            if de.is_zero() {
                continue;
            }
            let dv = self.total_derivative_multi(va, derivs)?;
            parts.push(&dv * &de);
        }
        Ok(Expression::sum(parts.iter()))
    }

    /// `d_h ω = Σ_i D_i ω^i`.
    pub fn horizontal_differential(&self, w: &HorizontalForm) -> Result<Density> {
        if w.comps.len() != self.dim() {
            return Err(Error::ComponentMismatch(alloc::format!(
                "horizontal form has {} components, base dimension is {}",
                w.comps.len(),
                self.dim()
            )));
        }
        let mut parts = Vec::with_capacity(w.comps.len());
        for (k, c) in w.comps.iter().enumerate() {
            parts.push(self.total_derivative(c, k + 1)?);
        }
        Ok(Density::new(Expression::sum(parts.iter())))
    }
}

/// Jet coordinates of dynamic fields that `e` depends on, explicitly or
/// through a `sqrtdet` atom (which depends on every zero-order component).
pub fn jet_coordinates(bundle: &BundleSpec, e: &Expression) -> Vec<Atom> {
    let mut set = alloc::collections::BTreeSet::new();
    for a in e.atoms() {
        match &a {
            Atom::Jet { field, .. } if bundle.is_dynamic(*field) => {
                set.insert(a);
            }
            Atom::Root { field, .. } if bundle.is_dynamic(*field) => {
                for c in bundle.comps_of(bundle.field(*field).kind) {
                    set.insert(Atom::jet(*field, c, MultiIndex::empty()));
                }
            }
            _ => {}
        }
    }
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::FieldId;
    use crate::bundle::{FieldDecl, FieldKind};
    use crate::parse::parse_expression;
    use alloc::collections::BTreeMap;

    fn b1() -> BundleSpec {
        BundleSpec::new(
            1,
            alloc::vec![
                FieldDecl::new("u", FieldKind::Scalar),
                FieldDecl::new("g", FieldKind::Symmetric2)
            ],
        )
        .unwrap()
    }

    fn b2() -> BundleSpec {
        BundleSpec::new(2, alloc::vec![FieldDecl::new("u", FieldKind::Scalar)]).unwrap()
    }

    fn field(b: &BundleSpec, src: &str) -> EvolutionaryField {
        let comps: BTreeMap<_, _> = b
            .components()
            .into_iter()
            .filter(|c| c.field == FieldId(0))
            .map(|c| (c, parse_expression(src, b).unwrap()))
            .collect();
        EvolutionaryField::from_partial(b, comps).unwrap()
    }

    #[test]
    fn total_derivative_examples() {
        let b = b1();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        assert_eq!(
            j.total_derivative(&p("x[1]"), 1).unwrap(),
            Expression::one()
        );
        assert_eq!(
            j.total_derivative(&p("u[;1]^2"), 1).unwrap(),
            p("2*u[;1]*u[;1,1]")
        );
        assert_eq!(
            j.total_derivative(&p("sqrtdet(g)"), 1).unwrap(),
            p("1/2*sqrtdet(g)^-1*g[1,1;1]")
        );
    }

    #[test]
    fn order_bound_is_enforced() {
        let b = b2().with_order_bound(2);
        let j = Jets::new(&b);
        let e = parse_expression("u[;1,2]", &b).unwrap();
        assert!(matches!(
            j.total_derivative(&e, 1),
            Err(Error::OrderBoundExceeded { bound: 2 })
        ));
    }

    #[test]
    fn prolongation_examples() {
        let b = b1();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        let v = field(&b, "u[;1]");
        assert_eq!(j.prolong_apply(&v, &p("u[;1]")).unwrap(), p("u[;1,1]"));
        assert_eq!(
            j.prolong_apply(&v, &p("u[;1]^2/2")).unwrap(),
            p("u[;1]*u[;1,1]")
        );
        let v = field(&b, "u[]");
        assert_eq!(
            j.prolong_apply(&v, &p("u[]*u[;1]")).unwrap(),
            p("2*u[]*u[;1]")
        );
    }

    #[test]
    fn horizontal_differential_examples() {
        let b = b1();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        let w = HorizontalForm::new(alloc::vec![p("u[]^2")]);
        assert_eq!(
            j.horizontal_differential(&w).unwrap().coeff,
            p("2*u[]*u[;1]")
        );

        let b = b2();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        let w = HorizontalForm::new(alloc::vec![p("u[;2]"), p("-u[;1]")]);
        assert!(j.horizontal_differential(&w).unwrap().is_zero());
        let w = HorizontalForm::new(alloc::vec![p("x[2]*u[]"), Expression::zero()]);
        assert_eq!(
            j.horizontal_differential(&w).unwrap().coeff,
            p("x[2]*u[;1]")
        );
        assert!(j.horizontal_differential(&HorizontalForm::zero(1)).is_err());
    }

    #[test]
    fn cancellation_is_observed() {
        let b = b2();
        let flag = AtomicBool::new(true);
        let j = Jets::new(&b).with_cancel(&flag);
        assert!(matches!(j.checkpoint(), Err(Error::Cancelled)));
    }
}
