//! Euler–Lagrange operator, first variation, Vainberg–Tonti reconstruction,
//! symmetries and conserved currents.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::atom::{Atom, Component, MultiIndex};
use crate::bundle::{Density, EvolutionaryField, HorizontalForm, SourceEquation};
use crate::error::{Error, Result};
use crate::expr::{Expression, Monomial};
use crate::jet::{jet_coordinates, Jets};
use crate::rational::Rational;

/// The two pieces of `pr V(L) = T(V) + d_h(i_V Θ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstVariationResult {
    /// `Σ_α E(L)_α V^α`.
    pub source_times_v: Density,
    /// The boundary current `i_V Θ`.
    pub current: HorizontalForm,
}

fn sign(order: usize) -> Rational {
    if order.is_multiple_of(2) {
        Rational::ONE
    } else {
        -Rational::ONE
    }
}

/// Euler operator of `e` with respect to one group of coordinates:
/// `Σ_I (-1)^|I| D_I(∂e/∂a_I)` over the given `(multi-index, atom)` pairs.
fn euler_sum(jets: &Jets, e: &Expression, atoms: &[(MultiIndex, Atom)]) -> Result<Expression> {
    let mut parts = Vec::with_capacity(atoms.len());
    for (idx, a) in atoms {
        jets.checkpoint()?;
        let c = e.partial(a)?;
        if c.is_zero() {
            continue;
        }
        let d = jets.total_derivative_multi(&c, idx)?;
        parts.push(d.scale(sign(idx.order())));
    }
    Ok(Expression::sum(parts.iter()))
}

fn group_by_component(atoms: Vec<Atom>) -> BTreeMap<Component, Vec<(MultiIndex, Atom)>> {
    let mut by: BTreeMap<Component, Vec<(MultiIndex, Atom)>> = BTreeMap::new();
    for a in atoms {
        if let Atom::Jet {
            field,
            comp,
            derivs,
        } = &a
        {
            by.entry(Component::new(*field, comp.clone()))
                .or_default()
                .push((derivs.clone(), a.clone()));
        }
    }
    by
}

/// `E(L)_α = Σ_I (-1)^|I| D_I(∂L/∂y^α_I)`.
pub fn euler_lagrange(jets: &Jets, l: &Density) -> Result<SourceEquation> {
    let by = group_by_component(jet_coordinates(jets.bundle(), &l.coeff));
    let mut out = BTreeMap::new();
    for c in jets.bundle().components() {
        let e = match by.get(&c) {
            Some(atoms) => euler_sum(jets, &l.coeff, atoms)?,
            None => Expression::zero(),
        };
        out.insert(c, e);
    }
    Ok(SourceEquation::from_map_unchecked(out))
}

/// Euler operator with respect to the formal vector-field atoms `D^i_{,J}`.
pub fn euler_operator_aux(jets: &Jets, p: &Density) -> Result<Vec<Expression>> {
    let mut by: BTreeMap<u8, Vec<(MultiIndex, Atom)>> = BTreeMap::new();
    for a in p.coeff.atoms() {
        if let Atom::Aux { index, derivs } = &a {
            by.entry(*index)
                .or_default()
                .push((derivs.clone(), a.clone()));
        }
    }
    let mut out = Vec::with_capacity(jets.dim());
    for i in 1..=jets.dim() as u8 {
        out.push(match by.get(&i) {
            Some(atoms) => euler_sum(jets, &p.coeff, atoms)?,
            None => Expression::zero(),
        });
    }
    Ok(out)
}

/// Integration by parts of `Σ_{k,J} D_J(W^k) · C_{k,J}` into
/// `Σ_k W^k · R_k + Σ_i D_i ω^i`.
///
/// The schedule is deterministic: the slot with the longest (then
/// lexicographically largest) multi-index is peeled first, removing its
/// largest base index, and the boundary term goes to that index's component.
/// `lift(k, K)` must return `D_K(W^k)`.
pub(crate) fn integrate_by_parts<K, F>(
    jets: &Jets,
    mut slots: BTreeMap<(K, MultiIndex), Expression>,
    mut lift: F,
) -> Result<(BTreeMap<K, Expression>, HorizontalForm)>
where
    K: Ord + Clone,
    F: FnMut(&K, &MultiIndex) -> Result<Expression>,
{
    let n = jets.dim();
    let mut boundary: Vec<Vec<Expression>> = alloc::vec![Vec::new(); n];
    loop {
        jets.checkpoint()?;
        let next = slots
            .iter()
            .filter(|((_, j), _)| !j.is_empty())
            .max_by(|((ka, ja), _), ((kb, jb), _)| (ja.order(), ja, ka).cmp(&(jb.order(), jb, kb)))
            .map(|(key, _)| key.clone());
        let Some(key) = next else { break };
        let c = slots.remove(&key).unwrap();
        if c.is_zero() {
            continue;
        }
        let (k, j) = key;
        let (rest, i) = j.split_last().unwrap();
        let w = lift(&k, &rest)?;
        if !w.is_zero() {
            boundary[i as usize - 1].push(&w * &c);
        }
        let dc = jets.total_derivative(&c, i as usize)?;
        let slot = slots.entry((k, rest)).or_insert_with(Expression::zero);
        *slot = &*slot - &dc;
    }
    let residual = slots.into_iter().map(|((k, _), c)| (k, c)).collect();
    let current = HorizontalForm::new(
        boundary
            .iter()
            .map(|parts| Expression::sum(parts.iter()))
            .collect(),
    );
    Ok((residual, current))
}

/// Splits `pr V(L)` as `Σ E(L)_α V^α + d_h(current)`.
pub fn first_variation(
    jets: &Jets,
    l: &Density,
    v: &EvolutionaryField,
) -> Result<FirstVariationResult> {
    let mut slots = BTreeMap::new();
    for a in jet_coordinates(jets.bundle(), &l.coeff) {
        let Atom::Jet {
            field,
            comp,
            derivs,
        } = &a
        else {
            continue;
        };
        let key = Component::new(*field, comp.clone());
        if v.get(&key).is_none_or(Expression::is_zero) {
            continue;
        }
        let c = l.coeff.partial(&a)?;
        if !c.is_zero() {
            slots.insert((key, derivs.clone()), c);
        }
    }
    let (residual, current) = integrate_by_parts(jets, slots, |k, idx| {
        let va = v.get(k).cloned().unwrap_or_default();
        jets.total_derivative_multi(&va, idx)
    })?;
    let parts: Vec<Expression> = residual
        .iter()
        .map(|(k, r)| r * v.get(k).unwrap())
        .collect();
    Ok(FirstVariationResult {
        source_times_v: Density::new(Expression::sum(parts.iter())),
        current,
    })
}

/// `T(V) = Σ_α T_α V^α` as a density.
pub fn source_apply(t: &SourceEquation, v: &EvolutionaryField) -> Result<Density> {
    if !t.components_match(v) {
        return Err(Error::ComponentMismatch(
            "source equation and vector field live on different bundles".into(),
        ));
    }
    let parts: Vec<Expression> = t
        .iter()
        .zip(v.iter())
        .map(|((_, ta), (_, va))| ta * va)
        .collect();
    Ok(Density::new(Expression::sum(parts.iter())))
}

const HOMOTOPY: Atom = Atom::Param(0);

fn require_polynomial(e: &Expression, what: &str) -> Result<()> {
    if e.contains(|a| a.is_root() || a.is_aux() || matches!(a, Atom::Param(_))) {
        return Err(Error::NotPolynomial(alloc::format!(
            "{what} must be polynomial in the jet variables"
        )));
    }
    Ok(())
}

/// Multiplies every term by `t^(fiber degree)`, i.e. substitutes `y ↦ t·y`
/// for the jet atoms selected by `scaled`.
fn scale_fiber(e: &Expression, scaled: impl Fn(&Atom) -> bool) -> Expression {
    let terms: Vec<(Monomial, Rational)> = e
        .terms()
        .iter()
        .map(|(m, c)| {
            let deg: i32 = m
                .factors()
                .iter()
                .filter(|(a, _)| scaled(a))
                .map(|(_, k)| *k)
                .sum();
            let mut m = m.clone();
            m.mul_atom(&HOMOTOPY, deg);
            (m, *c)
        })
        .collect();
    Expression::from_terms(terms)
}

/// Vainberg–Tonti Lagrangian `∫₀¹ Σ_α y^α T_α(x, t·y) dt`.
pub fn tonti_lagrangian(jets: &Jets, t: &SourceEquation) -> Result<Density> {
    let bundle = jets.bundle();
    let dynamic = |a: &Atom| matches!(a, Atom::Jet { field, .. } if bundle.is_dynamic(*field));
    let mut parts = Vec::new();
    for (c, ta) in t.iter() {
        require_polynomial(ta, "source")?;
        let y = Expression::atom(c.jet(MultiIndex::empty()));
        parts.push(&y * &scale_fiber(ta, dynamic));
    }
    let integrand = Expression::sum(parts.iter());
    Ok(Density::new(integrand.integrate_unit(&HOMOTOPY)?))
}

/// True iff `E(tonti(T)) = T`.
pub fn is_locally_variational(jets: &Jets, t: &SourceEquation) -> Result<bool> {
    let l = tonti_lagrangian(jets, t)?;
    let back = euler_lagrange(jets, &l)?;
    let same = back
        .iter()
        .zip(t.iter())
        .all(|((_, a), (_, b))| (a - b).is_zero());
    Ok(same)
}

/// True iff `E(L) = 0`, i.e. `L` is locally `d_h`-exact.
pub fn is_null_lagrangian(jets: &Jets, l: &Density) -> Result<bool> {
    Ok(euler_lagrange(jets, l)?.is_zero())
}

/// `L_V T = E(T(V))`, valid for locally variational `T`.
pub fn lie_derivative_source(
    jets: &Jets,
    v: &EvolutionaryField,
    t: &SourceEquation,
) -> Result<SourceEquation> {
    euler_lagrange(jets, &source_apply(t, v)?)
}

pub fn is_symmetry(jets: &Jets, v: &EvolutionaryField, t: &SourceEquation) -> Result<bool> {
    Ok(lie_derivative_source(jets, v, t)?.is_zero())
}

/// Writes a polynomial density as `d_h ω` by the fiber-scaling homotopy.
///
/// With `Y = Σ y^α ∂/∂y^α`, `f(y) - f(0) = ∫₀¹ t⁻¹ [pr Y f](t·y) dt` and the
/// first variation of `f` along `Y` is a pure divergence when `E(f) = 0`. The
/// `y`-free remainder is integrated along `x¹`. The result is checked exactly;
/// a nonzero remainder is returned as [`Error::NotExact`].
pub fn horizontal_primitive(jets: &Jets, f: &Density) -> Result<HorizontalForm> {
    require_polynomial(&f.coeff, "density")?;
    let bundle = jets.bundle();
    let is_jet = |a: &Atom| a.is_jet();
    let fiber_part = f
        .coeff
        .filter_terms(|m| m.factors().iter().any(|(a, _)| a.is_jet()));
    let base_part = &f.coeff - &fiber_part;

    let mut slots = BTreeMap::new();
    for a in fiber_part.atoms() {
        let Atom::Jet {
            field,
            comp,
            derivs,
        } = &a
        else {
            continue;
        };
        let c = fiber_part.partial(&a)?;
        if !c.is_zero() {
            slots.insert((Component::new(*field, comp.clone()), derivs.clone()), c);
        }
    }
    let (_, scaled_current) = integrate_by_parts(jets, slots, |k, idx| {
        Ok(Expression::atom(k.jet(idx.clone())))
    })?;

    let t_inv = Expression::atom_pow(HOMOTOPY, -1);
    let mut comps = Vec::with_capacity(jets.dim());
    for w in &scaled_current.comps {
        let integrand = &scale_fiber(w, is_jet) * &t_inv;
        comps.push(integrand.integrate_unit(&HOMOTOPY)?);
    }
    if !base_part.is_zero() {
        let x1 = Atom::Base(1);
        let prim = base_part.map_coefficients(|m| Rational::new(1, m.exponent(&x1) as i128 + 1));
        comps[0] = &comps[0] + &prim.mul_monomial(&Monomial::atom(x1, 1), Rational::ONE);
    }
    let w = HorizontalForm::new(comps);
    let check = jets.horizontal_differential(&w)?;
    let residual = &f.coeff - &check.coeff;
    if !residual.is_zero() {
        let _ = bundle;
        return Err(Error::NotExact { residual });
    }
    Ok(w)
}

/// Conserved current of a symmetry: `ω` with `d_h ω = T(V)`.
pub fn conserved_current(
    jets: &Jets,
    v: &EvolutionaryField,
    t: &SourceEquation,
) -> Result<HorizontalForm> {
    horizontal_primitive(jets, &source_apply(t, v)?)
}

/// Searches for a base monomial `x^K`, `|K| <= order(L)`, with `E(x^K L) != 0`.
///
/// Such a witness exists whenever `L` genuinely depends on jet variables, so a
/// density whose multiples by all functions of `x` are null Lagrangians must be
/// a function of `x` alone.
pub fn base_monomial_witness(jets: &Jets, l: &Density) -> Result<Option<MultiIndex>> {
    let max = l.coeff.jet_order();
    let n = jets.dim() as u8;
    let mut frontier = alloc::vec![MultiIndex::empty()];
    for _ in 0..=max {
        let mut next = Vec::new();
        for k in &frontier {
            let mut xk = Expression::one();
            for &i in k.indices() {
                xk = &xk * &Expression::atom(Atom::Base(i));
            }
            if !euler_lagrange(jets, &Density::new(&xk * &l.coeff))?.is_zero() {
                return Ok(Some(k.clone()));
            }
            let last = k.indices().last().copied().unwrap_or(1);
            for i in last..=n {
                next.push(k.with(i));
            }
        }
        frontier = next;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::FieldId;
    use crate::bundle::{BundleSpec, FieldDecl, FieldKind};
    use crate::parse::parse_expression;

    fn b1() -> BundleSpec {
        BundleSpec::new(1, alloc::vec![FieldDecl::new("u", FieldKind::Scalar)]).unwrap()
    }

    fn b2() -> BundleSpec {
        BundleSpec::new(2, alloc::vec![FieldDecl::new("u", FieldKind::Scalar)]).unwrap()
    }

    fn scalar_comp() -> Component {
        Component::new(FieldId(0), crate::atom::Comp::scalar())
    }

    fn src(b: &BundleSpec, s: &str) -> SourceEquation {
        let m = [(scalar_comp(), parse_expression(s, b).unwrap())]
            .into_iter()
            .collect();
        SourceEquation::new(b, m).unwrap()
    }

    fn vf(b: &BundleSpec, s: &str) -> EvolutionaryField {
        let m = [(scalar_comp(), parse_expression(s, b).unwrap())]
            .into_iter()
            .collect();
        EvolutionaryField::new(b, m).unwrap()
    }

    fn dens(b: &BundleSpec, s: &str) -> Density {
        Density::new(parse_expression(s, b).unwrap())
    }

    fn t_u(t: &SourceEquation) -> Expression {
        t.get(&scalar_comp()).unwrap().clone()
    }

    #[test]
    fn euler_lagrange_examples() {
        let b = b1();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        assert_eq!(
            t_u(&euler_lagrange(&j, &dens(&b, "u[;1]^2/2")).unwrap()),
            p("-u[;1,1]")
        );
        assert!(euler_lagrange(&j, &dens(&b, "u[]*u[;1]"))
            .unwrap()
            .is_zero());
        assert_eq!(
            t_u(&euler_lagrange(&j, &dens(&b, "u[]")).unwrap()),
            Expression::one()
        );
    }

    #[test]
    fn first_variation_examples() {
        let b = b1();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        let l = dens(&b, "u[;1]^2/2");
        let r = first_variation(&j, &l, &vf(&b, "u[;1]")).unwrap();
        assert_eq!(r.source_times_v.coeff, p("-u[;1,1]*u[;1]"));
        assert_eq!(r.current.comps, alloc::vec![p("u[;1]^2")]);
        let r = first_variation(&j, &l, &vf(&b, "1")).unwrap();
        assert_eq!(r.source_times_v.coeff, p("-u[;1,1]"));
        assert_eq!(r.current.comps, alloc::vec![p("u[;1]")]);
        let r = first_variation(&j, &l, &vf(&b, "0")).unwrap();
        assert!(r.source_times_v.is_zero() && r.current.is_zero());
    }

    #[test]
    fn tonti_examples() {
        let b = b1();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        let l = tonti_lagrangian(&j, &src(&b, "-u[;1,1]")).unwrap();
        assert_eq!(l.coeff, p("-1/2*u[]*u[;1,1]"));
        assert_eq!(t_u(&euler_lagrange(&j, &l).unwrap()), p("-u[;1,1]"));
        assert_eq!(
            tonti_lagrangian(&j, &src(&b, "u[]")).unwrap().coeff,
            p("u[]^2/2")
        );
        let l = tonti_lagrangian(&j, &src(&b, "u[;1]")).unwrap();
        assert_eq!(l.coeff, p("u[]*u[;1]/2"));
        assert!(euler_lagrange(&j, &l).unwrap().is_zero());
        assert!(is_locally_variational(&j, &src(&b, "-u[;1,1]")).unwrap());
        assert!(!is_locally_variational(&j, &src(&b, "u[;1]")).unwrap());
    }

    #[test]
    fn tonti_rejects_roots() {
        let b =
            BundleSpec::new(1, alloc::vec![FieldDecl::new("g", FieldKind::Symmetric2)]).unwrap();
        let j = Jets::new(&b);
        let c = b.components()[0].clone();
        let t = SourceEquation::new(
            &b,
            [(c, parse_expression("sqrtdet(g)", &b).unwrap())]
                .into_iter()
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            tonti_lagrangian(&j, &t),
            Err(Error::NotPolynomial(_))
        ));
    }

    #[test]
    fn null_lagrangian_examples() {
        let b = b1();
        let j = Jets::new(&b);
        assert!(is_null_lagrangian(&j, &dens(&b, "u[]*u[;1]")).unwrap());
        assert!(!is_null_lagrangian(&j, &dens(&b, "u[]")).unwrap());
        assert!(is_null_lagrangian(&j, &dens(&b, "u[;1]*u[;1,1]")).unwrap());
    }

    #[test]
    fn source_apply_examples() {
        let b = b1();
        let p = |s| parse_expression(s, &b).unwrap();
        assert_eq!(
            source_apply(&src(&b, "-u[;1,1]"), &vf(&b, "u[;1]"))
                .unwrap()
                .coeff,
            p("-u[;1,1]*u[;1]")
        );
        assert_eq!(
            source_apply(&src(&b, "1"), &vf(&b, "u[]")).unwrap().coeff,
            p("u[]")
        );
        assert!(source_apply(&src(&b, "u[;1]"), &vf(&b, "0"))
            .unwrap()
            .is_zero());
        let other = b2();
        assert!(source_apply(
            &src(&b, "1"),
            &EvolutionaryField::zero(&BundleSpec::new(2, alloc::vec![]).unwrap())
        )
        .is_err());
        let _ = other;
    }

    #[test]
    fn lie_derivative_and_symmetry_examples() {
        let b = b1();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        let t = src(&b, "-u[;1,1]");
        assert_eq!(
            t_u(&lie_derivative_source(&j, &vf(&b, "u[]"), &t).unwrap()),
            p("-2*u[;1,1]")
        );
        assert!(lie_derivative_source(&j, &vf(&b, "u[;1]"), &t)
            .unwrap()
            .is_zero());
        assert!(lie_derivative_source(&j, &vf(&b, "0"), &t)
            .unwrap()
            .is_zero());
        assert!(is_symmetry(&j, &vf(&b, "u[;1]"), &t).unwrap());
        assert!(!is_symmetry(&j, &vf(&b, "u[]"), &t).unwrap());
        assert!(is_symmetry(&j, &vf(&b, "1"), &t).unwrap());
    }

    #[test]
    fn conserved_current_examples() {
        let b = b1();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        let t = src(&b, "-u[;1,1]");
        let w = conserved_current(&j, &vf(&b, "u[;1]"), &t).unwrap();
        assert_eq!(w.comps, alloc::vec![p("-1/2*u[;1]^2")]);
        let w = conserved_current(&j, &vf(&b, "1"), &t).unwrap();
        assert_eq!(w.comps, alloc::vec![p("-u[;1]")]);

        let b = b2();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        let w = conserved_current(&j, &vf(&b, "1"), &src(&b, "-u[;1,1] - u[;2,2]")).unwrap();
        assert_eq!(w.comps, alloc::vec![p("-u[;1]"), p("-u[;2]")]);
    }

    #[test]
    fn conserved_current_reports_non_exact_residual() {
        let b = b1();
        let j = Jets::new(&b);
        let r = conserved_current(&j, &vf(&b, "u[]"), &src(&b, "-u[;1,1]"));
        assert!(matches!(r, Err(Error::NotExact { .. })));
    }

    #[test]
    fn base_terms_integrate_along_first_coordinate() {
        let b = b2();
        let j = Jets::new(&b);
        let f = dens(&b, "x[1]^2*x[2] + u[;2]");
        let w = horizontal_primitive(&j, &f).unwrap();
        assert_eq!(j.horizontal_differential(&w).unwrap(), f);
    }

    #[test]
    fn euler_operator_aux_examples() {
        let b =
            BundleSpec::new(1, alloc::vec![FieldDecl::new("g", FieldKind::Symmetric2)]).unwrap();
        let j = Jets::new(&b);
        let p = |s| parse_expression(s, &b).unwrap();
        let d = Expression::atom(Atom::aux(1, MultiIndex::empty()));
        let d1 = Expression::atom(Atom::aux(1, MultiIndex::from_indices([1])));
        let f = p("g[1,1]^2");
        let e = euler_operator_aux(&j, &Density::new(&d1 * &f)).unwrap();
        assert_eq!(e[0], -j.total_derivative(&f, 1).unwrap());
        let e = euler_operator_aux(&j, &Density::new(&d * &p("g[1,1;1]"))).unwrap();
        assert_eq!(e[0], p("g[1,1;1]"));
        let pp = &(-&(&d * &p("g[1,1;1]"))) - &(&d1 * &p("2*g[1,1]"));
        let e = euler_operator_aux(&j, &Density::new(pp)).unwrap();
        assert_eq!(e[0], p("g[1,1;1]"));
    }

    #[test]
    fn witness_for_jet_dependent_density() {
        let b = b1();
        let j = Jets::new(&b);
        // u u_x is null, but x u u_x is not
        let k = base_monomial_witness(&j, &dens(&b, "u[]*u[;1]"))
            .unwrap()
            .unwrap();
        assert_eq!(k.order(), 1);
        assert!(base_monomial_witness(&j, &dens(&b, "x[1]^3"))
            .unwrap()
            .is_none());
    }
}
