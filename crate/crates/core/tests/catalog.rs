use noether_core::catalog::{builtin_model, covariant_divergence_oracle, MODEL_NAMES};
use noether_core::natural::{generalized_divergence, is_natural};
use noether_core::variational::{conserved_current, euler_lagrange, is_symmetry, source_apply};
use noether_core::{
    parse_expression, Atom, BundleSpec, Expression, FieldDecl, FieldKind, HorizontalForm, Jets,
    SourceEquation,
};

fn parse_all(b: &BundleSpec, src: &[&str]) -> Vec<Expression> {
    src.iter()
        .map(|s| parse_expression(s, b).unwrap())
        .collect()
}

#[test]
fn catalog_sources_are_euler_lagrange_forms() {
    for name in MODEL_NAMES {
        let m = builtin_model(name).unwrap();
        let j = Jets::new(&m.bundle);
        if let (Some(l), Some(t)) = (&m.lagrangian, &m.source) {
            assert_eq!(&euler_lagrange(&j, l).unwrap(), t, "{name}");
        }
        assert!(m.lagrangian.is_some() || m.source.is_some());
    }
}

#[test]
fn divergence_matches_covariant_oracle_on_metrics() {
    let m = builtin_model("metric-generic-2d").unwrap();
    let j = Jets::new(&m.bundle);
    let t = m.source.as_ref().unwrap();
    let div = generalized_divergence(&j, t).unwrap();
    assert_eq!(div.comps, covariant_divergence_oracle(&j, t).unwrap());
    assert!(!div.is_zero());
}

#[test]
fn divergence_reproduces_the_electromagnetic_formula() {
    let m = builtin_model("em-generic-2d").unwrap();
    let b = &m.bundle;
    let j = Jets::new(b);
    let t = m.source.as_ref().unwrap();
    let div = generalized_divergence(&j, t).unwrap();
    assert_eq!(div.comps, covariant_divergence_oracle(&j, t).unwrap());

    // The metric part alone is the covariant divergence of T; the rest is i_J dA + (div J) A.
    let metric_only = builtin_model("metric-generic-2d").unwrap();
    let gb = &metric_only.bundle;
    let g_div =
        generalized_divergence(&Jets::new(gb), metric_only.source.as_ref().unwrap()).unwrap();
    let em_terms = parse_all(
        b,
        &[
            "J[2]*(A[1;2] - A[2;1]) + (J[1;1] + J[2;2])*A[1]",
            "J[1]*(A[2;1] - A[1;2]) + (J[1;1] + J[2;2])*A[2]",
        ],
    );
    let printed: Vec<String> = g_div
        .comps
        .iter()
        .map(|e| noether_core::format_expression(e, gb))
        .collect();
    for i in 0..2 {
        let metric_part = parse_expression(&printed[i], b).unwrap();
        assert_eq!(
            div.comps[i],
            &metric_part + &em_terms[i],
            "component {}",
            i + 1
        );
    }
}

#[test]
fn maxwell_source_is_natural() {
    let m = builtin_model("maxwell-2d").unwrap();
    let j = Jets::new(&m.bundle);
    let t = m.source_equation(&j).unwrap();
    assert!(!t.is_zero());
    assert!(generalized_divergence(&j, &t).unwrap().is_zero());
    assert!(is_natural(&j, &t).unwrap());
}

#[test]
fn hilbert_lagrangian_is_null() {
    let m = builtin_model("hilbert-2d").unwrap();
    let j = Jets::new(&m.bundle);
    let l = m.lagrangian.as_ref().unwrap();
    assert!(l
        .coeff
        .contains(|a| matches!(a, Atom::Jet { derivs, .. } if derivs.order() == 2)));
    assert!(euler_lagrange(&j, l).unwrap().is_zero());
}

#[test]
fn non_natural_sources_have_jet_dependent_divergence() {
    let b = BundleSpec::new(1, vec![FieldDecl::new("g", FieldKind::Symmetric2)]).unwrap();
    let j = Jets::new(&b);
    let t = SourceEquation::new(
        &b,
        [(b.components()[0].clone(), Expression::one())]
            .into_iter()
            .collect(),
    )
    .unwrap();
    let div = generalized_divergence(&j, &t).unwrap();
    assert_eq!(div.comps, parse_all(&b, &["g[1,1;1]"]));
    assert!(div.comps[0].contains(Atom::is_jet));
    assert!(!is_natural(&j, &t).unwrap());

    let m = builtin_model("laplace-2d").unwrap();
    let j = Jets::new(&m.bundle);
    let t = m.source.as_ref().unwrap();
    let div = generalized_divergence(&j, t).unwrap();
    assert!(div
        .comps
        .iter()
        .all(|e| e.contains(Atom::is_jet) && !e.contains(Atom::is_aux)));
    assert!(!is_natural(&j, t).unwrap());
}

fn current(model: &str, field: &str) -> (BundleSpec, HorizontalForm) {
    let m = builtin_model(model).unwrap();
    let j = Jets::new(&m.bundle);
    let t = m.source.as_ref().unwrap();
    let v = m.symmetry(field).unwrap();
    assert!(is_symmetry(&j, v, t).unwrap());
    let w = conserved_current(&j, v, t).unwrap();
    assert_eq!(
        j.horizontal_differential(&w).unwrap(),
        source_apply(t, v).unwrap()
    );
    (m.bundle, w)
}

#[test]
fn noether_currents_of_scalar_models() {
    let (b, w) = current("laplace-1d", "translation");
    assert_eq!(w.comps, parse_all(&b, &["-1/2*u[;1]^2"]));
    let (b, w) = current("laplace-1d", "shift");
    assert_eq!(w.comps, parse_all(&b, &["-u[;1]"]));
    let (b, w) = current("laplace-2d", "shift");
    assert_eq!(w.comps, parse_all(&b, &["-u[;1]", "-u[;2]"]));
    let (b, w) = current("wave-1d", "shift");
    assert_eq!(w.comps, parse_all(&b, &["-u[;1]", "u[;2]"]));
    for (model, field) in [
        ("laplace-2d", "translation-1"),
        ("laplace-2d", "translation-2"),
        ("wave-1d", "translation-1"),
        ("wave-1d", "translation-2"),
    ] {
        current(model, field);
    }
}

#[test]
fn oracle_rejects_unsupported_bundles() {
    let m = builtin_model("laplace-1d").unwrap();
    let j = Jets::new(&m.bundle);
    assert!(covariant_divergence_oracle(&j, m.source.as_ref().unwrap()).is_err());
}
