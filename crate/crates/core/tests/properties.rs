use noether_core::natural::{delta_lift, divergence_density, generalized_divergence};
use noether_core::variational::{
    euler_lagrange, euler_operator_aux, first_variation, horizontal_primitive, source_apply,
    tonti_lagrangian,
};
use noether_core::{
    format_expression, parse_expression, BundleSpec, Density, Expression, FieldDecl, FieldKind,
    Jets, MultiIndex, SourceEquation,
};
use noether_testkit::{
    random_field, random_form, random_lagrangian, random_polynomial, rng, scalar_bundle, Shape,
};
use proptest::prelude::*;

fn bundle_for(seed: u64) -> BundleSpec {
    scalar_bundle(1 + (seed % 2) as usize, seed.is_multiple_of(3))
}

fn small() -> Shape {
    Shape {
        max_order: 2,
        max_degree: 3,
        max_terms: 3,
        base_weight: 0.2,
    }
}

fn random_source(seed: u64, bundle: &BundleSpec) -> SourceEquation {
    let mut r = rng(seed);
    let comps = bundle
        .components()
        .into_iter()
        .map(|c| (c, random_polynomial(&mut r, bundle, small())))
        .collect();
    SourceEquation::new(bundle, comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn total_derivatives_commute(seed in any::<u64>()) {
        let b = scalar_bundle(2, true);
        let j = Jets::new(&b);
        let f = random_polynomial(&mut rng(seed), &b, small());
        let d12 = j.total_derivative(&j.total_derivative(&f, 1).unwrap(), 2).unwrap();
        let d21 = j.total_derivative(&j.total_derivative(&f, 2).unwrap(), 1).unwrap();
        prop_assert_eq!(d12, d21);
    }

    #[test]
    fn total_derivative_is_a_derivation(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let j = Jets::new(&b);
        let mut r = rng(seed);
        let f = random_polynomial(&mut r, &b, small());
        let g = random_polynomial(&mut r, &b, small());
        let lhs = j.total_derivative(&(&f * &g), 1).unwrap();
        let rhs = &(&j.total_derivative(&f, 1).unwrap() * &g) + &(&f * &j.total_derivative(&g, 1).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn prolongation_is_a_derivation(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let j = Jets::new(&b);
        let mut r = rng(seed);
        let v = random_field(&mut r, &b, small());
        let f = random_polynomial(&mut r, &b, small());
        let g = random_polynomial(&mut r, &b, small());
        let lhs = j.prolong_apply(&v, &(&f * &g)).unwrap();
        let rhs = &(&j.prolong_apply(&v, &f).unwrap() * &g) + &(&f * &j.prolong_apply(&v, &g).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let e = random_polynomial(&mut rng(seed), &b, Shape { max_terms: 6, ..small() });
        let text = format_expression(&e, &b);
        prop_assert_eq!(parse_expression(&text, &b).unwrap(), e);
    }

    #[test]
    fn sums_are_confluent(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let mut r = rng(seed);
        let xs: Vec<Expression> = (0..4).map(|_| random_polynomial(&mut r, &b, small())).collect();
        let left = xs.iter().fold(Expression::zero(), |acc, x| &acc + x);
        let right = xs.iter().rev().fold(Expression::zero(), |acc, x| &acc + x);
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left, Expression::sum(xs.iter()));
        let p1 = &(&xs[0] * &xs[1]) * &xs[2];
        let p2 = &xs[0] * &(&xs[1] * &xs[2]);
        prop_assert_eq!(p1, p2);
    }

    #[test]
    fn euler_operator_kills_total_divergences(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let j = Jets::new(&b);
        let w = random_form(&mut rng(seed), &b, small());
        let f = j.horizontal_differential(&w).unwrap();
        prop_assert!(euler_lagrange(&j, &f).unwrap().is_zero());
    }

    #[test]
    fn euler_form_ignores_total_divergences(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let j = Jets::new(&b);
        let mut r = rng(seed);
        let l = random_lagrangian(&mut r, &b, small());
        let w = random_form(&mut r, &b, small());
        let shifted = Density::new(&l.coeff + &j.horizontal_differential(&w).unwrap().coeff);
        prop_assert_eq!(euler_lagrange(&j, &l).unwrap(), euler_lagrange(&j, &shifted).unwrap());
    }

    #[test]
    fn first_variation_splits_exactly(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let j = Jets::new(&b);
        let mut r = rng(seed);
        let l = random_lagrangian(&mut r, &b, small());
        let v = random_field(&mut r, &b, small());
        let fv = first_variation(&j, &l, &v).unwrap();
        let lhs = j.prolong_apply(&v, &l.coeff).unwrap();
        let rhs = &fv.source_times_v.coeff + &j.horizontal_differential(&fv.current).unwrap().coeff;
        prop_assert_eq!(lhs, rhs);
        let e = euler_lagrange(&j, &l).unwrap();
        prop_assert_eq!(fv.source_times_v, source_apply(&e, &v).unwrap());
    }

    #[test]
    fn euler_operator_commutes_with_variations(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let j = Jets::new(&b);
        let mut r = rng(seed);
        let l = random_lagrangian(&mut r, &b, small());
        let v = random_field(&mut r, &b, small());
        let lhs = euler_lagrange(&j, &Density::new(j.prolong_apply(&v, &l.coeff).unwrap())).unwrap();
        let e = euler_lagrange(&j, &l).unwrap();
        let rhs = euler_lagrange(&j, &source_apply(&e, &v).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn tonti_inverts_the_euler_operator(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let j = Jets::new(&b);
        let l = random_lagrangian(&mut rng(seed), &b, small());
        let e = euler_lagrange(&j, &l).unwrap();
        let back = euler_lagrange(&j, &tonti_lagrangian(&j, &e).unwrap()).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn horizontal_primitive_inverts_d_h(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let j = Jets::new(&b);
        let w = random_form(&mut rng(seed), &b, small());
        let f = j.horizontal_differential(&w).unwrap();
        let p = horizontal_primitive(&j, &f).unwrap();
        prop_assert_eq!(j.horizontal_differential(&p).unwrap(), f);
    }

    #[test]
    fn divergence_remainder_is_exact(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let j = Jets::new(&b);
        let t = random_source(seed, &b);
        let div = generalized_divergence(&j, &t).unwrap();
        let lift = delta_lift(&b).unwrap();
        let rest = &source_apply(&t, &lift.0).unwrap().coeff - &divergence_density(&div).coeff;
        let e = euler_operator_aux(&j, &Density::new(rest)).unwrap();
        prop_assert!(e.iter().all(Expression::is_zero));
    }

    #[test]
    fn lie_derivative_along_lifts_matches_divergence(seed in any::<u64>()) {
        let b = bundle_for(seed);
        let j = Jets::new(&b);
        let l = random_lagrangian(&mut rng(seed), &b, small());
        let t = euler_lagrange(&j, &l).unwrap();
        let div = generalized_divergence(&j, &t).unwrap();
        let lift = delta_lift(&b).unwrap();
        let lhs = euler_lagrange(&j, &source_apply(&t, &lift.0).unwrap()).unwrap();
        let rhs = euler_lagrange(&j, &divergence_density(&div)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

fn metric_line() -> BundleSpec {
    BundleSpec::new(
        1,
        vec![
            FieldDecl::new("g", FieldKind::Symmetric2),
            FieldDecl::new("u", FieldKind::Scalar),
        ],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn divergence_on_metric_line_is_exact(seed in any::<u64>()) {
        let b = metric_line();
        let j = Jets::new(&b);
        let t = random_source(seed, &b);
        let div = generalized_divergence(&j, &t).unwrap();
        let lift = delta_lift(&b).unwrap();
        let rest = &source_apply(&t, &lift.0).unwrap().coeff - &divergence_density(&div).coeff;
        let e = euler_operator_aux(&j, &Density::new(rest)).unwrap();
        prop_assert!(e.iter().all(Expression::is_zero));
    }

    #[test]
    fn flipping_the_lift_flips_the_divergence(seed in any::<u64>()) {
        let b = metric_line();
        let j = Jets::new(&b);
        let t = random_source(seed, &b);
        let div = generalized_divergence(&j, &t).unwrap();
        let lift = delta_lift(&b).unwrap();
        let flipped = Density::new(-source_apply(&t, &lift.0).unwrap().coeff);
        let neg = euler_operator_aux(&j, &flipped).unwrap();
        prop_assert_eq!(neg, div.comps.iter().map(|e| -e.clone()).collect::<Vec<_>>());
    }
}

#[test]
fn witness_multi_index_is_within_bound() {
    let b = scalar_bundle(2, false);
    let j = Jets::new(&b);
    let l = Density::new(parse_expression("u[;1]", &b).unwrap());
    let k = noether_core::variational::base_monomial_witness(&j, &l)
        .unwrap()
        .unwrap();
    assert!(k.order() <= b.order_bound());
    assert_ne!(k, MultiIndex::empty());
}
