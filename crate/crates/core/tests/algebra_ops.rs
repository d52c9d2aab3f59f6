use fmkernel::algebra::{
    apply_differential, build_algebra, localize, multiply, AlgebraElement, AlgebraError,
    VariableDecl,
};
use std::sync::Arc;

fn v(name: &str, w: i64, h: i64) -> VariableDecl {
    VariableDecl::new(name, vec![w], h)
}

fn mukai() -> Arc<fmkernel::algebra::Algebra> {
    build_algebra(
        1,
        vec![
            v("x1", 1, 0),
            v("x2", 1, 0),
            v("y1", -1, 0),
            v("y2", -1, 0),
            v("e", 0, -1),
        ],
        &[("e", "x1*y1 + x2*y2")],
        &[],
    )
    .unwrap()
}

fn two_odd() -> Arc<fmkernel::algebra::Algebra> {
    build_algebra(
        1,
        vec![
            v("x1", 1, 0),
            v("x2", 1, 0),
            v("y1", -1, 0),
            v("y2", -1, 0),
            v("e1", 0, -1),
            v("e2", 0, -1),
        ],
        &[("e1", "x1*y1"), ("e2", "x2*y2")],
        &[],
    )
    .unwrap()
}

fn el(a: &Arc<fmkernel::algebra::Algebra>, s: &str) -> AlgebraElement {
    AlgebraElement::parse(a, s).unwrap()
}

#[test]
fn mukai_presentation_is_valid() {
    let a = mukai();
    assert_eq!(a.nvars(), 5);
    assert_eq!(apply_differential(&el(&a, "e")), el(&a, "x1*y1 + x2*y2"));
}

#[test]
fn empty_presentation_is_the_ground_ring() {
    let a = build_algebra(1, vec![], &[], &[]).unwrap();
    assert_eq!(a.nvars(), 0);
    assert_eq!(el(&a, "3/4").to_string(), "3/4");
}

#[test]
fn weight_changing_differential_is_rejected() {
    let err = build_algebra(
        1,
        vec![v("x1", 1, 0), v("y1", -1, 0), v("e", 1, -1)],
        &[("e", "x1*y1")],
        &[],
    )
    .unwrap_err();
    assert!(matches!(err, AlgebraError::DegreeMismatch { .. }), "{err}");
}

#[test]
fn duplicate_and_zero_weight_names_are_rejected() {
    let err = build_algebra(1, vec![v("x", 1, 0), v("x", 2, 0)], &[], &[]).unwrap_err();
    assert_eq!(err, AlgebraError::DuplicateName("x".into()));
    let err = build_algebra(1, vec![v("t", 0, 0)], &[], &[]).unwrap_err();
    assert_eq!(err, AlgebraError::ZeroWeightBaseVariable("t".into()));
}

#[test]
fn non_square_zero_differential_is_rejected() {
    // d(f) = e with d(e) = x*y gives d(d f) = x*y != 0
    let err = build_algebra(
        1,
        vec![v("x", 1, 0), v("y", -1, 0), v("e", 0, -1), v("f", 0, -2)],
        &[("e", "x*y"), ("f", "e")],
        &[],
    )
    .unwrap_err();
    assert_eq!(err, AlgebraError::DifferentialNotSquareZero("f".into()));
}

#[test]
fn odd_generators_anticommute_and_square_to_zero() {
    let a = two_odd();
    let e1 = el(&a, "e1");
    let e2 = el(&a, "e2");
    assert!(multiply(&e1, &e1).unwrap().is_zero());
    let s = multiply(&e1, &e2)
        .unwrap()
        .add(&multiply(&e2, &e1).unwrap())
        .unwrap();
    assert!(s.is_zero());
    assert_eq!(el(&a, "e2*e1"), el(&a, "-e1*e2"));
}

#[test]
fn difference_of_squares() {
    let a = two_odd();
    let p = multiply(&el(&a, "x1 + y1"), &el(&a, "x1 - y1")).unwrap();
    assert_eq!(p, el(&a, "x1^2 - y1^2"));
}

#[test]
fn leibniz_on_a_product_of_odd_generators() {
    let a = two_odd();
    let lhs = apply_differential(&el(&a, "e1*e2"));
    // d(e1 e2) = d(e1) e2 - e1 d(e2), expanded by hand
    let rhs = el(&a, "x1*y1*e2 - x2*y2*e1");
    assert_eq!(lhs, rhs);
    assert!(apply_differential(&el(&a, "x1")).is_zero());
}

#[test]
fn mismatched_algebras_are_rejected() {
    let a = two_odd();
    let b = mukai();
    assert_eq!(
        multiply(&el(&a, "x1"), &el(&b, "x1")).unwrap_err(),
        AlgebraError::AlgebraMismatch
    );
}

#[test]
fn localization_rules() {
    let a = two_odd();
    let same = localize(&a, &[]).unwrap();
    assert_eq!(*same, *a);
    let chart = localize(&a, &["x1"]).unwrap();
    assert!(chart.is_inverted(chart.var_index("x1").unwrap()));
    let inv = el(&chart, "x1^-1");
    assert_eq!(multiply(&inv, &el(&chart, "x1")).unwrap(), el(&chart, "1"));
    assert_eq!(
        localize(&a, &["e1"]).unwrap_err(),
        AlgebraError::OddVariableInverted("e1".into())
    );
}

#[test]
fn parse_errors_carry_offsets() {
    let a = mukai();
    match AlgebraElement::parse(&a, "x1*").unwrap_err() {
        AlgebraError::Parse(p) => assert_eq!(p.offset, 2),
        e => panic!("unexpected {e}"),
    }
    match AlgebraElement::parse(&a, "x1 + q").unwrap_err() {
        AlgebraError::Parse(p) => assert_eq!(p.offset, 5),
        e => panic!("unexpected {e}"),
    }
    assert_eq!(
        el(&a, " 2 * x1 ^ 2 + 1/2*y1").to_string(),
        "2*x1^2 + 1/2*y1"
    );
}
