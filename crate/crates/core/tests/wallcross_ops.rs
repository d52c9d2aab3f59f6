use fmkernel::algebra::{build_algebra, Algebra, VariableDecl};
use fmkernel::catalog::{affine_base, mukai, qnotasheaf, twopoints};
use fmkernel::complexes::Verdict;
use fmkernel::slices::TruncationBox;
use fmkernel::wallcross::{
    chart_homology, fiber_comparison, mukai_verify, restrict_kernel, WallCrossError,
};
use std::sync::Arc;

fn bx() -> TruncationBox {
    TruncationBox::default_for(1)
}

fn base(vars: &[(&str, i64)]) -> Arc<Algebra> {
    build_algebra(
        1,
        vars.iter()
            .map(|(n, w)| VariableDecl::new(*n, vec![*w], 0))
            .collect(),
        &[],
        &[],
    )
    .unwrap()
}

#[test]
fn charts_pair_positive_and_negative_variables() {
    let charts = restrict_kernel(&mukai(2).unwrap()).unwrap();
    let pairs: Vec<(String, String)> = charts.iter().map(|c| (c.x.clone(), c.y.clone())).collect();
    assert_eq!(pairs.len(), 4);
    assert!(pairs.contains(&("x1".into(), "y2".into())));
}

#[test]
fn missing_sides_are_rejected() {
    let err = restrict_kernel(&base(&[("x", 1)])).unwrap_err();
    assert!(matches!(err, WallCrossError::NoNegativeChart));
    let err = restrict_kernel(&base(&[("y", -1)])).unwrap_err();
    assert!(matches!(err, WallCrossError::NoPositiveChart));
}

#[test]
fn two_homologies_on_the_mixed_chart() {
    let rep = chart_homology(&qnotasheaf().unwrap(), "x1", "y2", &bx()).unwrap();
    assert_eq!(rep.nonzero_rows, [0, -1]);
    let h0 = rep.h0_carrier.as_ref().expect("H^0 carrier");
    let h1 = rep.h1_carrier.as_ref().expect("H^-1 carrier");
    assert_eq!(h0.verdict, Verdict::Pass);
    assert_eq!(h1.verdict, Verdict::Pass);
    assert!(h0.mismatched.is_empty() && h1.mismatched.is_empty());
    assert!(h0.matched > 0 && h1.matched > 0);
}

#[test]
fn mukai_charts_are_sheaves() {
    let r = mukai(2).unwrap();
    for (x, y) in [("x1", "y1"), ("x2", "y1")] {
        let rep = chart_homology(&r, x, y, &bx()).unwrap();
        assert!(rep.h_minus_one_vanishes(), "chart ({x}, {y})");
        assert_eq!(rep.nonzero_rows, [0]);
    }
}

#[test]
fn affine_chart_has_a_single_homology() {
    let rep = chart_homology(&affine_base().unwrap(), "x", "y", &bx()).unwrap();
    assert_eq!(rep.nonzero_rows, [0]);
}

#[test]
fn unknown_chart_is_rejected() {
    let err = chart_homology(&mukai(2).unwrap(), "x1", "x2", &bx()).unwrap_err();
    assert!(matches!(err, WallCrossError::UnknownChart(..)), "{err}");
}

#[test]
fn mukai_fiber_product_on_all_charts() {
    let f = fiber_comparison(&mukai(2).unwrap(), &bx()).unwrap();
    assert_eq!(f.charts.len(), 4);
    assert!(f.relations_hold);
    assert!(f
        .charts
        .iter()
        .all(|c| c.witness && c.iso.as_ref().is_some_and(|i| i.verdict == Verdict::Pass)));
    assert_eq!(f.verdict, Verdict::Pass);
    for g in ["x1*y1", "x1*y2", "x2*y1", "x2*y2", "e"] {
        assert!(
            f.invariant_generators.iter().any(|n| n == g),
            "{:?}",
            f.invariant_generators
        );
    }
}

#[test]
fn weight_two_variable_is_finite_of_rank_two() {
    let f = fiber_comparison(&base(&[("x", 2), ("y", -1)]), &bx()).unwrap();
    assert_eq!(f.charts.len(), 1);
    assert!(f.charts[0].witness);
    assert_eq!(f.charts[0].module_generators, ["1", "u"]);
    assert_eq!(f.verdict, Verdict::Pass);
}

#[test]
fn point_comparison_is_trivial() {
    let f = fiber_comparison(&base(&[]), &bx()).unwrap();
    assert!(f.charts.is_empty());
    assert_eq!(f.verdict, Verdict::Pass);
}

#[test]
fn positive_generator_breaks_the_comparison() {
    let err = fiber_comparison(&twopoints().unwrap(), &bx()).unwrap_err();
    assert!(matches!(err, WallCrossError::HypothesisViolation(ref v) if v == &["e".to_string()]));
}

#[test]
fn mukai_pipeline() {
    let rep = mukai_verify(1, &bx()).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass, "{rep}");
    assert!(rep.steps.iter().all(|s| s.verdict == Verdict::Pass));
    assert!(matches!(
        mukai_verify(0, &bx()).unwrap_err(),
        WallCrossError::NoPositiveChart
    ));
}
