use fmkernel::algebra::{build_algebra, parse_element, Algebra, Poly, VariableDecl};
use fmkernel::catalog::{affine_base, mukai, qnotasheaf, twopoints};
use fmkernel::complexes::Verdict;
use fmkernel::qkernel::{
    build_delta, build_q, check_basechange, check_localization_iso, check_middle_invariants,
    check_structure, KernelError, Side,
};
use fmkernel::resolutions::{
    check_koszul_tate, check_property_p, koszul_complex, koszul_tate, resolution_k, ResolutionError,
};
use fmkernel::slices::TruncationBox;
use std::sync::Arc;

fn point() -> Arc<Algebra> {
    build_algebra(1, vec![], &[], &[]).unwrap()
}

fn line() -> Arc<Algebra> {
    build_algebra(1, vec![VariableDecl::new("x", vec![1], 0)], &[], &[]).unwrap()
}

fn bx(budget: u32) -> TruncationBox {
    TruncationBox::uniform(1, budget, -4, -4, 4)
}

fn show(alg: &Algebra, p: &Poly) -> String {
    alg.format(p)
}

fn el(alg: &Algebra, s: &str) -> Poly {
    parse_element(alg, s).unwrap()
}

#[test]
fn delta_of_the_point_is_laurent_in_u() {
    let d = build_delta(&point()).unwrap();
    assert_eq!(d.alg.nvars(), 1);
    assert!(d.alg.is_inverted(d.u));
}

#[test]
fn delta_coaction_multiplies_by_u_to_the_degree() {
    let r = mukai(2).unwrap();
    let d = build_delta(&r).unwrap();
    assert_eq!(show(&d.alg, d.s.image(0)), "x1*u");
    assert_eq!(show(&d.alg, d.s.image(2)), "y1*u^-1");
    assert_eq!(show(&d.alg, d.p.image(0)), "x1");
}

#[test]
fn q_of_the_affine_plane() {
    let q = build_q(&affine_base().unwrap()).unwrap();
    let names: Vec<&str> = q.alg.vars().iter().map(|v| v.name.as_str()).collect();
    assert_eq!(names, ["x", "z", "u"]);
    assert_eq!(show(&q.alg, q.p.image(1)), "z*u");
    assert_eq!(show(&q.alg, q.s.image(0)), "x*u");
    assert_eq!(show(&q.alg, q.p.image(0)), "x");
    assert_eq!(show(&q.alg, q.s.image(1)), "z");
    assert_eq!(q.u_bidegree(), [-1, 1]);
    assert!(!q.alg.is_inverted(q.u));
}

#[test]
fn q_of_the_two_generator_kernel() {
    let q = build_q(&qnotasheaf().unwrap()).unwrap();
    let names: Vec<&str> = q.alg.vars().iter().map(|v| v.name.as_str()).collect();
    for n in ["x1", "x2", "z1", "z2", "e1", "e2", "u"] {
        assert!(names.contains(&n), "{names:?}");
    }
    let e1 = q.alg.var_index("e1").unwrap();
    assert_eq!(q.alg.diff_of(e1), &el(&q.alg, "u*x1*z1"));
    check_structure(&q).unwrap();
}

#[test]
fn q_of_mukai() {
    let q = build_q(&mukai(2).unwrap()).unwrap();
    let e = q.alg.var_index("e").unwrap();
    assert_eq!(q.alg.diff_of(e), &el(&q.alg, "u*x1*z1 + u*x2*z2"));
    check_structure(&q).unwrap();
}

#[test]
fn q_of_the_point_is_a_polynomial_ring_in_u() {
    let q = build_q(&point()).unwrap();
    assert_eq!(q.alg.nvars(), 1);
    assert!(!q.alg.is_inverted(q.u));
    assert_eq!(q.u_bidegree(), [-1, 1]);
}

#[test]
fn localization_on_the_s_side() {
    let q = build_q(&mukai(2).unwrap()).unwrap();
    let c = check_localization_iso(&q, "x1", Side::S, &bx(6)).unwrap();
    assert_eq!(c.verdict, Verdict::Pass, "{:?}", c.facts);
    assert!(c.facts.iter().all(|(_, ok)| *ok));
}

#[test]
fn localization_on_the_p_side() {
    let q = build_q(&mukai(2).unwrap()).unwrap();
    let c = check_localization_iso(&q, "y1", Side::P, &bx(6)).unwrap();
    assert_eq!(c.verdict, Verdict::Pass, "{:?}", c.facts);
}

#[test]
fn localization_at_a_degree_zero_element_is_rejected() {
    let q = build_q(&mukai(2).unwrap()).unwrap();
    for side in [Side::S, Side::P] {
        let err = check_localization_iso(&q, "x1*y1", side, &bx(6)).unwrap_err();
        assert!(
            matches!(err, KernelError::WrongSide { degree: 0, .. }),
            "{err}"
        );
    }
    let err = check_localization_iso(&q, "y1", Side::S, &bx(6)).unwrap_err();
    assert!(matches!(err, KernelError::WrongSide { degree: -1, .. }));
}

#[test]
fn basechange_isomorphisms() {
    assert_eq!(
        check_basechange(&mukai(2).unwrap(), &bx(6))
            .unwrap()
            .verdict,
        Verdict::Pass
    );
    assert_eq!(
        check_basechange(&affine_base().unwrap(), &bx(6))
            .unwrap()
            .verdict,
        Verdict::Pass
    );
    let err = check_basechange(&twopoints().unwrap(), &bx(6)).unwrap_err();
    assert_eq!(
        err,
        KernelError::PositiveGeneratorPresent {
            name: "e".into(),
            degree: 2
        }
    );
}

#[test]
fn middle_degree_zero_invariants() {
    for r in [affine_base().unwrap(), point(), mukai(2).unwrap()] {
        let q = build_q(&r).unwrap();
        let checks = check_middle_invariants(&q, &bx(6)).unwrap();
        assert!(!checks.is_empty());
        for c in checks {
            assert_ne!(c.verdict, Verdict::Fail, "{}: {:?}", c.label, c.facts);
        }
    }
}

#[test]
fn koszul_top_term_has_degree_minus_the_weight_sum() {
    let t = build_algebra(
        1,
        vec![
            VariableDecl::new("x1", vec![1], 0),
            VariableDecl::new("x2", vec![2], 0),
            VariableDecl::new("x3", vec![3], 0),
        ],
        &[],
        &[],
    )
    .unwrap();
    let seq: Vec<Poly> = (0..3).map(|i| t.gen(i)).collect();
    let k = koszul_complex(&t, &seq, 0).unwrap();
    let terms = k.term_twists();
    assert_eq!(terms[&-3], vec![vec![-6]]);
    assert_eq!(terms[&0], vec![vec![0]]);
    assert_eq!(terms[&-1].len(), 3);
}

#[test]
fn koszul_on_a_regular_element_is_exact_below_zero() {
    let t = build_algebra(
        1,
        vec![
            VariableDecl::new("x1", vec![1], 0),
            VariableDecl::new("y1", vec![-1], 0),
        ],
        &[],
        &[],
    )
    .unwrap();
    let k = koszul_complex(&t, &[el(&t, "x1*y1")], 0).unwrap();
    for n in -2..=2 {
        let pieces = k.slice_homology(&[n], &TruncationBox::uniform(1, 6, -1, -4, 4));
        assert!(pieces.iter().any(|p| p.certified));
        for p in pieces.iter().filter(|p| p.certified) {
            assert_eq!(p.h(-1), 0);
        }
    }
}

#[test]
fn empty_koszul_sequence_is_concentrated_in_degree_zero() {
    let k = koszul_complex(&line(), &[], 0).unwrap();
    assert_eq!(k.term_twists().keys().copied().collect::<Vec<_>>(), [0]);
}

#[test]
fn complete_intersection_needs_no_extra_generators() {
    let t = build_algebra(
        1,
        ["x1", "x2"]
            .iter()
            .map(|n| VariableDecl::new(*n, vec![1], 0))
            .chain(
                ["y1", "y2"]
                    .iter()
                    .map(|n| VariableDecl::new(*n, vec![-1], 0)),
            )
            .collect(),
        &[],
        &[],
    )
    .unwrap();
    let ideal = [el(&t, "x1*y1"), el(&t, "x2*y2")];
    let res = koszul_tate(&t, &ideal, -3, &TruncationBox::uniform(1, 6, -3, -2, 2)).unwrap();
    assert_eq!(res.adjoined_in_degree(-1).len(), 2);
    assert!(res.adjoined_in_degree(-2).is_empty());
}

#[test]
fn non_regular_ideal_adjoins_a_degree_minus_two_generator() {
    let t = affine_base().unwrap();
    let ideal = [el(&t, "x^2"), el(&t, "x*y")];
    let rep = check_koszul_tate(&t, &ideal, -3, &TruncationBox::uniform(1, 8, -3, -4, 4)).unwrap();
    let res = &rep.presentation;
    let two = res.adjoined_in_degree(-2);
    assert_eq!(two.len(), 1);
    // it kills y·e1 − x·e2 (deg e1 = 2, deg e2 = 0), of weight 1
    assert_eq!(res.alg.var(two[0]).weight, [1]);
    assert_eq!(rep.verdict, Verdict::Pass);
}

#[test]
fn zero_ideal_changes_nothing() {
    let t = affine_base().unwrap();
    let res = koszul_tate(&t, &[], -3, &bx(6)).unwrap();
    assert!(res.adjoined.is_empty());
    assert_eq!(res.alg.nvars(), t.nvars());
}

#[test]
fn koszul_tate_needs_a_polynomial_ring() {
    let err = koszul_tate(&mukai(1).unwrap(), &[], -2, &bx(4)).unwrap_err();
    assert!(matches!(err, ResolutionError::NonPolynomialBase(_)));
}

#[test]
fn resolution_of_mukai_kernel() {
    let q = Arc::new(build_q(&mukai(2).unwrap()).unwrap());
    let (k, aug) = resolution_k(&q, &TruncationBox::uniform(2, 8, -4, -4, 4)).unwrap();
    let (kappa, lambda, mu, nu) = k.counts();
    // one κ per positive variable, μ per negative variable, λ per weight-0
    // dg generator, ν per lower generator
    assert_eq!((kappa, mu, lambda, nu), (2, 2, 1, 0));
    assert_ne!(aug.verdict, Verdict::Fail);
    assert!(aug.certified_pieces > 0);
}

#[test]
fn resolution_of_the_line_kernel() {
    let q = Arc::new(build_q(&line()).unwrap());
    let (k, aug) = resolution_k(&q, &TruncationBox::uniform(2, 6, -3, -3, 3)).unwrap();
    assert_eq!(k.counts(), (1, 0, 0, 0));
    assert_eq!(k.copy1.len(), 1);
    assert_eq!(k.copy2.len(), 1);
    assert_eq!(aug.verdict, Verdict::Pass);
}

#[test]
fn property_p_examples() {
    let rep = check_property_p(
        &affine_base().unwrap(),
        &TruncationBox::uniform(1, 8, -4, -4, 4),
    )
    .unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert_eq!(rep.tensor_degrees, rep.kernel_degrees);
    let rep = check_property_p(&point(), &bx(6)).unwrap();
    assert_ne!(rep.verdict, Verdict::Fail);
}
