use fmkernel::algebra::{build_algebra, Algebra, VariableDecl};
use fmkernel::catalog::{affine_base, mukai, qnotasheaf, twopoints};
use fmkernel::complexes::Verdict;
use fmkernel::pushforward::{cech_complex, window_image, window_membership, CechError, WindowSide};
use fmkernel::qkernel::build_q;
use fmkernel::slices::TruncationBox;
use fmkernel::windows::{
    check_generator_weights, compute_mu, endo_ring, sod_report, sod_vanishing, SodShape,
    WeightMode, WindowError,
};
use std::sync::Arc;

fn weighted(xs: &[i64], ys: &[i64]) -> Arc<Algebra> {
    let mut vars: Vec<VariableDecl> = xs
        .iter()
        .enumerate()
        .map(|(i, &w)| VariableDecl::new(format!("x{}", i + 1), vec![w], 0))
        .collect();
    vars.extend(
        ys.iter()
            .enumerate()
            .map(|(i, &w)| VariableDecl::new(format!("y{}", i + 1), vec![w], 0)),
    );
    build_algebra(1, vars, &[], &[]).unwrap()
}

fn point() -> Arc<Algebra> {
    build_algebra(1, vec![], &[], &[]).unwrap()
}

fn bx() -> TruncationBox {
    TruncationBox::default_for(1)
}

#[test]
fn mu_examples() {
    let m = compute_mu(&mukai(2).unwrap()).unwrap();
    assert_eq!((m.mu_plus, m.mu_minus), (2, -2));
    assert!(m.calabi_yau());
    let m = compute_mu(&point()).unwrap();
    assert_eq!((m.mu_plus, m.mu_minus), (0, 0));
    let m = compute_mu(&weighted(&[3, 1], &[-2])).unwrap();
    assert_eq!((m.mu_plus, m.mu_minus), (4, -2));
    assert!(!m.calabi_yau());
}

#[test]
fn generator_weight_hypotheses() {
    let modes = [WeightMode::Plus, WeightMode::Minus, WeightMode::WallCross];
    for mode in modes {
        assert!(check_generator_weights(&mukai(2).unwrap(), mode).is_empty());
        assert!(check_generator_weights(&affine_base().unwrap(), mode).is_empty());
    }
    let tp = twopoints().unwrap();
    assert_eq!(check_generator_weights(&tp, WeightMode::Plus), ["e"]);
    assert_eq!(check_generator_weights(&tp, WeightMode::WallCross), ["e"]);
    assert!(check_generator_weights(&tp, WeightMode::Minus).is_empty());
}

#[test]
fn cech_cover_of_mukai() {
    let q = build_q(&mukai(2).unwrap()).unwrap();
    let c = cech_complex(&q).unwrap();
    assert_eq!(c.labels, ["x1", "x2"]);
    assert_eq!(c.subset_label(0b01), "{x1}");
    assert_eq!(c.subset_label(0b11), "{x1,x2}");
}

#[test]
fn single_positive_variable_gives_one_term() {
    let q = build_q(&weighted(&[1], &[-1])).unwrap();
    assert_eq!(cech_complex(&q).unwrap().len(), 1);
}

#[test]
fn cech_needs_a_positive_variable() {
    let q = build_q(&weighted(&[], &[-1])).unwrap();
    assert!(matches!(
        cech_complex(&q).unwrap_err(),
        CechError::EmptySide(WindowSide::Plus)
    ));
}

#[test]
fn twopoints_window_image() {
    let w = window_image(&twopoints().unwrap(), 0, WindowSide::Plus, &bx()).unwrap();
    assert!(!w.hypothesis_ok);
    // k[u x1] ⊕ k[u x2]: dimension 2 in each internal degree n ≥ 0
    let certified: Vec<i64> = w
        .cohomology
        .keys()
        .filter(|(_, k)| *k == 0)
        .map(|(n, _)| n[0])
        .collect();
    assert!(!certified.is_empty());
    for n in certified {
        assert!(n >= 0);
        assert_eq!(w.h(n, 0), 2, "degree {n}");
    }
    let term = w
        .terms
        .iter()
        .find(|(l, _)| l == "{x1,x2}")
        .expect("intersection term");
    assert_eq!(term.1, Verdict::Pass);
}

#[test]
fn mukai_window_matches_on_both_sides() {
    let r = mukai(2).unwrap();
    let plus = window_membership(&r, WindowSide::Plus, &bx()).unwrap();
    assert_eq!(plus.twists, [-1, 0]);
    assert_eq!(plus.verdict, Verdict::Pass);
    let w0 = &plus.reports[1];
    assert!(w0
        .cohomology
        .iter()
        .all(|((_, k), e)| *k == 0 || e.dim == 0));
    let minus = window_membership(&r, WindowSide::Minus, &bx()).unwrap();
    assert_eq!(minus.twists, [0, 1]);
    assert_eq!(minus.verdict, Verdict::Pass);
}

#[test]
fn twist_outside_the_window_has_top_cohomology() {
    let w = window_image(&mukai(2).unwrap(), -2, WindowSide::Plus, &bx()).unwrap();
    assert_ne!(w.verdict, Verdict::Pass);
    let top: usize = w
        .cohomology
        .iter()
        .filter(|((_, k), _)| *k == 1)
        .map(|(_, e)| e.dim)
        .sum();
    assert!(top > 0, "{w}");
}

#[test]
fn empty_window_is_degenerate() {
    let m = window_membership(&weighted(&[], &[-1]), WindowSide::Plus, &bx()).unwrap();
    assert!(m.degenerate);
    assert!(m.twists.is_empty());
}

#[test]
fn twopoints_window_flags_the_hypothesis() {
    let m = window_membership(&twopoints().unwrap(), WindowSide::Plus, &bx()).unwrap();
    assert!(!m.hypothesis_ok);
    assert!(!m.reports.is_empty());
}

#[test]
fn sod_vanishing_examples() {
    let rep = sod_vanishing(&mukai(2).unwrap(), -1, 0, &bx()).unwrap();
    assert_eq!(rep.entries.len(), 2);
    assert!(rep.entries.iter().all(|e| e.verdict == Verdict::Pass));
    assert!(rep.probe_nonzero);
    assert_eq!(rep.verdict, Verdict::Pass);

    let rep = sod_vanishing(&weighted(&[1], &[]), 0, 0, &bx()).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert_eq!(rep.probe.certified_dims().get(&0), Some(&1));

    let err = sod_vanishing(&mukai(2).unwrap(), 0, 0, &bx()).unwrap_err();
    assert!(matches!(err, WindowError::RangeTooShort { .. }));
}

#[test]
fn endomorphism_rings() {
    let e = endo_ring(&mukai(2).unwrap(), &bx()).unwrap();
    assert_eq!(e.dims(), [1, 1]);
    assert_eq!(e.verdict, Verdict::Pass);
    assert_eq!(
        endo_ring(&affine_base().unwrap(), &bx()).unwrap().dims(),
        [1]
    );
    let e = endo_ring(&qnotasheaf().unwrap(), &bx()).unwrap();
    assert_eq!(e.dims(), [1, 2, 1]);
    assert_eq!(e.verdict, Verdict::Pass);
}

#[test]
fn sod_shapes() {
    let s = sod_report(&mukai(2).unwrap(), &bx()).unwrap();
    assert_eq!(s.shape, SodShape::Equivalence);
    assert!(s.twists.is_empty());
    assert_eq!(s.verdict, Verdict::Pass);

    let s = sod_report(&weighted(&[1, 1, 1], &[-1]), &bx()).unwrap();
    assert_eq!(s.shape, SodShape::PlusBigger);
    assert_eq!(s.twists, [2, 1]);
    assert_eq!(s.functor_twist, 2);
    assert_eq!(s.verdict, Verdict::Pass);

    let s = sod_report(&weighted(&[1], &[-1, -1]), &bx()).unwrap();
    assert_eq!(s.shape, SodShape::MinusBigger);
    assert_eq!(s.twists, [-1]);

    let s = sod_report(&point(), &bx()).unwrap();
    assert_eq!(s.shape, SodShape::Equivalence);
    assert!(s.twists.is_empty() && s.steps.is_empty() && s.endo.is_none());

    let s = sod_report(&twopoints().unwrap(), &bx()).unwrap();
    assert_eq!(s.violations, ["e"]);
    assert_eq!(s.verdict, Verdict::Fail);
}
