//! Randomized algebraic laws shared by the property suite and the
//! acceptance harness.

#![allow(dead_code)]

use fmkernel::algebra::{build_algebra, rat, Algebra, Poly, Rat, VariableDecl};
use fmkernel::linalg::{rank, sparse_from_dense, sparse_rank, DenseMatrix};
use fmkernel::mono::Mono;
use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use std::sync::Arc;

/// Even and odd generators, an inverted variable and a degree −2
/// generator whose differential is a nontrivial cycle.
pub fn playground() -> Arc<Algebra> {
    let v = |n: &str, w: i64, h: i64| VariableDecl::new(n, vec![w], h);
    build_algebra(
        1,
        vec![
            v("x1", 1, 0),
            v("x2", 1, 0),
            v("y1", -1, 0),
            v("y2", -1, 0),
            v("t", 2, 0),
            v("e1", 0, -1),
            v("e2", 0, -1),
            v("g", 0, -2),
        ],
        &[
            ("e1", "x1*y1"),
            ("e2", "x2*y2"),
            ("g", "x2*y2*e1 - x1*y1*e2"),
        ],
        &["t"],
    )
    .unwrap()
}

/// Random monomial of the playground: small exponents, odd generators at
/// most once, the inverted variable possibly negative.
pub fn mono() -> impl Strategy<Value = Mono> {
    (
        prop::collection::vec(0i32..3, 4),
        -2i32..3,
        prop::collection::vec(0i32..2, 2),
        0i32..3,
    )
        .prop_map(|(base, t, odd, g)| {
            let mut e = base;
            e.push(t);
            e.extend(odd);
            e.push(g);
            Mono::from_vec(e)
        })
}

pub fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((mono(), -5i64..6, 1i64..4), 0..5).prop_map(|terms| {
        Poly::from_terms(
            terms
                .into_iter()
                .map(|(m, n, d)| (m, Rat::new(n.into(), d.into()))),
        )
    })
}

/// Keeps only the terms of one parity, so the result is homogeneous for
/// the Koszul sign.
pub fn of_parity(a: &Algebra, p: &Poly, odd: bool) -> Poly {
    Poly::from_terms(
        p.iter()
            .filter(|(m, _)| a.parity(m) == odd)
            .map(|(m, c)| (m.clone(), c.clone())),
    )
}

pub fn koszul_commutativity(
    a: &Arc<Algebra>,
    p: Poly,
    q: Poly,
    pa: bool,
    qa: bool,
) -> Result<(), TestCaseError> {
    let p = of_parity(a, &p, pa);
    let q = of_parity(a, &q, qa);
    let sign = if pa && qa { rat(-1) } else { Rat::one() };
    prop_assert_eq!(a.mul(&p, &q), a.mul(&q, &p).scale(&sign));
    Ok(())
}

pub fn leibniz(a: &Arc<Algebra>, p: Poly, q: Poly, pa: bool) -> Result<(), TestCaseError> {
    let p = of_parity(a, &p, pa);
    let sign = if pa { rat(-1) } else { Rat::one() };
    let lhs = a.d(&a.mul(&p, &q));
    let rhs = a.mul(&a.d(&p), &q).add(&a.mul(&p, &a.d(&q)).scale(&sign));
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

pub fn square_zero(a: &Arc<Algebra>, p: Poly) -> Result<(), TestCaseError> {
    prop_assert!(a.d(&a.d(&p)).is_zero());
    Ok(())
}

/// Arbitrary (possibly cancelling, possibly zero-coefficient) term lists
/// collapse to one canonical form that survives printing and reparsing.
pub fn canonical_form(a: &Arc<Algebra>, terms: Vec<(Mono, i64)>) -> Result<(), TestCaseError> {
    let p = Poly::from_terms(terms.iter().map(|(m, c)| (m.clone(), rat(*c))));
    let mut shuffled = terms.clone();
    shuffled.reverse();
    let q = Poly::from_terms(shuffled.into_iter().map(|(m, c)| (m, rat(c))));
    prop_assert_eq!(&p, &q);
    prop_assert_eq!(p.canonicalize(), p.clone());
    prop_assert!(p.iter().all(|(_, c)| !c.is_zero()));
    let printed = a.format(&p);
    let back = fmkernel::algebra::parse_element(a, &printed)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(back, p);
    Ok(())
}

/// Textbook Gaussian elimination over the rationals, one row at a time.
pub fn naive_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| rat(x)).collect())
        .collect();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            let f = &m[i][c] / &m[r][c];
            for j in c..ncols {
                let v = &f * &m[r][j];
                m[i][j] -= v;
            }
        }
        r += 1;
    }
    r
}

pub fn matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..7, 1usize..7).prop_flat_map(|(n, k)| {
        // small entries with many zeros and repeated rows exercise rank drops
        prop::collection::vec(
            prop::collection::vec(prop_oneof![3 => Just(0i64), 2 => -3i64..4], k),
            n,
        )
    })
}

pub fn rank_agreement(rows: Vec<Vec<i64>>) -> Result<(), TestCaseError> {
    let expected = naive_rank(&rows);
    let dense = DenseMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| rat(x)).collect())
            .collect(),
    );
    prop_assert_eq!(rank(&dense), expected);
    let sparse = sparse_rank(
        rows.iter()
            .map(|r| sparse_from_dense(&r.iter().map(|&x| rat(x)).collect::<Vec<_>>())),
    );
    prop_assert_eq!(sparse, expected);
    // rank of the transpose agrees as well
    let cols = rows[0].len();
    let t: Vec<Vec<i64>> = (0..cols)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    prop_assert_eq!(naive_rank(&t), expected);
    Ok(())
}

fn report<T: std::fmt::Debug>(
    r: Result<(), proptest::test_runner::TestError<T>>,
) -> Result<(), String> {
    r.map_err(|e| format!("{e}"))
}

/// Runs the five algebraic law suites with `cases` cases each; returns
/// each suite with its outcome.
pub fn run_law_suites(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    let a = playground();
    let cfg = || {
        TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        })
    };
    let mut out = Vec::new();
    let aa = Arc::clone(&a);
    out.push((
        "Koszul-sign commutativity",
        report(cfg().run(
            &(poly(), poly(), any::<bool>(), any::<bool>()),
            move |(p, q, pa, qa)| koszul_commutativity(&aa, p, q, pa, qa),
        )),
    ));
    let aa = Arc::clone(&a);
    out.push((
        "Leibniz rule",
        report(
            cfg().run(&(poly(), poly(), any::<bool>()), move |(p, q, pa)| {
                leibniz(&aa, p, q, pa)
            }),
        ),
    ));
    let aa = Arc::clone(&a);
    out.push((
        "d² = 0",
        report(cfg().run(&poly(), move |p| square_zero(&aa, p))),
    ));
    let aa = Arc::clone(&a);
    out.push((
        "canonical-form idempotence",
        report(
            cfg().run(&prop::collection::vec((mono(), -3i64..4), 0..8), move |t| {
                canonical_form(&aa, t)
            }),
        ),
    ));
    out.push((
        "rank vs naive elimination",
        report(cfg().run(&matrix(), rank_agreement)),
    ));
    out
}
