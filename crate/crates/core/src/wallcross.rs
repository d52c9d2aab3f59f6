//! The kernel restricted to products of semistable charts `U_{x_a} × U_{y_b}`,
//! chart homology with candidate carriers, and the comparison with the
//! fiber product over the invariant ring.

use crate::algebra::{AlgMap, Algebra, AlgebraError, MapError, Poly, Rat, VariableDecl};
use crate::chain::{analyze, homology_table, HilbertTable, Key, PieceHomology};
use crate::complexes::{AlgebraModel, Verdict};
use crate::grading::InvariantGrading;
use crate::linalg::solve;
use crate::mono::Mono;
use crate::pushforward::{window_membership, CechError, WindowMembership, WindowSide};
use crate::qkernel::{build_q, compare_with_inverse, KernelAlgebra, KernelError};
use crate::resolutions::{check_property_p, PropertyPReport, ResolutionError};
use crate::slices::{enumerate_monomials, TruncationBox};
use crate::windows::{check_generator_weights, WeightMode};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WallCrossError {
    #[error("no positive base variable: the + side is empty")]
    NoPositiveChart,
    #[error("no negative base variable: the - side is empty")]
    NoNegativeChart,
    #[error("unknown chart ({0}, {1})")]
    UnknownChart(String, String),
    #[error("dg generators of nonzero weight: {0:?}")]
    HypothesisViolation(Vec<String>),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error(transparent)]
    Cech(#[from] CechError),
}

/// `Q` localized at `p(x_a)` and `s(y_b)`.
#[derive(Clone, Debug)]
pub struct ChartKernel {
    pub x: String,
    pub y: String,
    pub x_index: usize,
    pub y_index: usize,
    pub alg: Arc<Algebra>,
}

fn support(alg: &Algebra, p: &Poly) -> BTreeSet<String> {
    p.iter()
        .flat_map(|(m, _)| {
            m.exps()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e != 0)
                .map(|(i, _)| alg.var(i).name.clone())
        })
        .collect()
}

fn charts_of(q: &KernelAlgebra) -> Result<Vec<ChartKernel>, WallCrossError> {
    let r = &q.base;
    let xs: Vec<usize> = (0..r.nvars())
        .filter(|&i| r.var(i).hdeg == 0 && r.var(i).weight[0] > 0)
        .collect();
    let ys: Vec<usize> = (0..r.nvars())
        .filter(|&i| r.var(i).hdeg == 0 && r.var(i).weight[0] < 0)
        .collect();
    if xs.is_empty() {
        return Err(WallCrossError::NoPositiveChart);
    }
    if ys.is_empty() {
        return Err(WallCrossError::NoNegativeChart);
    }
    let mut out = Vec::new();
    for &a in &xs {
        for &b in &ys {
            let mut names = support(&q.alg, q.p.image(a));
            names.extend(support(&q.alg, q.s.image(b)));
            out.push(ChartKernel {
                x: r.var(a).name.clone(),
                y: r.var(b).name.clone(),
                x_index: a,
                y_index: b,
                alg: q.alg.localize(&names)?,
            });
        }
    }
    Ok(out)
}

/// One chart per pair of a positive and a negative base variable.
pub fn restrict_kernel(r: &Arc<Algebra>) -> Result<Vec<ChartKernel>, WallCrossError> {
    charts_of(&build_q(r)?)
}

/// Piecewise comparison of a homology row with a candidate carrier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CarrierCheck {
    pub description: String,
    pub matched: usize,
    pub mismatched: Vec<Key>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct ChartHomologyReport {
    pub chart: (String, String),
    /// Certified homology by (bidegree, hdeg).
    pub table: HilbertTable,
    /// Homological degrees carrying certified classes.
    pub nonzero_rows: Vec<i64>,
    pub certified_pieces: usize,
    pub pieces: usize,
    pub h0_carrier: Option<CarrierCheck>,
    pub h1_carrier: Option<CarrierCheck>,
}

impl ChartHomologyReport {
    pub fn h_minus_one_vanishes(&self) -> bool {
        !self.nonzero_rows.iter().any(|&h| h != 0)
    }
}

/// Koszul-type carriers for charts whose generator differentials are
/// single terms `m_i` over the chart ring `S`:
/// `H^0 = S/(m_1, …, m_k)` and, for two generators,
/// `H^{-1} ≅ γ · S/(gcd(m_1, m_2))` with `γ = (L/m_1) e_1 - (L/m_2) e_2`,
/// `L = lcm(m_1, m_2)` (units of `S` discarded).
struct MonomialCarrier {
    ring_vars: Vec<usize>,
    inverted: Vec<bool>,
    rows: Vec<Vec<Rat>>,
    grading: InvariantGrading,
    gens: Vec<Vec<i32>>,
}

impl MonomialCarrier {
    fn new(alg: &Algebra) -> Option<Self> {
        let n = alg.nvars();
        let ring_vars: Vec<usize> = (0..n).filter(|&i| alg.var(i).hdeg == 0).collect();
        let mut gens = Vec::new();
        for i in 0..n {
            let v = alg.var(i);
            if v.hdeg == 0 {
                if !alg.diff_of(i).is_zero() {
                    return None;
                }
                continue;
            }
            if v.hdeg != -1 {
                return None;
            }
            let (m, _) = alg.diff_of(i).single_term()?;
            // units do not change the ideal
            let e: Vec<i32> = (0..n)
                .map(|j| if alg.is_inverted(j) { 0 } else { m.exps()[j] })
                .collect();
            gens.push(e);
        }
        let grading = InvariantGrading::of(alg);
        let rows: Vec<Vec<Rat>> = grading
            .rows
            .iter()
            .map(|row| {
                ring_vars
                    .iter()
                    .map(|&j| Rat::from_integer(BigInt::from(row[j])))
                    .collect()
            })
            .collect();
        // keys must determine ring monomials
        let mut e = crate::linalg::Echelon::new();
        for j in 0..ring_vars.len() {
            e.insert(crate::linalg::sparse_from_dense(
                &rows.iter().map(|r| r[j].clone()).collect::<Vec<_>>(),
            ));
        }
        if e.rank() != ring_vars.len() {
            return None;
        }
        Some(MonomialCarrier {
            ring_vars,
            inverted: (0..n).map(|j| alg.is_inverted(j)).collect(),
            rows,
            grading,
            gens,
        })
    }

    /// The unique ring monomial of a key, if it exists in `S`.
    fn solve_key(&self, key: &[i64]) -> Option<Vec<i32>> {
        let b: Vec<Rat> = key
            .iter()
            .map(|&k| Rat::from_integer(BigInt::from(k)))
            .collect();
        let x = solve(&self.rows, &b)?;
        let mut e = vec![0i32; self.inverted.len()];
        for (k, &j) in self.ring_vars.iter().enumerate() {
            if !x[k].is_integer() {
                return None;
            }
            let v = x[k].to_integer().to_i32()?;
            if v < 0 && !self.inverted[j] {
                return None;
            }
            e[j] = v;
        }
        Some(e)
    }

    fn divides(&self, m: &[i32], n: &[i32]) -> bool {
        m.iter()
            .zip(n)
            .enumerate()
            .all(|(j, (&a, &b))| self.inverted[j] || b >= a)
    }

    fn h0(&self, key: &[i64]) -> usize {
        match self.solve_key(key) {
            Some(n) if !self.gens.iter().any(|g| self.divides(g, &n)) => 1,
            _ => 0,
        }
    }

    fn lcm_gcd(&self) -> Option<(Vec<i32>, Vec<i32>)> {
        let [a, b] = self.gens.as_slice() else {
            return None;
        };
        Some((
            a.iter().zip(b).map(|(x, y)| *x.max(y)).collect(),
            a.iter().zip(b).map(|(x, y)| *x.min(y)).collect(),
        ))
    }

    fn h1(&self, key: &[i64]) -> usize {
        let Some((lcm, gcd)) = self.lcm_gcd() else {
            return 0;
        };
        let shift = self.grading.key(&Mono::from_vec(lcm));
        let k: Vec<i64> = key.iter().zip(&shift).map(|(a, b)| a - b).collect();
        match self.solve_key(&k) {
            Some(n) if !self.divides(&gcd, &n) => 1,
            _ => 0,
        }
    }
}

fn carrier_check(
    description: String,
    pieces: &[PieceHomology],
    h: i64,
    f: impl Fn(&[i64]) -> usize,
) -> CarrierCheck {
    let mut matched = 0;
    let mut mismatched = Vec::new();
    for p in pieces.iter().filter(|p| p.certified) {
        if p.h(h) == f(&p.key) {
            matched += 1;
        } else {
            mismatched.push(p.key.clone());
        }
    }
    let verdict = if !mismatched.is_empty() {
        Verdict::Fail
    } else if matched > 0 {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    CarrierCheck {
        description,
        matched,
        mismatched,
        verdict,
    }
}

fn chart_report(chart: &ChartKernel, bx: &TruncationBox) -> ChartHomologyReport {
    let model = AlgebraModel::new(&chart.alg, bx);
    let pieces = analyze(&model, bx.hmin, 0);
    let mut table = homology_table(&pieces, true);
    table.retain(|_, e| e.dim > 0);
    let nonzero_rows: BTreeSet<i64> = table.keys().map(|(_, k)| *k).collect();
    let carrier = MonomialCarrier::new(&chart.alg);
    let h0_carrier = carrier.as_ref().map(|c| {
        carrier_check(
            "fiber-product chart carrier S/(d e_i)".into(),
            &pieces,
            0,
            |k| c.h0(k),
        )
    });
    let h1_carrier = carrier.as_ref().filter(|c| c.gens.len() == 2).map(|c| {
        carrier_check(
            "gamma * S/(gcd), the u = 0 carrier".into(),
            &pieces,
            -1,
            |k| c.h1(k),
        )
    });
    ChartHomologyReport {
        chart: (chart.x.clone(), chart.y.clone()),
        table,
        nonzero_rows: nonzero_rows.into_iter().rev().collect(),
        certified_pieces: pieces.iter().filter(|p| p.certified).count(),
        pieces: pieces.len(),
        h0_carrier,
        h1_carrier,
    }
}

/// Homology of the kernel on the chart `(x, y)` with carrier comparisons.
pub fn chart_homology(
    r: &Arc<Algebra>,
    x: &str,
    y: &str,
    bx: &TruncationBox,
) -> Result<ChartHomologyReport, WallCrossError> {
    let q = build_q(r)?;
    let chart = charts_of(&q)?
        .into_iter()
        .find(|c| c.x == x && c.y == y)
        .ok_or_else(|| WallCrossError::UnknownChart(x.into(), y.into()))?;
    Ok(chart_report(&chart, &arity2(bx)))
}

fn arity2(bx: &TruncationBox) -> TruncationBox {
    if bx.degree_range.len() == 2 {
        bx.clone()
    } else {
        let (lo, hi) = bx.degree_range[0];
        TruncationBox::uniform(2, bx.budget, bx.hmin, lo, hi)
    }
}

#[derive(Clone, Debug)]
pub struct ChartComparison {
    pub chart: (String, String),
    /// `p(x_a)^{-1} s(x_a) = u^{deg x_a}` holds on the chart.
    pub witness: bool,
    /// `1, u, …, u^{deg x_a - 1}`.
    pub module_generators: Vec<String>,
    /// Explicit isomorphism with the fiber-product chart (weights ±1 only).
    pub iso: Option<crate::qkernel::IsoCheck>,
}

#[derive(Clone, Debug)]
pub struct FiberComparison {
    /// Minimal weight-0 monomials of `R` within the budget.
    pub invariant_generators: Vec<String>,
    pub generator_budget: u32,
    /// `p(r) = s(r)` for every invariant generator.
    pub relations_hold: bool,
    pub charts: Vec<ChartComparison>,
    pub verdict: Verdict,
}

fn invariant_generators(r: &Algebra, budget: u32, hmin: i64) -> Vec<Mono> {
    let all = enumerate_monomials(r, budget, hmin, 0, &|m| !m.is_one() && r.weight(m)[0] == 0);
    let set: BTreeSet<&Mono> = all.iter().collect();
    let divides = |a: &Mono, b: &Mono| a.exps().iter().zip(b.exps()).all(|(x, y)| x <= y);
    all.iter()
        .filter(|m| !set.iter().any(|d| *d != *m && divides(d, m)))
        .cloned()
        .collect()
}

/// Fiber-product comparison on every chart `U_{x_a} × U_{y_b}`.
pub fn fiber_comparison(
    r: &Arc<Algebra>,
    bx: &TruncationBox,
) -> Result<FiberComparison, WallCrossError> {
    let bad = check_generator_weights(r, WeightMode::WallCross);
    if !bad.is_empty() {
        return Err(WallCrossError::HypothesisViolation(bad));
    }
    let q = build_q(r)?;
    let gens = invariant_generators(r, bx.budget, bx.hmin);
    let relations_hold = gens.iter().all(|m| q.p.apply_mono(m) == q.s.apply_mono(m));
    let invariant_generators = gens.iter().map(|m| r.format_mono(m)).collect();
    let has_both = (0..r.nvars()).any(|i| r.var(i).hdeg == 0 && r.var(i).weight[0] > 0)
        && (0..r.nvars()).any(|i| r.var(i).hdeg == 0 && r.var(i).weight[0] < 0);
    if !has_both {
        return Ok(FiberComparison {
            invariant_generators,
            generator_budget: bx.budget,
            relations_hold,
            charts: Vec::new(),
            verdict: Verdict::from_bool(relations_hold),
        });
    }
    let unit_weights = (0..r.nvars())
        .filter(|&i| r.var(i).hdeg == 0)
        .all(|i| r.var(i).weight[0].abs() == 1);
    let bx2 = arity2(bx);
    let mut charts = Vec::new();
    for chart in charts_of(&q)? {
        let a = chart.x_index;
        let deg = r.var(a).weight[0];
        let c = &chart.alg;
        let px = q.p.image(a);
        let witness = c.mul(&c.pow(px, -1).expect("localized"), q.s.image(a))
            == c.pow(&q.u_poly(), deg as i32).expect("u power");
        let module_generators = (0..deg)
            .map(|k| match k {
                0 => "1".to_string(),
                1 => "u".to_string(),
                _ => format!("u^{k}"),
            })
            .collect();
        let iso = if unit_weights {
            Some(chart_iso(&q, &chart, &bx2)?)
        } else {
            None
        };
        charts.push(ChartComparison {
            chart: (chart.x.clone(), chart.y.clone()),
            witness,
            module_generators,
            iso,
        });
    }
    let mut verdict = Verdict::from_bool(relations_hold);
    for ch in &charts {
        verdict = verdict.and(Verdict::from_bool(ch.witness));
        if let Some(iso) = &ch.iso {
            verdict = verdict.and(iso.verdict);
        }
    }
    Ok(FiberComparison {
        invariant_generators,
        generator_budget: bx.budget,
        relations_hold,
        charts,
        verdict,
    })
}

/// The fiber-product chart `(k[x, x_a^{-1}] ⊗ k[y', y_b'^{-1}, x_a'])[e]`
/// mapped to the kernel chart by `x ↦ x`, `y' ↦ z`, `x_a' ↦ u x_a`,
/// `e ↦ e`, with inverse `z ↦ y'`, `u ↦ x_a^{-1} x_a'`.
fn chart_iso(
    q: &KernelAlgebra,
    chart: &ChartKernel,
    bx: &TruncationBox,
) -> Result<crate::qkernel::IsoCheck, WallCrossError> {
    let r = &q.base;
    let n = r.nvars();
    let c = &chart.alg;
    let a = chart.x_index;
    // source variables: R's variables (negatives primed), then x_a'
    let mut vars: Vec<VariableDecl> = Vec::new();
    for v in r.vars() {
        let w = v.weight[0];
        if v.hdeg == 0 && w < 0 {
            vars.push(VariableDecl::new(format!("{}'", v.name), vec![0, w], 0));
        } else {
            vars.push(VariableDecl::new(v.name.clone(), vec![w, 0], v.hdeg));
        }
    }
    let xa = n;
    vars.push(VariableDecl::new(
        format!("{}'", r.var(a).name),
        vec![0, r.var(a).weight[0]],
        0,
    ));
    let inverted: BTreeSet<String> =
        [vars[a].name.clone(), vars[chart.y_index].name.clone()].into();
    let bare = Algebra::from_parts(2, vars.clone(), vec![Poly::zero(); n + 1], &inverted)?;
    let mono = |parts: &[(usize, i32)]| {
        let mut e = vec![0i32; n + 1];
        for &(i, k) in parts {
            e[i] += k;
        }
        Poly::monomial(Mono::from_vec(e), Rat::one())
    };
    // inverse images: chart variable j -> source
    let mut inv = Vec::with_capacity(c.nvars());
    for j in 0..c.nvars() {
        if j == q.u {
            inv.push(mono(&[(a, -1), (xa, 1)]));
        } else {
            inv.push(mono(&[(j, 1)]));
        }
    }
    let inv_bare = AlgMap::new(c, &bare, inv.clone())?;
    let diffs: Vec<Poly> = (0..=n)
        .map(|j| {
            if j < n {
                inv_bare.apply(c.diff_of(j))
            } else {
                Poly::zero()
            }
        })
        .collect();
    let src = Algebra::from_parts(2, vars, diffs, &inverted)?;
    let mut fwd: Vec<Poly> = (0..n).map(|j| c.gen(j)).collect();
    fwd.push(q.s.image(a).clone());
    let forward = AlgMap::new(&src, c, fwd)?;
    let inverse = AlgMap::new(c, &src, inv)?;
    let facts = vec![
        (
            "comparison map is a chain map".to_string(),
            forward.check_chain_map().is_ok(),
        ),
        (
            "comparison map preserves bidegrees".to_string(),
            forward.check_degrees(|w| w.to_vec()).is_ok(),
        ),
        (
            "inverse is a chain map".to_string(),
            inverse.check_chain_map().is_ok(),
        ),
        (
            "maps are mutually inverse".to_string(),
            forward.is_inverse_of(&inverse),
        ),
    ];
    let s_model = AlgebraModel::new(&src, bx);
    let t_model = AlgebraModel::new(c, bx);
    let comparison = compare_with_inverse(&forward, &inverse, &s_model, &t_model)?;
    Ok(crate::qkernel::IsoCheck::new(
        format!("fiber product chart ({}, {})", chart.x, chart.y),
        facts,
        comparison,
    ))
}

/// One line of an end-to-end run.
#[derive(Clone, Debug)]
pub struct Step {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct MukaiReport {
    pub l: usize,
    pub steps: Vec<Step>,
    pub windows: Vec<WindowMembership>,
    pub property_p: PropertyPReport,
    pub fiber: FiberComparison,
    pub charts: Vec<ChartHomologyReport>,
    pub verdict: Verdict,
}

/// End-to-end pipeline for the rank-`l` Mukai flop.
pub fn mukai_verify(l: usize, bx: &TruncationBox) -> Result<MukaiReport, WallCrossError> {
    if l == 0 {
        return Err(WallCrossError::NoPositiveChart);
    }
    let r = crate::catalog::mukai(l)?;
    let mut steps = Vec::new();
    let mut windows = Vec::new();
    for side in [WindowSide::Plus, WindowSide::Minus] {
        let w = window_membership(&r, side, bx)?;
        let twists: Vec<String> = w.twists.iter().map(|t| t.to_string()).collect();
        steps.push(Step {
            name: format!("window {side}"),
            verdict: w.verdict,
            detail: format!("twists {}", twists.join(", ")),
        });
        windows.push(w);
    }
    let property_p = check_property_p(&r, bx)?;
    steps.push(Step {
        name: "property P".into(),
        verdict: property_p.verdict,
        detail: format!(
            "{} certified pieces, {} failing",
            property_p.rho.certified_pieces, property_p.rho.failing_pieces
        ),
    });
    let fiber = fiber_comparison(&r, bx)?;
    let isos = fiber
        .charts
        .iter()
        .filter(|c| c.iso.as_ref().is_some_and(|i| i.verdict == Verdict::Pass))
        .count();
    steps.push(Step {
        name: "fiber comparison".into(),
        verdict: fiber.verdict,
        detail: format!("{isos} of {} charts isomorphic", fiber.charts.len()),
    });
    let q = build_q(&r)?;
    let bx2 = arity2(bx);
    let charts: Vec<ChartHomologyReport> = charts_of(&q)?
        .iter()
        .map(|c| chart_report(c, &bx2))
        .collect();
    let sheaf = charts
        .iter()
        .all(|c| c.h_minus_one_vanishes() && c.certified_pieces > 0);
    steps.push(Step {
        name: "chart homology".into(),
        verdict: Verdict::from_bool(sheaf),
        detail: "homology concentrated in degree 0 on every chart".into(),
    });
    let verdict = Verdict::all(steps.iter().map(|s| s.verdict));
    Ok(MukaiReport {
        l,
        steps,
        windows,
        property_p,
        fiber,
        charts,
        verdict,
    })
}

impl fmt::Display for MukaiReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mukai l = {}: {}", self.l, self.verdict)?;
        for s in &self.steps {
            writeln!(f, "  {}: {} ({})", s.name, s.verdict, s.detail)?;
        }
        Ok(())
    }
}
