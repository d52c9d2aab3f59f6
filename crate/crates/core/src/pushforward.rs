//! Čech complexes of the kernel on a semistable cover and the window image
//! of the twists `R(i)`.
//!
//! Convention: the term indexed by a cover subset `S` sits in Čech degree
//! `|S| - 1`; the total degree of `(S, m)` is `|S| - 1 + hdeg(m)` and the
//! total differential is `δ + (-1)^{|S|-1} d`.

use crate::algebra::{AlgMap, Algebra, AlgebraError, Rat, VariableDecl};
use crate::chain::{
    analyze, homology_table, ChainModel, Cone, HilbertTable, Key, PieceHomology, TableEntry,
};
use crate::complexes::{key_of, pullback_key, summarize, AlgebraModel, QuasiIsoReport, Verdict};
use crate::grading::InvariantGrading;
use crate::mono::Mono;
use crate::qkernel::{build_q, KernelAlgebra, KernelError};
use crate::slices::{enumerate_monomials, TruncationBox};
use num_traits::One;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CechError {
    #[error("side {0} has no variables to invert")]
    EmptySide(WindowSide),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Which semistable locus the first factor is restricted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WindowSide {
    Plus,
    Minus,
}

impl fmt::Display for WindowSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowSide::Plus => "+",
            WindowSide::Minus => "-",
        })
    }
}

/// Alternating Čech complex of a kernel algebra over a cover given by sets
/// of variables to invert.
#[derive(Clone, Debug)]
pub struct CechComplex {
    pub alg: Arc<Algebra>,
    /// Cover elements: variable indices inverted on that open set.
    pub cover: Vec<Vec<usize>>,
    pub labels: Vec<String>,
    /// Chart algebra per nonempty subset mask (index 0 unused).
    pub charts: Vec<Option<Arc<Algebra>>>,
    pub grading: InvariantGrading,
}

impl CechComplex {
    pub fn new(
        alg: &Arc<Algebra>,
        cover: Vec<Vec<usize>>,
        labels: Vec<String>,
    ) -> Result<Self, AlgebraError> {
        let n = cover.len();
        let mut charts = vec![None; 1 << n];
        for (mask, chart) in charts.iter_mut().enumerate().skip(1) {
            let names: BTreeSet<String> = (0..n)
                .filter(|j| mask & (1 << j) != 0)
                .flat_map(|j| cover[j].iter().map(|&v| alg.var(v).name.clone()))
                .collect();
            *chart = Some(alg.localize(&names)?);
        }
        Ok(CechComplex {
            alg: Arc::clone(alg),
            grading: InvariantGrading::of(alg),
            cover,
            labels,
            charts,
        })
    }

    pub fn len(&self) -> usize {
        self.cover.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cover.is_empty()
    }

    pub fn chart(&self, mask: u32) -> &Arc<Algebra> {
        self.charts[mask as usize]
            .as_ref()
            .expect("nonempty subset")
    }

    /// Labels of the cover elements in a subset.
    pub fn subset_label(&self, mask: u32) -> String {
        let names: Vec<&str> = (0..self.len())
            .filter(|j| mask & (1 << j) != 0)
            .map(|j| self.labels[j].as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    }

    fn valid_in(&self, mask: u32, m: &Mono) -> bool {
        let chart = self.chart(mask);
        m.exps()
            .iter()
            .enumerate()
            .all(|(i, &e)| e >= 0 || chart.is_inverted(i))
    }
}

/// `(subset mask, monomial)`.
pub type CechElem = (u32, Mono);

/// Budgeted model of the Čech total complex.
pub struct CechModel<'a> {
    pub cech: &'a CechComplex,
    pub budget: u32,
    pub hmin: i64,
    pub lo: i64,
    pub hi: i64,
    pub keep: Box<dyn Fn(&Mono) -> bool + Sync + Send + 'a>,
}

impl<'a> CechModel<'a> {
    pub fn new(
        cech: &'a CechComplex,
        bx: &TruncationBox,
        keep: Box<dyn Fn(&Mono) -> bool + Sync + Send + 'a>,
    ) -> Self {
        let top = cech.len() as i64 - 1;
        CechModel {
            cech,
            budget: bx.budget,
            hmin: bx.hmin,
            lo: bx.hmin,
            hi: top,
            keep,
        }
    }
}

impl ChainModel for CechModel<'_> {
    type B = CechElem;

    fn basis(&self) -> Vec<CechElem> {
        let mut out = Vec::new();
        for mask in 1u32..(1 << self.cech.len()) {
            let c = mask.count_ones() as i64 - 1;
            let hlo = (self.lo - 1 - c).max(self.hmin - 1);
            let hhi = (self.hi + 1 - c).min(0);
            if hlo > hhi {
                continue;
            }
            for m in enumerate_monomials(self.cech.chart(mask), self.budget, hlo, hhi, &*self.keep)
            {
                out.push((mask, m));
            }
        }
        out
    }

    fn degree(&self, b: &CechElem) -> i64 {
        b.0.count_ones() as i64 - 1 + self.cech.alg.hdeg(&b.1)
    }

    fn key(&self, b: &CechElem) -> Key {
        self.cech.grading.key(&b.1)
    }

    fn multidegree(&self, b: &CechElem) -> Vec<i64> {
        self.cech.alg.weight(&b.1)
    }

    fn d(&self, b: &CechElem) -> Vec<(CechElem, Rat)> {
        let (mask, m) = b;
        let mut out = Vec::new();
        for j in 0..self.cech.len() {
            if mask & (1 << j) != 0 {
                continue;
            }
            let before = (mask & ((1u32 << j) - 1)).count_ones();
            let c = if before % 2 == 0 {
                Rat::one()
            } else {
                -Rat::one()
            };
            out.push(((mask | (1 << j), m.clone()), c));
        }
        let sign_odd = (mask.count_ones() - 1) % 2 == 1;
        let mut p = crate::algebra::Poly::zero();
        self.cech.chart(*mask).d_mono(m, &Rat::one(), &mut p);
        for (t, c) in p.iter() {
            out.push((
                (*mask, t.clone()),
                if sign_odd { -c.clone() } else { c.clone() },
            ));
        }
        out
    }

    fn preimages(&self, b: &CechElem) -> Option<Vec<CechElem>> {
        let (mask, m) = b;
        let mut out = Vec::new();
        if mask.count_ones() > 1 {
            for j in 0..self.cech.len() {
                if mask & (1 << j) != 0 {
                    let smaller = mask & !(1 << j);
                    if self.cech.valid_in(smaller, m) {
                        out.push((smaller, m.clone()));
                    }
                }
            }
        }
        out.extend(
            self.cech
                .chart(*mask)
                .preimage_candidates(m)
                .into_iter()
                .map(|n| (*mask, n)),
        );
        Some(out)
    }
}

/// Čech complex of `Q(R)` over the cover `{x_a}` inverting each positive
/// base variable through `p` (side `+`).  The `-` side is the `+` side of the
/// weight-reversed presentation.
pub fn cech_complex(q: &KernelAlgebra) -> Result<CechComplex, CechError> {
    let mut cover = Vec::new();
    let mut labels = Vec::new();
    for (i, v) in q.base.vars().iter().enumerate() {
        if v.hdeg == 0 && v.weight[0] > 0 {
            let img = q.p.image(i);
            let (m, _) = img.iter().next().expect("monomial image");
            cover.push((0..q.alg.nvars()).filter(|&j| m.exps()[j] != 0).collect());
            labels.push(v.name.clone());
        }
    }
    if cover.is_empty() {
        return Err(CechError::EmptySide(WindowSide::Plus));
    }
    Ok(CechComplex::new(&q.alg, cover, labels)?)
}

/// The same presentation with every internal weight negated: its `+` side
/// is the `-` side of the original.
pub fn reverse_weights(r: &Arc<Algebra>) -> Result<Arc<Algebra>, AlgebraError> {
    let vars: Vec<VariableDecl> = r
        .vars()
        .iter()
        .map(|v| {
            VariableDecl::new(
                v.name.clone(),
                v.weight.iter().map(|w| -w).collect(),
                v.hdeg,
            )
        })
        .collect();
    Algebra::from_parts(r.arity(), vars, r.diffs().to_vec(), &r.inverted_names())
}

/// Window image of one twist.
#[derive(Clone, Debug)]
pub struct WindowImageReport {
    pub side: WindowSide,
    pub twist: i64,
    /// Generator-degree hypothesis of the window statement holds.
    pub hypothesis_ok: bool,
    /// Čech cohomology of the `(twist, *)` part from certified pieces,
    /// keyed by (second internal degree, total degree).
    pub cohomology: HilbertTable,
    /// Same, contributed by pieces that could not be certified.
    pub uncertified: HilbertTable,
    /// Certified nonzero classes in total degree ≠ 0.
    pub higher_classes: usize,
    /// Piecewise comparison of `R(i) -> Čech` (absent when no comparison
    /// map exists for this twist).
    pub comparison: Option<QuasiIsoReport>,
    /// Acyclicity of each individual Čech term, by subset label.
    pub terms: Vec<(String, Verdict)>,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
}

impl WindowImageReport {
    pub fn h(&self, n: i64, deg: i64) -> usize {
        self.cohomology
            .get(&(vec![n], deg))
            .map(|e| e.dim)
            .unwrap_or(0)
    }
}

fn collapse(table: HilbertTable) -> HilbertTable {
    // keep only the second internal degree in the key
    let mut out = HilbertTable::new();
    for ((md, k), e) in table {
        let ent = out.entry((vec![md[1]], k)).or_insert(TableEntry {
            dim: 0,
            certified: e.certified,
        });
        ent.dim += e.dim;
        ent.certified &= e.certified;
    }
    out
}

fn split_tables(pieces: &[PieceHomology]) -> (HilbertTable, HilbertTable) {
    let certified: Vec<PieceHomology> = pieces.iter().filter(|p| p.certified).cloned().collect();
    let rest: Vec<PieceHomology> = pieces.iter().filter(|p| !p.certified).cloned().collect();
    let drop_zero =
        |t: HilbertTable| -> HilbertTable { t.into_iter().filter(|(_, e)| e.dim > 0).collect() };
    (
        collapse(drop_zero(homology_table(&certified, false))),
        collapse(drop_zero(homology_table(&rest, false))),
    )
}

/// `Φ_{Q±}(j^* R(i))`: Čech cohomology of the kernel twisted by `(i, 0)`,
/// `(i, *)`-invariants, compared with `R(i)` through `r ↦ u^{-i} s(r)`.
pub fn window_image(
    r: &Arc<Algebra>,
    i: i64,
    side: WindowSide,
    bx: &TruncationBox,
) -> Result<WindowImageReport, CechError> {
    let (base, twist) = match side {
        WindowSide::Plus => (Arc::clone(r), i),
        WindowSide::Minus => (reverse_weights(r)?, -i),
    };
    let hypothesis_ok = base.vars().iter().all(|v| v.hdeg == 0 || v.weight[0] <= 0);
    let q = build_q(&base)?;
    let cech = cech_complex(&q).map_err(|e| match e {
        CechError::EmptySide(_) => CechError::EmptySide(side),
        e => e,
    })?;
    let range = bx.degree_range[0];
    let keep_q = {
        let alg = Arc::clone(&q.alg);
        move |m: &Mono| {
            let w = alg.weight(m);
            w[0] == twist && range.0 <= w[1] && w[1] <= range.1
        }
    };
    let terms = (1u32..1 << cech.len())
        .map(|mask| {
            let model = AlgebraModel::with_filter(
                cech.chart(mask),
                bx.budget,
                bx.hmin,
                0,
                Box::new(keep_q.clone()),
            );
            let pieces = analyze(&model, bx.hmin, 0);
            (cech.subset_label(mask), acyclicity(&pieces))
        })
        .collect();
    let model = CechModel::new(&cech, bx, Box::new(keep_q.clone()));
    let pieces = analyze(&model, model.lo, model.hi);
    let (cohomology, uncertified) = split_tables(&pieces);
    let higher_classes: usize = pieces
        .iter()
        .filter(|p| p.certified)
        .flat_map(|p| p.homology.iter())
        .filter(|(&k, _)| k != 0)
        .map(|(_, &h)| h)
        .sum();
    let mut diagnostics = Vec::new();
    if !hypothesis_ok {
        diagnostics
            .push("a dg generator has positive weight: the window statement does not apply".into());
    }
    if higher_classes > 0 {
        diagnostics.push(format!(
            "{higher_classes} certified classes in nonzero Čech degree"
        ));
    }

    let comparison = if twist <= 0 {
        Some(compare_twist(&q, &cech, twist, bx, &model)?)
    } else {
        diagnostics.push(format!(
            "no comparison map u^{{{}}} s(-) for this twist",
            -twist
        ));
        None
    };
    let verdict = match &comparison {
        Some(c) => c.verdict,
        None => Verdict::Inconclusive,
    };
    Ok(WindowImageReport {
        side,
        twist: i,
        hypothesis_ok,
        cohomology,
        uncertified,
        higher_classes,
        comparison,
        terms,
        verdict,
        diagnostics,
    })
}

fn acyclicity(pieces: &[PieceHomology]) -> Verdict {
    let certified: Vec<&PieceHomology> = pieces.iter().filter(|p| p.certified).collect();
    if certified.iter().any(|p| !p.is_acyclic()) {
        Verdict::Fail
    } else if certified.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    }
}

fn compare_twist(
    q: &KernelAlgebra,
    cech: &CechComplex,
    twist: i64,
    bx: &TruncationBox,
    tgt: &CechModel<'_>,
) -> Result<QuasiIsoReport, CechError> {
    let r = &q.base;
    let range = bx.degree_range[0];
    let rr = Arc::clone(r);
    // r has internal degree n + twist where n is the second degree in Q
    let src = AlgebraModel::with_filter(
        r,
        bx.budget,
        bx.hmin,
        0,
        Box::new(move |m: &Mono| {
            let n = rr.weight(m)[0] - twist;
            range.0 <= n && n <= range.1
        }),
    );
    let s: &AlgMap = &q.s;
    let (psi, scale) = pullback_key(s, &cech.grading).map_err(KernelError::from)?;
    let ukey: Vec<i64> = cech.grading.key(&Mono::var(q.alg.nvars(), q.u));
    let shift: Vec<i64> = ukey.iter().map(|k| -twist * k * scale).collect();
    let nq = q.alg.nvars();
    let u = q.u;
    let singles: Vec<u32> = (0..cech.len()).map(|j| 1u32 << j).collect();
    let cone = Cone {
        src: &src,
        tgt,
        map: Box::new(|m: &Mono| {
            let img = s.apply_mono(m);
            let mut out = Vec::new();
            for (t, c) in img.iter() {
                let mut e = t.exps().to_vec();
                e[u] += -twist as i32;
                let t2 = Mono::from_vec(e);
                for &mask in &singles {
                    out.push(((mask, t2.clone()), c.clone()));
                }
            }
            out
        }),
        src_key: Box::new(move |m: &Mono| {
            key_of(&psi, m)
                .iter()
                .zip(&shift)
                .map(|(a, b)| a + b)
                .collect()
        }),
        tgt_scale: scale,
        map_preimages: Box::new(move |t: &(u32, Mono)| {
            if t.0.count_ones() != 1 {
                return Some(Vec::new());
            }
            let mut e = t.1.exps().to_vec();
            e[u] += twist as i32;
            debug_assert_eq!(e.len(), nq);
            s.monomial_preimages(&Mono::from_vec(e), &[])
        }),
    };
    Ok(summarize(analyze(&cone, tgt.lo, tgt.hi)))
}

/// Window range of a side: `(-μ₊, 0]` for `+`, `[0, -μ₋)` for `-`.
pub fn window_range(r: &Algebra, side: WindowSide) -> Vec<i64> {
    let (mu_plus, mu_minus) = crate::windows::mu_of(r);
    match side {
        WindowSide::Plus => ((-mu_plus + 1)..=0).collect(),
        WindowSide::Minus => (0..-mu_minus).collect(),
    }
}

#[derive(Clone, Debug)]
pub struct WindowMembership {
    pub side: WindowSide,
    pub twists: Vec<i64>,
    pub reports: Vec<WindowImageReport>,
    pub degenerate: bool,
    pub hypothesis_ok: bool,
    pub verdict: Verdict,
}

/// Runs [`window_image`] over the whole window range of a side.
pub fn window_membership(
    r: &Arc<Algebra>,
    side: WindowSide,
    bx: &TruncationBox,
) -> Result<WindowMembership, CechError> {
    let twists = window_range(r, side);
    if twists.is_empty() {
        return Ok(WindowMembership {
            side,
            twists,
            reports: Vec::new(),
            degenerate: true,
            hypothesis_ok: true,
            verdict: Verdict::Inconclusive,
        });
    }
    let mut reports = Vec::new();
    for &i in &twists {
        reports.push(window_image(r, i, side, bx)?);
    }
    let hypothesis_ok = reports.iter().all(|r| r.hypothesis_ok);
    let verdict = Verdict::all(reports.iter().map(|r| r.verdict));
    Ok(WindowMembership {
        side,
        twists,
        reports,
        degenerate: false,
        hypothesis_ok,
        verdict,
    })
}

impl fmt::Display for WindowImageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "window image side {} twist {}: {}",
            self.side, self.twist, self.verdict
        )?;
        for ((n, k), e) in &self.cohomology {
            writeln!(f, "  H^{k} degree {} = {} [certified]", n[0], e.dim)?;
        }
        for (label, v) in &self.terms {
            writeln!(f, "  term {label} acyclic: {v}")?;
        }
        for d in &self.diagnostics {
            writeln!(f, "  note: {d}")?;
        }
        Ok(())
    }
}
