//! Slice complexes, homology dimensions and quasi-isomorphism verdicts.

use crate::algebra::{AlgMap, Algebra, Poly, Rat};
use crate::chain::{analyze, ChainModel, Cone, Key, PieceHomology};
use crate::grading::InvariantGrading;
use crate::linalg::{solve, Echelon};
use crate::mono::Mono;
use crate::slices::{
    enumerate_basis, linear_map_slice, ExactMatrix, SliceAction, SliceBasis, TruncationBox,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("consecutive differentials do not compose to zero at degree {0}")]
    NotAComplex(i64),
    #[error("map is not a chain map: {0}")]
    NotChainMap(String),
}

pub type KeepFn = Box<dyn Fn(&Mono) -> bool + Sync + Send>;

/// The monomial complex of an algebra, restricted by a budget and a filter.
pub struct AlgebraModel {
    pub alg: Arc<Algebra>,
    pub grading: InvariantGrading,
    pub budget: u32,
    pub lo: i64,
    pub hi: i64,
    pub keep: KeepFn,
    /// Multidegree coordinates fixed by `keep` (coordinate, value).
    pub pins: Vec<(usize, i64)>,
}

impl AlgebraModel {
    /// Monomials with hdeg in `[hmin, 0]` (plus one degree below), weight in
    /// the box's degree range.
    pub fn new(alg: &Arc<Algebra>, bx: &TruncationBox) -> Self {
        let a = Arc::clone(alg);
        let bx2 = bx.clone();
        Self::with_filter(
            alg,
            bx.budget,
            bx.hmin,
            0,
            Box::new(move |m| bx2.contains_degree(&a.weight(m))),
        )
    }

    pub fn with_filter(alg: &Arc<Algebra>, budget: u32, lo: i64, hi: i64, keep: KeepFn) -> Self {
        AlgebraModel {
            alg: Arc::clone(alg),
            grading: InvariantGrading::of(alg),
            budget,
            lo,
            hi,
            keep,
            pins: Vec::new(),
        }
    }

    pub fn with_pins(mut self, pins: Vec<(usize, i64)>) -> Self {
        self.pins = pins;
        self
    }
}

impl ChainModel for AlgebraModel {
    type B = Mono;

    fn basis(&self) -> Vec<Mono> {
        crate::slices::enumerate_monomials(
            &self.alg,
            self.budget,
            self.lo - 1,
            self.hi + 1,
            &*self.keep,
        )
    }

    fn degree(&self, b: &Mono) -> i64 {
        self.alg.hdeg(b)
    }

    fn key(&self, b: &Mono) -> Key {
        self.grading.key(b)
    }

    fn multidegree(&self, b: &Mono) -> Vec<i64> {
        self.alg.weight(b)
    }

    fn d(&self, b: &Mono) -> Vec<(Mono, Rat)> {
        let mut p = Poly::zero();
        self.alg.d_mono(b, &Rat::one(), &mut p);
        p.iter().map(|(m, c)| (m.clone(), c.clone())).collect()
    }

    fn preimages(&self, b: &Mono) -> Option<Vec<Mono>> {
        Some(self.alg.preimage_candidates(b))
    }
}

/// One internal multidegree: bases per homological degree and the exact
/// differential matrices `d^h: C^h -> C^{h+1}`.
#[derive(Clone, Debug)]
pub struct SliceComplex {
    pub multidegree: Vec<i64>,
    pub bases: BTreeMap<i64, SliceBasis>,
    pub diffs: BTreeMap<i64, ExactMatrix>,
    pub budget: u32,
}

impl SliceComplex {
    /// Materializes the slice of `alg` in `multidegree`, hdeg `hmin-1 ..= 0`.
    pub fn of_algebra(alg: &Arc<Algebra>, multidegree: &[i64], bx: &TruncationBox) -> Self {
        let mut bases = BTreeMap::new();
        for h in bx.hmin - 1..=1 {
            bases.insert(h, enumerate_basis(alg, multidegree, h, bx));
        }
        let mut diffs = BTreeMap::new();
        for h in bx.hmin - 1..=0 {
            let m = linear_map_slice(
                alg,
                &SliceAction::Differential,
                &bases[&h],
                &bases[&(h + 1)],
            )
            .expect("differential is degree compatible");
            diffs.insert(h, m);
        }
        SliceComplex {
            multidegree: multidegree.to_vec(),
            bases,
            diffs,
            budget: bx.budget,
        }
    }

    /// A complex given directly by matrices (bases carry only dimensions).
    pub fn shifted(&self, by: i64) -> SliceComplex {
        SliceComplex {
            multidegree: self.multidegree.clone(),
            bases: self
                .bases
                .iter()
                .map(|(k, v)| (k + by, v.clone()))
                .collect(),
            diffs: self
                .diffs
                .iter()
                .map(|(k, v)| (k + by, v.clone()))
                .collect(),
            budget: self.budget,
        }
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.bases.keys().copied().collect()
    }
}

/// Homology dimension per degree, with certification flags.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HomologyReport {
    pub dims: BTreeMap<i64, usize>,
    pub certified: BTreeMap<i64, bool>,
    pub description: Option<String>,
}

impl HomologyReport {
    pub fn h(&self, deg: i64) -> usize {
        self.dims.get(&deg).copied().unwrap_or(0)
    }

    pub fn is_certified(&self, deg: i64) -> bool {
        self.certified.get(&deg).copied().unwrap_or(false)
    }

    /// Degrees with nonzero homology.
    pub fn support(&self) -> Vec<i64> {
        self.dims
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(&k, _)| k)
            .collect()
    }
}

impl fmt::Display for HomologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.dims.iter().rev() {
            let c = if self.is_certified(*k) {
                "certified"
            } else {
                "uncertified"
            };
            writeln!(f, "H^{k} = {d} [{c}]")?;
        }
        if let Some(desc) = &self.description {
            writeln!(f, "{desc}")?;
        }
        Ok(())
    }
}

/// Exact homology of a slice complex.  Degree `h` is reported when both
/// neighbouring differentials are present; it is certified when neither
/// has boundary-affected columns and every preimage candidate of a basis
/// element of `C^h` is itself in the basis of `C^{h-1}`.
pub fn homology_dims(c: &SliceComplex) -> Result<HomologyReport, ComplexError> {
    for (&h, m) in &c.diffs {
        if let Some(next) = c.diffs.get(&(h + 1)) {
            if !m.any_boundary() && !next.any_boundary() && !next.matrix.mul(&m.matrix).is_zero() {
                return Err(ComplexError::NotAComplex(h));
            }
        }
    }
    let mut rep = HomologyReport::default();
    for (&h, basis) in &c.bases {
        let (Some(out), Some(inc)) = (c.diffs.get(&h), c.diffs.get(&(h - 1))) else {
            continue;
        };
        let r_out = crate::slices::rank(out);
        let r_in = crate::slices::rank(inc);
        rep.dims.insert(h, basis.len() - r_out - r_in);
        let below = &c.bases[&(h - 1)];
        let below_index = below.index();
        let inside = basis.monomials.iter().all(|m| {
            basis
                .alg
                .preimage_candidates(m)
                .iter()
                .all(|p| below_index.contains_key(p))
        });
        rep.certified
            .insert(h, !out.any_boundary() && !inc.any_boundary() && inside);
    }
    Ok(rep)
}

/// Outcome of a quasi-isomorphism comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl Verdict {
    /// Combines verdicts: any failure fails, otherwise any inconclusive
    /// result is inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        self.max(other)
    }

    pub fn all(it: impl IntoIterator<Item = Verdict>) -> Verdict {
        it.into_iter().fold(Verdict::Pass, Verdict::and)
    }

    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Per-piece quasi-isomorphism results of a chain map.
#[derive(Clone, Debug)]
pub struct QuasiIsoReport {
    pub pieces: Vec<PieceHomology>,
    pub certified_pieces: usize,
    pub failing_pieces: usize,
    pub verdict: Verdict,
}

/// Pulls the target's invariant grading back along `f`, so that source
/// monomials can be grouped by the target piece they map to.  Returns the
/// per-generator key vectors (scaled by a common denominator) and the scale.
pub fn pullback_key(
    f: &AlgMap,
    target_grading: &InvariantGrading,
) -> Result<(Vec<Vec<i64>>, i64), ComplexError> {
    let src = &f.source;
    let n = src.nvars();
    let r = target_grading.rows.len();
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut rhs: Vec<Vec<Rat>> = Vec::new();
    let int = |x: i64| Rat::from_integer(BigInt::from(x));
    for v in 0..n {
        let img = f.image(v);
        let mut keys = img.iter().map(|(m, _)| target_grading.key(m));
        if let Some(k0) = keys.next() {
            if keys.any(|k| k != k0) {
                return Err(ComplexError::NotChainMap(format!(
                    "image of `{}` is not homogeneous for the target grading",
                    src.var(v).name
                )));
            }
            let mut row = vec![Rat::zero(); n];
            row[v] = Rat::one();
            rows.push(row);
            rhs.push(k0.into_iter().map(int).collect());
        }
        for (t, _) in src.diff_of(v).iter() {
            let mut row: Vec<Rat> = t.exps().iter().map(|&e| int(e as i64)).collect();
            row[v] -= Rat::one();
            rows.push(row);
            rhs.push(vec![Rat::zero(); r]);
        }
    }
    let mut psi = vec![vec![Rat::zero(); r]; n];
    for k in 0..r {
        let b: Vec<Rat> = rhs.iter().map(|x| x[k].clone()).collect();
        let x = if rows.is_empty() {
            vec![Rat::zero(); n]
        } else {
            solve(&rows, &b)
                .ok_or_else(|| ComplexError::NotChainMap("no compatible grading pullback".into()))?
        };
        for v in 0..n {
            psi[v][k] = x[v].clone();
        }
    }
    let l = psi
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let lr = Rat::from_integer(l.clone());
    let scaled = psi
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| (x * &lr).to_integer().to_i64().expect("small key"))
                .collect()
        })
        .collect();
    Ok((scaled, l.to_i64().expect("small scale")))
}

pub fn key_of(psi: &[Vec<i64>], m: &Mono) -> Key {
    let r = psi.first().map(|x| x.len()).unwrap_or(0);
    let mut k = vec![0i64; r];
    for (v, &e) in m.exps().iter().enumerate() {
        if e != 0 {
            for (j, kj) in k.iter_mut().enumerate() {
                *kj += e as i64 * psi[v][j];
            }
        }
    }
    k
}

/// Quasi-isomorphism check of an algebra map between two budgeted monomial
/// complexes, piece by piece on the mapping cone.
pub fn compare_models(
    f: &AlgMap,
    src: &AlgebraModel,
    tgt: &AlgebraModel,
) -> Result<QuasiIsoReport, ComplexError> {
    f.check_chain_map()
        .map_err(|e| ComplexError::NotChainMap(e.to_string()))?;
    let (psi, scale) = pullback_key(f, &tgt.grading)?;
    let cone = Cone {
        src,
        tgt,
        map: Box::new(|m: &Mono| {
            f.apply_mono(m)
                .iter()
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect()
        }),
        src_key: Box::new(move |m: &Mono| key_of(&psi, m)),
        tgt_scale: scale,
        map_preimages: Box::new(|t: &Mono| f.monomial_preimages(t, &src.pins)),
    };
    let pieces = analyze(&cone, src.lo.min(tgt.lo), src.hi.max(tgt.hi));
    Ok(summarize(pieces))
}

pub fn summarize(pieces: Vec<PieceHomology>) -> QuasiIsoReport {
    let certified_pieces = pieces.iter().filter(|p| p.certified).count();
    let failing_pieces = pieces
        .iter()
        .filter(|p| p.certified && !p.is_acyclic())
        .count();
    let verdict = if failing_pieces > 0 {
        Verdict::Fail
    } else if certified_pieces > 0 {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    QuasiIsoReport {
        pieces,
        certified_pieces,
        failing_pieces,
        verdict,
    }
}

/// `compare_quasi_iso` for a same-arity algebra map over a sweep box:
/// both sides are restricted to the box's degree range and budget.
pub fn compare_quasi_iso(
    f: &AlgMap,
    sweep: &TruncationBox,
) -> Result<QuasiIsoReport, ComplexError> {
    let src = AlgebraModel::new(&f.source, sweep);
    let tgt = AlgebraModel::new(&f.target, sweep);
    compare_models(f, &src, &tgt)
}

/// Homology of every piece of an algebra within a box.
pub fn algebra_homology(alg: &Arc<Algebra>, bx: &TruncationBox) -> Vec<PieceHomology> {
    let model = AlgebraModel::new(alg, bx);
    analyze(&model, bx.hmin, 0)
}

/// Rank of a set of sparse vectors (re-exported for callers assembling
/// their own comparisons).
pub fn span_rank(vecs: impl IntoIterator<Item = crate::linalg::SparseVec>) -> usize {
    let mut e = Echelon::new();
    for v in vecs {
        e.insert(v);
    }
    e.rank()
}
