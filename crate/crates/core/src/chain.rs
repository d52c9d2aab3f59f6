//! Budgeted chain complexes split into d-invariant pieces.
//!
//! A [`ChainModel`] exposes a finite set of basis elements (everything up to
//! an exponent budget), a differential of degree +1, and a piece key that
//! the differential preserves.  [`analyze`] groups the basis by key and
//! computes exact homology per piece.
//!
//! Certification: a piece is *certified* when the differential of each of
//! its elements stays inside the enumerated set and every basis element that
//! could contain it in its differential (its *preimage candidates*) is
//! enumerated too.  The enumerated part is then closed under `d` and under
//! taking `d`-preimages, hence a direct summand of the full (possibly
//! infinite) piece, and its homology is exact.  Uncertified pieces still get
//! a *vanishing* test: every cycle supported on preimage-closed elements must
//! be a boundary of an enumerated chain.

use crate::algebra::Rat;
use crate::linalg::{kernel_basis, Echelon, SparseVec};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

pub type Key = Vec<i64>;

pub trait ChainModel: Sync {
    type B: Clone + Eq + Hash + Ord + Send + Sync + Debug;

    /// Every basis element within the budget, degrees `lo - 1 ..= hi + 1`.
    fn basis(&self) -> Vec<Self::B>;
    fn degree(&self, b: &Self::B) -> i64;
    fn key(&self, b: &Self::B) -> Key;
    /// Internal multidegree used for tabulation.
    fn multidegree(&self, b: &Self::B) -> Vec<i64>;
    fn d(&self, b: &Self::B) -> Vec<(Self::B, Rat)>;
    /// Every basis element whose differential may contain `b` (a superset
    /// is fine), or `None` when that set cannot be bounded.
    fn preimages(&self, b: &Self::B) -> Option<Vec<Self::B>>;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceHomology {
    pub key: Key,
    pub multidegree: Vec<i64>,
    /// Basis dimension per degree.
    pub dims: BTreeMap<i64, usize>,
    /// Homology dimension per degree in the reporting window.
    pub homology: BTreeMap<i64, usize>,
    pub certified: bool,
    /// Per degree: no class is representable by an interior cycle.
    pub vanishing: BTreeMap<i64, bool>,
}

impl PieceHomology {
    pub fn h(&self, deg: i64) -> usize {
        self.homology.get(&deg).copied().unwrap_or(0)
    }

    /// Rigorous statement that degree `deg` carries no class inside the band.
    pub fn vanishes(&self, deg: i64) -> bool {
        self.vanishing.get(&deg).copied().unwrap_or(true)
    }

    pub fn is_acyclic(&self) -> bool {
        self.homology.values().all(|&h| h == 0)
    }
}

struct Column {
    vec: SparseVec,
    leaky: bool,
    closed: bool,
}

fn piece<M: ChainModel>(model: &M, key: Key, elems: Vec<M::B>, lo: i64, hi: i64) -> PieceHomology {
    let mut by_deg: BTreeMap<i64, Vec<M::B>> = BTreeMap::new();
    for b in elems {
        by_deg.entry(model.degree(&b)).or_default().push(b);
    }
    for v in by_deg.values_mut() {
        v.sort();
    }
    let index: HashMap<&M::B, (i64, usize)> = by_deg
        .iter()
        .flat_map(|(&k, v)| v.iter().enumerate().map(move |(i, b)| (b, (k, i))))
        .collect();
    let multidegree = by_deg
        .values()
        .next()
        .map(|v| model.multidegree(&v[0]))
        .unwrap_or_default();

    let mut columns: BTreeMap<i64, Vec<Column>> = BTreeMap::new();
    for (&k, v) in &by_deg {
        let cols = v
            .iter()
            .map(|b| {
                let mut leaky = false;
                let mut vec: SparseVec = Vec::new();
                for (t, c) in model.d(b) {
                    match index.get(&t) {
                        Some(&(kt, i)) if kt == k + 1 => vec.push((i, c)),
                        _ => leaky = true,
                    }
                }
                vec.sort_by_key(|x| x.0);
                // above the window, the outgoing differential is irrelevant
                let leaky = leaky && k <= hi;
                let closed = k < lo
                    || model.preimages(b).is_some_and(|pre| {
                        pre.iter()
                            .all(|p| matches!(index.get(p), Some(&(kp, _)) if kp == k - 1))
                    });
                Column { vec, leaky, closed }
            })
            .collect();
        columns.insert(k, cols);
    }

    let certified = columns.values().flatten().all(|c| !c.leaky && c.closed);
    let rank_of = |k: i64| -> usize {
        let mut e = Echelon::new();
        if let Some(cols) = columns.get(&k) {
            for c in cols {
                e.insert(c.vec.clone());
            }
        }
        e.rank()
    };
    let mut ranks: BTreeMap<i64, usize> = BTreeMap::new();
    for k in lo - 1..=hi {
        ranks.insert(k, rank_of(k));
    }
    let dims: BTreeMap<i64, usize> = by_deg.iter().map(|(&k, v)| (k, v.len())).collect();
    let mut homology = BTreeMap::new();
    let mut vanishing = BTreeMap::new();
    for k in lo..=hi {
        let dim = dims.get(&k).copied().unwrap_or(0);
        let h = dim.saturating_sub(ranks[&k] + ranks[&(k - 1)]);
        homology.insert(k, h);
        let vanish = if certified {
            h == 0
        } else {
            interior_cycles_are_boundaries(&columns, k)
        };
        vanishing.insert(k, vanish);
    }
    PieceHomology {
        key,
        multidegree,
        dims,
        homology,
        certified,
        vanishing,
    }
}

fn interior_cycles_are_boundaries(columns: &BTreeMap<i64, Vec<Column>>, k: i64) -> bool {
    let Some(cols) = columns.get(&k) else {
        return true;
    };
    let interior: Vec<usize> = (0..cols.len())
        .filter(|&i| cols[i].closed && !cols[i].leaky)
        .collect();
    if interior.is_empty() {
        return true;
    }
    let restricted: Vec<SparseVec> = interior.iter().map(|&i| cols[i].vec.clone()).collect();
    let cycles = kernel_basis(&restricted);
    if cycles.is_empty() {
        return true;
    }
    let mut boundaries = Echelon::new();
    if let Some(prev) = columns.get(&(k - 1)) {
        for c in prev.iter().filter(|c| !c.leaky) {
            boundaries.insert(c.vec.clone());
        }
    }
    cycles.into_iter().all(|z| {
        let mut v: SparseVec = z.into_iter().map(|(j, x)| (interior[j], x)).collect();
        v.sort_by_key(|x| x.0);
        boundaries.contains(v)
    })
}

/// Splits the model into pieces and computes homology for degrees `lo..=hi`.
pub fn analyze<M: ChainModel>(model: &M, lo: i64, hi: i64) -> Vec<PieceHomology> {
    let basis = model.basis();
    let mut groups: BTreeMap<Key, Vec<M::B>> = BTreeMap::new();
    for b in basis {
        groups.entry(model.key(&b)).or_default().push(b);
    }
    let groups: Vec<(Key, Vec<M::B>)> = groups.into_iter().collect();
    groups
        .into_par_iter()
        .map(|(k, v)| piece(model, k, v, lo, hi))
        .collect()
}

/// Dimension with certification, aggregated over pieces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TableEntry {
    pub dim: usize,
    pub certified: bool,
}

/// `(multidegree, degree) -> dimension`, summed over pieces.  An entry is
/// certified when every contributing piece is.
pub type HilbertTable = BTreeMap<(Vec<i64>, i64), TableEntry>;

pub fn homology_table(pieces: &[PieceHomology], certified_only: bool) -> HilbertTable {
    let mut t: HilbertTable = BTreeMap::new();
    for p in pieces {
        if certified_only && !p.certified {
            continue;
        }
        for (&k, &h) in &p.homology {
            let e = t.entry((p.multidegree.clone(), k)).or_insert(TableEntry {
                dim: 0,
                certified: true,
            });
            e.dim += h;
            e.certified &= p.certified;
        }
    }
    t
}

/// Mapping cone of a chain map `f: S -> T`: degree `k` is `S^{k+1} ⊕ T^k`,
/// `d(s, t) = (-d s, f s + d t)`.  Acyclic iff `f` is a quasi-isomorphism.
pub struct Cone<'a, S: ChainModel, T: ChainModel> {
    pub src: &'a S,
    pub tgt: &'a T,
    #[allow(clippy::type_complexity)]
    pub map: Box<dyn Fn(&S::B) -> Vec<(T::B, Rat)> + Sync + 'a>,
    /// Piece key of a source element, in target key coordinates.
    #[allow(clippy::type_complexity)]
    pub src_key: Box<dyn Fn(&S::B) -> Key + Sync + 'a>,
    /// Factor applied to target keys (pulled-back keys may carry a common
    /// denominator).
    pub tgt_scale: i64,
    /// Source elements whose image may contain a given target element.
    #[allow(clippy::type_complexity)]
    pub map_preimages: Box<dyn Fn(&T::B) -> Option<Vec<S::B>> + Sync + 'a>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConeElem<A, B> {
    Src(A),
    Tgt(B),
}

impl<'a, S: ChainModel, T: ChainModel> ChainModel for Cone<'a, S, T> {
    type B = ConeElem<S::B, T::B>;

    fn basis(&self) -> Vec<Self::B> {
        let mut v: Vec<Self::B> = self.src.basis().into_iter().map(ConeElem::Src).collect();
        v.extend(self.tgt.basis().into_iter().map(ConeElem::Tgt));
        v
    }

    fn degree(&self, b: &Self::B) -> i64 {
        match b {
            ConeElem::Src(s) => self.src.degree(s) - 1,
            ConeElem::Tgt(t) => self.tgt.degree(t),
        }
    }

    fn key(&self, b: &Self::B) -> Key {
        match b {
            ConeElem::Src(s) => (self.src_key)(s),
            ConeElem::Tgt(t) => self
                .tgt
                .key(t)
                .into_iter()
                .map(|x| x * self.tgt_scale)
                .collect(),
        }
    }

    fn multidegree(&self, b: &Self::B) -> Vec<i64> {
        match b {
            ConeElem::Src(s) => self.src.multidegree(s),
            ConeElem::Tgt(t) => self.tgt.multidegree(t),
        }
    }

    fn d(&self, b: &Self::B) -> Vec<(Self::B, Rat)> {
        match b {
            ConeElem::Src(s) => {
                let mut out: Vec<(Self::B, Rat)> = self
                    .src
                    .d(s)
                    .into_iter()
                    .map(|(x, c)| (ConeElem::Src(x), -c))
                    .collect();
                out.extend(
                    (self.map)(s)
                        .into_iter()
                        .map(|(x, c)| (ConeElem::Tgt(x), c)),
                );
                out
            }
            ConeElem::Tgt(t) => self
                .tgt
                .d(t)
                .into_iter()
                .map(|(x, c)| (ConeElem::Tgt(x), c))
                .collect(),
        }
    }

    fn preimages(&self, b: &Self::B) -> Option<Vec<Self::B>> {
        match b {
            ConeElem::Src(s) => Some(
                self.src
                    .preimages(s)?
                    .into_iter()
                    .map(ConeElem::Src)
                    .collect(),
            ),
            ConeElem::Tgt(t) => {
                let mut out: Vec<Self::B> = self
                    .tgt
                    .preimages(t)?
                    .into_iter()
                    .map(ConeElem::Tgt)
                    .collect();
                out.extend((self.map_preimages)(t)?.into_iter().map(ConeElem::Src));
                Some(out)
            }
        }
    }
}
