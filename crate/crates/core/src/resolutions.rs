//! Koszul complexes, truncated Koszul–Tate resolutions, the two-copy
//! resolution `K` of the kernel and the self-tensor check built on it.
//!
//! `K = R ⊗ R [u, κ, λ, μ, ν]` resolves `Q(R)` over the first copy through
//! `p` and the second through `s`:
//!
//! * `dκ_x = x₂ - u^{deg x} x₁` for positive base variables,
//! * `dμ_y = y₁ - u^{-deg y} y₂` for negative ones,
//! * `dλ_e = e₂ - u^{deg e} e₁ - c_e` for generators of degree ≥ 0,
//! * `dν_f = f₁ - u^{-deg f} f₂ - c_f` for generators of degree < 0,
//!
//! where the corrections `c` (in the ideal of κ, μ, λ, ν) make `d² = 0`.
//! For differentials in the base ring they are written down by telescoping
//! monomials through `dκ` and `dμ`; otherwise they are solved for.

use crate::algebra::{AlgMap, Algebra, AlgebraError, MapError, Poly, Rat, VariableDecl};
use crate::chain::{analyze, ChainModel, Cone, Key, PieceHomology};
use crate::complexes::{
    compare_models, key_of, pullback_key, summarize, AlgebraModel, ComplexError, QuasiIsoReport,
    Verdict,
};
use crate::linalg::{kernel_basis, solve, Echelon, SparseVec};
use crate::mono::Mono;
use crate::qkernel::{build_q, check_base, extend, fresh_name, KernelAlgebra, KernelError};
use crate::slices::{enumerate_monomials, TruncationBox};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolutionError {
    #[error("sequence element {0} is not homogeneous of homological degree 0")]
    NonHomogeneousSequence(usize),
    #[error("ideal generator {0} is not homogeneous of homological degree 0")]
    NonHomogeneousIdeal(usize),
    #[error("base ring must be a polynomial ring: {0}")]
    NonPolynomialBase(String),
    #[error("no correction term found for `{0}` within the search budget")]
    CorrectionNotFound(String),
    #[error("resolution did not stabilize within {0} rounds")]
    NotStabilized(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

fn var_poly(n: usize, i: usize) -> Poly {
    Poly::monomial(Mono::var(n, i), Rat::one())
}

fn homogeneous_hdeg0(alg: &Algebra, p: &Poly) -> Option<Vec<i64>> {
    let mut it = p.iter();
    let (m0, _) = it.next()?;
    let w = alg.weight(m0);
    if alg.hdeg(m0) != 0 {
        return None;
    }
    it.all(|(m, _)| alg.weight(m) == w && alg.hdeg(m) == 0)
        .then_some(w)
}

fn taken_names(alg: &Algebra) -> HashSet<String> {
    alg.vars().iter().map(|v| v.name.clone()).collect()
}

/// `alg` with new generators appended: `(name, weight, hdeg, differential)`
/// where differentials are written over the extended variable list.
fn adjoin(
    alg: &Algebra,
    new: Vec<(String, Vec<i64>, i64, Poly)>,
) -> Result<Arc<Algebra>, AlgebraError> {
    let extra = new.len();
    let mut vars = alg.vars().to_vec();
    let mut diffs: Vec<Poly> = alg.diffs().iter().map(|p| extend(p, extra)).collect();
    for (name, w, h, d) in new {
        vars.push(VariableDecl::new(name, w, h));
        diffs.push(d);
    }
    Algebra::from_parts(alg.arity(), vars, diffs, &alg.inverted_names())
}

/// Koszul complex of a sequence: one exterior generator per element,
/// `d c_i = s_i`, with an overall internal-degree twist.
#[derive(Clone, Debug)]
pub struct KoszulComplex {
    pub base: Arc<Algebra>,
    pub alg: Arc<Algebra>,
    pub generators: Vec<usize>,
    pub twist: i64,
}

impl KoszulComplex {
    /// Module twists of the terms: hdeg `-k` carries `R(-a_S + twist)` for
    /// each `k`-subset `S` of the sequence.
    pub fn term_twists(&self) -> BTreeMap<i64, Vec<Vec<i64>>> {
        let mut out: BTreeMap<i64, Vec<Vec<i64>>> = BTreeMap::new();
        let l = self.generators.len();
        for mask in 0u32..(1 << l) {
            let mut w = vec![0i64; self.alg.arity()];
            for (j, &g) in self.generators.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    for (a, b) in w.iter_mut().zip(&self.alg.var(g).weight) {
                        *a -= b;
                    }
                }
            }
            w[0] += self.twist;
            out.entry(-(mask.count_ones() as i64)).or_default().push(w);
        }
        for v in out.values_mut() {
            v.sort();
        }
        out
    }

    /// Piecewise homology of the slice of internal degree `md` (before twist).
    pub fn slice_homology(&self, md: &[i64], bx: &TruncationBox) -> Vec<PieceHomology> {
        let a = Arc::clone(&self.alg);
        let want: Vec<i64> = md
            .iter()
            .enumerate()
            .map(|(k, x)| if k == 0 { x - self.twist } else { *x })
            .collect();
        let model = AlgebraModel::with_filter(
            &self.alg,
            bx.budget,
            bx.hmin,
            0,
            Box::new(move |m| a.weight(m) == want),
        );
        analyze(&model, bx.hmin, 0)
    }
}

pub fn koszul_complex(
    alg: &Arc<Algebra>,
    sequence: &[Poly],
    twist: i64,
) -> Result<KoszulComplex, ResolutionError> {
    let mut taken = taken_names(alg);
    let n = alg.nvars();
    let mut new = Vec::new();
    for (i, s) in sequence.iter().enumerate() {
        let w = homogeneous_hdeg0(alg, s).ok_or(ResolutionError::NonHomogeneousSequence(i))?;
        let name = fresh_name(&taken, format!("c{}", i + 1));
        taken.insert(name.clone());
        new.push((name, w, -1, extend(s, sequence.len())));
    }
    let k = adjoin(alg, new)?;
    Ok(KoszulComplex {
        base: Arc::clone(alg),
        alg: k,
        generators: (n..n + sequence.len()).collect(),
        twist,
    })
}

/// An algebra extended by adjoined generators, with its certification band.
#[derive(Clone, Debug)]
pub struct ResolutionPresentation {
    pub base: Arc<Algebra>,
    pub alg: Arc<Algebra>,
    pub adjoined: Vec<usize>,
    pub band: TruncationBox,
}

impl ResolutionPresentation {
    pub fn adjoined_in_degree(&self, h: i64) -> Vec<usize> {
        self.adjoined
            .iter()
            .copied()
            .filter(|&i| self.alg.var(i).hdeg == h)
            .collect()
    }

    /// One line per adjoined generator: `name weight hdeg d = ...`, in the
    /// scenario's generator syntax.
    pub fn export(&self) -> String {
        let mut s = String::new();
        for &i in &self.adjoined {
            let v = self.alg.var(i);
            let w: Vec<String> = v.weight.iter().map(|x| x.to_string()).collect();
            s.push_str(&format!(
                "{} weight={} hdeg={} d={}\n",
                v.name,
                w.join(","),
                v.hdeg,
                self.alg.format(self.alg.diff_of(i))
            ));
        }
        s
    }
}

/// Cycles spanning new homology classes in degree `h`, taken from the
/// certified piece of least (standard degree, multidegree, key); `None` if
/// there is none.
fn least_classes(
    alg: &Arc<Algebra>,
    stdeg: &[i64],
    bx: &TruncationBox,
    h: i64,
) -> Option<(Vec<i64>, Vec<Poly>)> {
    let model = AlgebraModel::new(alg, bx);
    let pieces = analyze(&model, h, h);
    let mut by_key: BTreeMap<Key, BTreeMap<i64, Vec<Mono>>> = BTreeMap::new();
    for b in model.basis() {
        by_key
            .entry(model.key(&b))
            .or_default()
            .entry(model.degree(&b))
            .or_default()
            .push(b);
    }
    let standard = |m: &Mono| -> i64 {
        m.exps()
            .iter()
            .zip(stdeg)
            .map(|(&e, &s)| e as i64 * s)
            .sum()
    };
    let order = |p: &PieceHomology| {
        let d = by_key[&p.key]
            .get(&h)
            .and_then(|v| v.iter().map(standard).min())
            .unwrap_or(i64::MAX);
        (d, p.multidegree.clone(), p.key.clone())
    };
    let target = pieces
        .iter()
        .filter(|p| p.certified && p.h(h) > 0)
        .min_by_key(|p| order(p))?;
    let by_deg = by_key.remove(&target.key).expect("piece has elements");
    let empty = Vec::new();
    let at = |k: i64| by_deg.get(&k).unwrap_or(&empty);
    let above: HashMap<&Mono, usize> = at(h + 1).iter().enumerate().map(|(i, m)| (m, i)).collect();
    let column = |m: &Mono| -> SparseVec {
        let mut v: SparseVec = model
            .d(m)
            .into_iter()
            .map(|(t, c)| {
                (
                    *above.get(&t).expect("certified piece is closed under d"),
                    c,
                )
            })
            .collect();
        v.sort_by_key(|x| x.0);
        v
    };
    let cols: Vec<SparseVec> = at(h).iter().map(column).collect();
    let here: HashMap<&Mono, usize> = at(h).iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut span = Echelon::new();
    for m in at(h - 1) {
        let mut v: SparseVec = model
            .d(m)
            .into_iter()
            .map(|(t, c)| (*here.get(&t).expect("certified piece is closed under d"), c))
            .collect();
        v.sort_by_key(|x| x.0);
        span.insert(v);
    }
    let mut reps = Vec::new();
    for z in kernel_basis(&cols) {
        if span.insert(z.clone()) {
            reps.push(Poly::from_terms(
                z.into_iter().map(|(i, c)| (at(h)[i].clone(), c)),
            ));
        }
    }
    Some((target.multidegree.clone(), reps))
}

/// Koszul–Tate resolution of `T/I`, truncated to `hmin < hdeg < 0` and the
/// box: generators are adjoined for the least-degree classes until every
/// certified piece has no homology strictly between `hmin` and 0.
pub fn koszul_tate(
    t: &Arc<Algebra>,
    ideal: &[Poly],
    hmin: i64,
    bx: &TruncationBox,
) -> Result<ResolutionPresentation, ResolutionError> {
    if (0..t.nvars()).any(|i| t.is_inverted(i) || t.var(i).hdeg != 0) {
        return Err(ResolutionError::NonPolynomialBase(
            "Koszul–Tate needs a polynomial ring".into(),
        ));
    }
    for (i, g) in ideal.iter().enumerate() {
        if !g.is_zero() && homogeneous_hdeg0(t, g).is_none() {
            return Err(ResolutionError::NonHomogeneousIdeal(i));
        }
    }
    let gens: Vec<Poly> = ideal.iter().filter(|g| !g.is_zero()).cloned().collect();
    let kos = koszul_complex(t, &gens, 0)?;
    let mut alg = kos.alg;
    // standard degree: 1 on base variables, that of the differential on
    // adjoined generators; classes are killed in increasing standard degree
    let mut stdeg: Vec<i64> = vec![1; t.nvars()];
    let std_of = |p: &Poly, stdeg: &[i64]| -> i64 {
        p.iter()
            .map(|(m, _)| {
                m.exps()
                    .iter()
                    .zip(stdeg)
                    .map(|(&e, &s)| e as i64 * s)
                    .sum::<i64>()
            })
            .min()
            .unwrap_or(0)
    };
    for g in &gens {
        let d = std_of(g, &stdeg);
        stdeg.push(d);
    }
    let mut band = bx.clone();
    band.hmin = hmin;
    const ROUNDS: usize = 64;
    let mut rounds = 0;
    for h in (hmin + 1..=-1).rev() {
        while let Some((md, reps)) = least_classes(&alg, &stdeg, &band, h) {
            rounds += 1;
            if rounds > ROUNDS {
                return Err(ResolutionError::NotStabilized(ROUNDS));
            }
            let mut taken = taken_names(&alg);
            let new: Vec<(String, Vec<i64>, i64, Poly)> = reps
                .iter()
                .enumerate()
                .map(|(j, z)| {
                    let name = fresh_name(&taken, format!("t{}_{}", -(h - 1), alg.nvars() + j));
                    taken.insert(name.clone());
                    (name, md.clone(), h - 1, extend(z, reps.len()))
                })
                .collect();
            for z in &reps {
                let d = std_of(z, &stdeg);
                stdeg.push(d);
            }
            alg = adjoin(&alg, new)?;
        }
    }
    let adjoined = (t.nvars()..alg.nvars()).collect();
    Ok(ResolutionPresentation {
        base: Arc::clone(t),
        alg,
        adjoined,
        band,
    })
}

/// A Koszul–Tate resolution checked against brute-force quotient dimensions.
#[derive(Clone, Debug)]
pub struct KoszulTateReport {
    pub presentation: ResolutionPresentation,
    /// Certified `H^0` per (multidegree) with the brute-force `dim T/I`.
    pub h0: BTreeMap<Vec<i64>, (usize, usize)>,
    /// Certified classes strictly between `hmin` and 0.
    pub higher_classes: usize,
    pub certified_pieces: usize,
    pub verdict: Verdict,
}

pub fn check_koszul_tate(
    t: &Arc<Algebra>,
    ideal: &[Poly],
    hmin: i64,
    bx: &TruncationBox,
) -> Result<KoszulTateReport, ResolutionError> {
    let presentation = koszul_tate(t, ideal, hmin, bx)?;
    let expected = quotient_dims(&presentation, ideal);
    let model = AlgebraModel::new(&presentation.alg, &presentation.band);
    let pieces = analyze(&model, hmin + 1, 0);
    let mut h0: BTreeMap<Vec<i64>, (usize, usize)> = BTreeMap::new();
    let mut higher_classes = 0;
    let mut certified_pieces = 0;
    let mut mismatch = false;
    for p in pieces.iter().filter(|p| p.certified) {
        certified_pieces += 1;
        let want = expected.get(&p.key).copied().unwrap_or(0);
        mismatch |= p.h(0) != want;
        let e = h0.entry(p.multidegree.clone()).or_insert((0, 0));
        e.0 += p.h(0);
        e.1 += want;
        higher_classes += (hmin + 1..0).map(|k| p.h(k)).sum::<usize>();
    }
    let verdict = if mismatch || higher_classes > 0 {
        Verdict::Fail
    } else if certified_pieces > 0 {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    Ok(KoszulTateReport {
        presentation,
        h0,
        higher_classes,
        certified_pieces,
        verdict,
    })
}

/// Brute-force `dim (T/I)` per piece key of a resolution: monomials of `T`
/// in the piece minus the rank of the ideal's products landing there.
pub fn quotient_dims(res: &ResolutionPresentation, ideal: &[Poly]) -> BTreeMap<Key, usize> {
    let t = &res.base;
    let model = AlgebraModel::new(&res.alg, &res.band);
    let n = res.alg.nvars();
    let lift = |m: &Mono| -> Mono {
        let mut e = m.exps().to_vec();
        e.resize(n, 0);
        Mono::from_vec(e)
    };
    let monos = enumerate_monomials(t, res.band.budget, 0, 0, &|m| {
        res.band.contains_degree(&t.weight(m))
    });
    let mut groups: BTreeMap<Key, Vec<Mono>> = BTreeMap::new();
    for m in monos {
        groups.entry(model.key(&lift(&m))).or_default().push(m);
    }
    let all = enumerate_monomials(t, res.band.budget, 0, 0, &|_| true);
    let mut out = BTreeMap::new();
    for (key, ms) in groups {
        let idx: HashMap<&Mono, usize> = ms.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut span = Echelon::new();
        for g in ideal {
            for m in &all {
                let p = t.mul(&Poly::monomial(m.clone(), Rat::one()), g);
                let mut v: SparseVec = Vec::new();
                let mut inside = true;
                for (mm, c) in p.iter() {
                    match idx.get(mm) {
                        Some(&i) => v.push((i, c.clone())),
                        None => inside = false,
                    }
                }
                if inside && !v.is_empty() {
                    v.sort_by_key(|x| x.0);
                    span.insert(v);
                }
            }
        }
        out.insert(key, ms.len() - span.rank());
    }
    out
}

/// The resolution `K` of `Q(R)` together with its augmentation.
#[derive(Clone, Debug)]
pub struct KResolution {
    pub q: Arc<KernelAlgebra>,
    pub presentation: ResolutionPresentation,
    /// Indices in `K` of the two copies of the base generators.
    pub copy1: Vec<usize>,
    pub copy2: Vec<usize>,
    pub u: usize,
    /// `κ`, `μ`, `λ`, `ν` by base generator index.
    pub extra: BTreeMap<usize, usize>,
    /// `K -> Q`: copy 1 through `p`, copy 2 through `s`, `u ↦ u`, rest ↦ 0.
    pub augmentation: AlgMap,
}

impl KResolution {
    pub fn alg(&self) -> &Arc<Algebra> {
        &self.presentation.alg
    }

    /// Counts of adjoined `(κ, λ, μ, ν)`.
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        let r = &self.q.base;
        let mut c = (0, 0, 0, 0);
        for &i in self.extra.keys() {
            let v = r.var(i);
            match (v.hdeg == 0, v.weight[0] >= 0) {
                (true, true) => c.0 += 1,
                (false, true) => c.1 += 1,
                (true, false) => c.2 += 1,
                (false, false) => c.3 += 1,
            }
        }
        c
    }
}

fn polynomial_base(r: &Algebra) -> Result<(), ResolutionError> {
    check_base(r)?;
    Ok(())
}

struct KBuilder<'a> {
    r: &'a Algebra,
    nk: usize,
    copy1: Vec<usize>,
    copy2: Vec<usize>,
    u: usize,
    extra: BTreeMap<usize, usize>,
}

impl KBuilder<'_> {
    fn mono(&self, parts: &[(usize, i32)]) -> Poly {
        let mut e = vec![0i32; self.nk];
        for &(i, k) in parts {
            e[i] += k;
        }
        Poly::monomial(Mono::from_vec(e), Rat::one())
    }

    /// Base monomial `m` of `R` as the factor list `[(var, multiplicity)]`.
    fn factors(&self, m: &Mono, positive: bool) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &e) in m.exps().iter().enumerate() {
            if e > 0 && (self.r.var(i).weight[0] > 0) == positive {
                out.extend(std::iter::repeat(i).take(e as usize));
            }
        }
        out
    }

    /// `T_X` with `d T_X = ∏ X₂ - ∏ u^{a} X₁` over the factor list.
    fn telescope_x(&self, xs: &[usize]) -> Poly {
        let mut out = Poly::zero();
        for j in 0..xs.len() {
            let mut parts = Vec::new();
            for &x in &xs[..j] {
                parts.push((self.copy1[x], 1));
                parts.push((self.u, self.r.var(x).weight[0] as i32));
            }
            parts.push((self.extra[&xs[j]], 1));
            for &x in &xs[j + 1..] {
                parts.push((self.copy2[x], 1));
            }
            out.add_assign(&self.mono(&parts));
        }
        out
    }

    /// `T_Y` with `d T_Y = ∏ Y₁ - ∏ u^{-b} Y₂`.
    fn telescope_y(&self, ys: &[usize]) -> Poly {
        let mut out = Poly::zero();
        for j in 0..ys.len() {
            let mut parts = Vec::new();
            for &y in &ys[..j] {
                parts.push((self.copy1[y], 1));
            }
            parts.push((self.extra[&ys[j]], 1));
            for &y in &ys[j + 1..] {
                parts.push((self.copy2[y], 1));
                parts.push((self.u, -self.r.var(y).weight[0] as i32));
            }
            out.add_assign(&self.mono(&parts));
        }
        out
    }

    /// Base monomial of `R` placed in copy 1 or 2 of `K`.
    fn copy_of(&self, m: &Mono, second: bool) -> Poly {
        let parts: Vec<(usize, i32)> = m
            .exps()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, &e)| (if second { self.copy2[i] } else { self.copy1[i] }, e))
            .collect();
        self.mono(&parts)
    }

    /// Correction for a generator whose differential lies in the base ring.
    fn telescoped_correction(&self, k: &Algebra, g: usize) -> Poly {
        let upper = self.r.var(g).weight[0] >= 0;
        let mut out = Poly::zero();
        for (m, c) in self.r.diff_of(g).iter() {
            let xs = self.factors(m, true);
            let ys = self.factors(m, false);
            let a: i64 = xs.iter().map(|&x| self.r.var(x).weight[0]).sum();
            let b: i64 = ys.iter().map(|&y| self.r.var(y).weight[0]).sum();
            let xm = Mono::from_vec(self.factor_exps(&xs));
            let ym = Mono::from_vec(self.factor_exps(&ys));
            let tx = self.telescope_x(&xs);
            let ty = self.telescope_y(&ys);
            let term = if upper {
                // (X₂ - u^A X₁) Y₂ + u^{A+B} X₁ (u^{-B} Y₂ - Y₁)
                let first = k.mul(&tx, &self.copy_of(&ym, true));
                let second = k.mul(
                    &k.mul(
                        &self.mono(&[(self.u, (a + b) as i32)]),
                        &self.copy_of(&xm, false),
                    ),
                    &ty,
                );
                first.sub(&second)
            } else {
                // X₁ (Y₁ - u^{-B} Y₂) + u^{-A-B} Y₂ (u^A X₁ - X₂)
                let first = k.mul(&self.copy_of(&xm, false), &ty);
                let second = k.mul(
                    &k.mul(
                        &self.mono(&[(self.u, (-a - b) as i32)]),
                        &self.copy_of(&ym, true),
                    ),
                    &tx,
                );
                first.sub(&second)
            };
            out.add_assign(&term.scale(c));
        }
        out
    }

    fn factor_exps(&self, fs: &[usize]) -> Vec<i32> {
        let mut e = vec![0i32; self.r.nvars()];
        for &f in fs {
            e[f] += 1;
        }
        e
    }
}

/// Solves `d c = target` over monomials of `k` avoiding the listed
/// variables, containing at least one of `ideal_vars`, growing the size
/// bound until a solution appears.
fn solve_correction(
    k: &Arc<Algebra>,
    target: &Poly,
    avoid: &BTreeSet<usize>,
    ideal_vars: &BTreeSet<usize>,
) -> Option<Poly> {
    let (m0, _) = target.iter().next()?;
    let w = k.weight(m0);
    let h = k.hdeg(m0) - 1;
    let size = target.iter().map(|(m, _)| m.size()).max().unwrap_or(0);
    for budget in size + 1..=size + 4 {
        let cands = enumerate_monomials(k, budget, h, h, &|m| {
            k.weight(m) == w
                && m.exps()
                    .iter()
                    .enumerate()
                    .all(|(i, &e)| e == 0 || !avoid.contains(&i))
                && ideal_vars.iter().any(|&i| m.exps()[i] != 0)
        });
        if cands.is_empty() {
            continue;
        }
        let images: Vec<Poly> = cands
            .iter()
            .map(|m| k.d(&Poly::monomial(m.clone(), Rat::one())))
            .collect();
        let mut rows_idx: BTreeMap<Mono, usize> = BTreeMap::new();
        for p in images.iter().chain([target]) {
            for (m, _) in p.iter() {
                let l = rows_idx.len();
                rows_idx.entry(m.clone()).or_insert(l);
            }
        }
        let mut a = vec![vec![Rat::zero(); cands.len()]; rows_idx.len()];
        for (j, p) in images.iter().enumerate() {
            for (m, c) in p.iter() {
                a[rows_idx[m]][j] = c.clone();
            }
        }
        let mut b = vec![Rat::zero(); rows_idx.len()];
        for (m, c) in target.iter() {
            b[rows_idx[m]] = c.clone();
        }
        if let Some(x) = solve(&a, &b) {
            return Some(Poly::from_terms(
                cands.into_iter().zip(x).filter(|(_, c)| !c.is_zero()),
            ));
        }
    }
    None
}

fn build_k_only(q: &Arc<KernelAlgebra>) -> Result<KResolution, ResolutionError> {
    let r = &q.base;
    polynomial_base(r)?;
    let n = r.nvars();
    let mut taken: HashSet<String> = HashSet::new();
    let mut vars = Vec::new();
    let mut copy1 = Vec::new();
    let mut copy2 = Vec::new();
    for (suffix, copy) in [("_1", &mut copy1), ("_2", &mut copy2)] {
        for v in r.vars() {
            let name = fresh_name(&taken, format!("{}{suffix}", v.name));
            taken.insert(name.clone());
            let w = if suffix == "_1" {
                vec![v.weight[0], 0]
            } else {
                vec![0, v.weight[0]]
            };
            copy.push(vars.len());
            vars.push(VariableDecl::new(name, w, v.hdeg));
        }
    }
    let u = vars.len();
    let uname = fresh_name(&taken, "u".into());
    taken.insert(uname.clone());
    vars.push(VariableDecl::new(uname, vec![-1, 1], 0));
    let mut extra = BTreeMap::new();
    // κ, μ for base variables, then λ/ν for dg generators by decreasing hdeg
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (-r.var(i).hdeg, i));
    for &i in &order {
        let v = r.var(i);
        let w = v.weight[0];
        let (prefix, weight) = match (v.hdeg == 0, w >= 0) {
            (true, true) => ("kappa_", vec![0, w]),
            (true, false) => ("mu_", vec![w, 0]),
            (false, true) => ("lambda_", vec![0, w]),
            (false, false) => ("nu_", vec![w, 0]),
        };
        let name = fresh_name(&taken, format!("{prefix}{}", v.name));
        taken.insert(name.clone());
        extra.insert(i, vars.len());
        vars.push(VariableDecl::new(name, weight, v.hdeg - 1));
    }
    let nk = vars.len();
    let b = KBuilder {
        r,
        nk,
        copy1: copy1.clone(),
        copy2: copy2.clone(),
        u,
        extra: extra.clone(),
    };
    let copy_poly = |p: &Poly, second: bool| -> Poly {
        let mut out = Poly::zero();
        for (m, c) in p.iter() {
            out.add_assign(&b.copy_of(m, second).scale(c));
        }
        out
    };
    let mut diffs = vec![Poly::zero(); nk];
    for i in 0..n {
        diffs[copy1[i]] = copy_poly(r.diff_of(i), false);
        diffs[copy2[i]] = copy_poly(r.diff_of(i), true);
    }
    let ideal_vars: BTreeSet<usize> = extra.values().copied().collect();
    let mut done: BTreeSet<usize> = BTreeSet::new();
    for &i in &order {
        let v = r.var(i);
        let w = v.weight[0] as i32;
        let upper = w >= 0;
        let main = if upper {
            b.mono(&[(copy2[i], 1)])
                .sub(&b.mono(&[(u, w), (copy1[i], 1)]))
        } else {
            b.mono(&[(copy1[i], 1)])
                .sub(&b.mono(&[(u, -w), (copy2[i], 1)]))
        };
        let bare = Algebra::from_parts(2, vars.clone(), diffs.clone(), &BTreeSet::new())?;
        let correction = if v.hdeg == 0 {
            Poly::zero()
        } else if r.diff_of(i).iter().all(|(m, _)| r.hdeg(m) == 0) {
            b.telescoped_correction(&bare, i)
        } else {
            let target = bare.d(&main);
            let avoid: BTreeSet<usize> = ideal_vars.difference(&done).copied().collect();
            solve_correction(&bare, &target, &avoid, &ideal_vars)
                .ok_or_else(|| ResolutionError::CorrectionNotFound(v.name.clone()))?
        };
        diffs[extra[&i]] = main.sub(&correction);
        done.insert(extra[&i]);
    }
    let k = Algebra::from_parts(2, vars, diffs, &BTreeSet::new())?;
    let nq = q.alg.nvars();
    let mut imgs = vec![Poly::zero(); nk];
    for i in 0..n {
        imgs[copy1[i]] = q.p.image(i).clone();
        imgs[copy2[i]] = q.s.image(i).clone();
    }
    imgs[u] = var_poly(nq, q.u);
    let augmentation = AlgMap::new(&k, &q.alg, imgs)?;
    augmentation.check_chain_map()?;
    let presentation = ResolutionPresentation {
        base: Arc::clone(r),
        adjoined: extra.values().copied().collect(),
        alg: k,
        band: TruncationBox::default_for(2),
    };
    Ok(KResolution {
        q: Arc::clone(q),
        presentation,
        copy1,
        copy2,
        u,
        extra,
        augmentation,
    })
}

/// Builds `K` and checks its augmentation to `Q` piecewise on the box.
pub fn resolution_k(
    q: &Arc<KernelAlgebra>,
    bx: &TruncationBox,
) -> Result<(KResolution, QuasiIsoReport), ResolutionError> {
    let mut k = build_k_only(q)?;
    k.presentation.band = bx.clone();
    let src = AlgebraModel::new(k.alg(), bx);
    let tgt = AlgebraModel::new(&q.alg, bx);
    let rep = compare_models(&k.augmentation, &src, &tgt)?;
    Ok((k, rep))
}

/// `K ⊗ Q'` (copy 2 of `K` glued to `Q'` through `p`), trigraded, with the
/// comparison map `ρ` to `Q`.
#[derive(Clone, Debug)]
pub struct SelfTensor {
    pub alg: Arc<Algebra>,
    pub rho: AlgMap,
}

pub fn self_tensor(k: &KResolution) -> Result<SelfTensor, ResolutionError> {
    let q = &k.q;
    let r = &q.base;
    let kalg = k.alg();
    let n = r.nvars();
    let nq = q.alg.nvars();
    let copy2: BTreeSet<usize> = k.copy2.iter().copied().collect();
    // K variables that survive, then Q' variables
    let kept: Vec<usize> = (0..kalg.nvars()).filter(|i| !copy2.contains(i)).collect();
    let mut taken: HashSet<String> = HashSet::new();
    let mut vars = Vec::new();
    let mut kpos = HashMap::new();
    for &i in &kept {
        let v = kalg.var(i);
        kpos.insert(i, vars.len());
        taken.insert(v.name.clone());
        // K bidegree (a, b) sits on factors 1 and 2
        vars.push(VariableDecl::new(
            v.name.clone(),
            vec![v.weight[0], v.weight[1], 0],
            v.hdeg,
        ));
    }
    let qoff = vars.len();
    for v in q.alg.vars() {
        let name = fresh_name(&taken, format!("{}'", v.name));
        taken.insert(name.clone());
        vars.push(VariableDecl::new(
            name,
            vec![0, v.weight[0], v.weight[1]],
            v.hdeg,
        ));
    }
    let total = vars.len();
    let shift_q = |p: &Poly| -> Poly {
        Poly::from_terms(p.iter().map(|(m, c)| {
            let mut e = vec![0i32; total];
            e[qoff..].copy_from_slice(m.exps());
            (Mono::from_vec(e), c.clone())
        }))
    };
    let bare = Algebra::from_parts(3, vars.clone(), vec![Poly::zero(); total], &BTreeSet::new())?;
    let mut subst = vec![Poly::zero(); kalg.nvars()];
    for &i in &kept {
        subst[i] = var_poly(total, kpos[&i]);
    }
    for j in 0..n {
        subst[k.copy2[j]] = shift_q(q.p.image(j));
    }
    let glue = AlgMap::new(kalg, &bare, subst)?;
    let mut diffs = Vec::with_capacity(total);
    for &i in &kept {
        diffs.push(glue.apply(kalg.diff_of(i)));
    }
    for j in 0..nq {
        diffs.push(shift_q(q.alg.diff_of(j)));
    }
    let alg = Algebra::from_parts(3, vars, diffs, &BTreeSet::new())?;
    // ρ: copy 1 through p, u ↦ u, κλμν ↦ 0, Q' through s on partners, v ↦ 1
    let mut imgs = vec![Poly::zero(); total];
    for j in 0..n {
        imgs[kpos[&k.copy1[j]]] = q.p.image(j).clone();
    }
    imgs[kpos[&k.u]] = var_poly(nq, q.u);
    for j in 0..n {
        // Q' generator standing for base generator j goes where s sends j
        let partner = q.alg.var_index(q.partner(j)).expect("partner exists");
        imgs[qoff + partner] = q.s.image(j).clone();
    }
    imgs[qoff + q.u] = q.alg.one();
    let rho = AlgMap::new(&alg, &q.alg, imgs)?;
    rho.check_chain_map()?;
    Ok(SelfTensor { alg, rho })
}

#[derive(Clone, Debug)]
pub struct PropertyPReport {
    pub generators: (usize, usize, usize, usize),
    /// Homology degrees of certified nonzero pieces of `(K ⊗ Q)₀`.
    pub tensor_degrees: BTreeSet<i64>,
    /// Homology degrees of certified nonzero pieces of `Q`.
    pub kernel_degrees: BTreeSet<i64>,
    pub rho: QuasiIsoReport,
    pub verdict: Verdict,
}

fn nonzero_degrees(pieces: &[PieceHomology]) -> BTreeSet<i64> {
    pieces
        .iter()
        .filter(|p| p.certified)
        .flat_map(|p| p.homology.iter().filter(|(_, &h)| h > 0).map(|(&k, _)| k))
        .collect()
}

/// `(K ⊗ Q)` in middle degree 0 against `Q` through `ρ`, piece by piece.
pub fn check_property_p(
    r: &Arc<Algebra>,
    bx: &TruncationBox,
) -> Result<PropertyPReport, ResolutionError> {
    polynomial_base(r)?;
    let q = Arc::new(build_q(r)?);
    let k = build_k_only(&q)?;
    let st = self_tensor(&k)?;
    let bx2 = if bx.degree_range.len() == 2 {
        bx.clone()
    } else {
        TruncationBox::uniform(
            2,
            bx.budget,
            bx.hmin,
            bx.degree_range[0].0,
            bx.degree_range[0].1,
        )
    };
    let a = Arc::clone(&st.alg);
    let range = bx2.clone();
    let src = AlgebraModel::with_filter(
        &st.alg,
        bx.budget,
        bx.hmin,
        0,
        Box::new(move |m| {
            let w = a.weight(m);
            w[1] == 0 && range.contains_degree(&[w[0], w[2]])
        }),
    )
    .with_pins(vec![(1, 0)]);
    let tgt = AlgebraModel::new(&q.alg, &bx2);
    let (psi, scale) = pullback_key(&st.rho, &tgt.grading)?;
    let rho = &st.rho;
    let pins = src.pins.clone();
    let cone = Cone {
        src: &src,
        tgt: &tgt,
        map: Box::new(|m: &Mono| {
            rho.apply_mono(m)
                .iter()
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect()
        }),
        src_key: Box::new(move |m: &Mono| key_of(&psi, m)),
        tgt_scale: scale,
        map_preimages: Box::new(move |t: &Mono| rho.monomial_preimages(t, &pins)),
    };
    let report = summarize(analyze(&cone, bx.hmin, 0));
    let tensor_degrees = nonzero_degrees(&analyze(&src, bx.hmin, 0));
    let kernel_degrees = nonzero_degrees(&analyze(&tgt, bx.hmin, 0));
    let concentrated = tensor_degrees.is_subset(&kernel_degrees);
    let verdict = report.verdict.and(Verdict::from_bool(concentrated));
    Ok(PropertyPReport {
        generators: k.counts(),
        tensor_degrees,
        kernel_degrees,
        rho: report,
        verdict,
    })
}
