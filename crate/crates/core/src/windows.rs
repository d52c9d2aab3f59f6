//! Window bookkeeping: `μ±`, generator-weight hypotheses, the vanishing
//! that drives the semiorthogonal decomposition, and the endomorphism ring
//! of the extra pieces.

use crate::algebra::{Algebra, AlgebraError, Poly, VariableDecl};
use crate::chain::{analyze, PieceHomology};
use crate::complexes::{AlgebraModel, Verdict};
use crate::mono::Mono;
use crate::pushforward::reverse_weights;
use crate::resolutions::{koszul_complex, ResolutionError};
use crate::slices::TruncationBox;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowError {
    #[error("window bookkeeping needs a single G_m weight, got {0} components")]
    MultiComponent(usize),
    #[error("window [{a}, {b}] holds {span} twists, fewer than mu_plus = {mu_plus}")]
    RangeTooShort {
        a: i64,
        b: i64,
        span: i64,
        mu_plus: i64,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
}

/// `(μ₊, μ₋)`: sums of the positive and of the negative base weights.
pub fn mu_of(r: &Algebra) -> (i64, i64) {
    let mut plus = 0;
    let mut minus = 0;
    for v in r.vars().iter().filter(|v| v.hdeg == 0) {
        let w = v.weight[0];
        if w > 0 {
            plus += w;
        } else {
            minus += w;
        }
    }
    (plus, minus)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuReport {
    pub positive: Vec<(String, i64)>,
    pub negative: Vec<(String, i64)>,
    pub mu_plus: i64,
    pub mu_minus: i64,
}

impl MuReport {
    pub fn calabi_yau(&self) -> bool {
        self.mu_plus + self.mu_minus == 0
    }
}

pub fn compute_mu(r: &Algebra) -> Result<MuReport, WindowError> {
    if r.arity() != 1 {
        return Err(WindowError::MultiComponent(r.arity()));
    }
    let (mu_plus, mu_minus) = mu_of(r);
    let pick = |pos: bool| {
        r.vars()
            .iter()
            .filter(|v| v.hdeg == 0 && (v.weight[0] > 0) == pos)
            .map(|v| (v.name.clone(), v.weight[0]))
            .collect()
    };
    Ok(MuReport {
        positive: pick(true),
        negative: pick(false),
        mu_plus,
        mu_minus,
    })
}

/// Hypothesis on dg generator weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    /// All generators of weight ≤ 0.
    Plus,
    /// All generators of weight ≥ 0.
    Minus,
    /// All generators of weight 0.
    WallCross,
}

/// Names of the dg generators violating the hypothesis.
pub fn check_generator_weights(r: &Algebra, mode: WeightMode) -> Vec<String> {
    r.vars()
        .iter()
        .filter(|v| v.hdeg < 0)
        .filter(|v| {
            let w = v.weight[0];
            match mode {
                WeightMode::Plus => w > 0,
                WeightMode::Minus => w < 0,
                WeightMode::WallCross => w != 0,
            }
        })
        .map(|v| v.name.clone())
        .collect()
}

/// `R / (vars)` for base variables with zero differential: the named
/// variables are dropped along with every differential term containing
/// them.  `R` is free over the base ring, so this is also the derived
/// quotient by a regular sequence of base variables.
pub fn quotient_by(r: &Algebra, drop: &BTreeSet<usize>) -> Result<Arc<Algebra>, AlgebraError> {
    let keep: Vec<usize> = (0..r.nvars()).filter(|i| !drop.contains(i)).collect();
    let vars: Vec<VariableDecl> = keep.iter().map(|&i| r.var(i).clone()).collect();
    let diffs = keep
        .iter()
        .map(|&i| {
            let mut p = Poly::zero();
            for (m, c) in r.diff_of(i).iter() {
                if drop.iter().all(|&j| m.exps()[j] == 0) {
                    p.add_term(
                        Mono::from_vec(keep.iter().map(|&j| m.exps()[j]).collect()),
                        c.clone(),
                    );
                }
            }
            p
        })
        .collect();
    let inv: BTreeSet<String> = r
        .inverted_names()
        .into_iter()
        .filter(|n| !drop.contains(&r.var_index(n).unwrap()))
        .collect();
    Algebra::from_parts(r.arity(), vars, diffs, &inv)
}

fn base_vars(r: &Algebra, positive: bool) -> BTreeSet<usize> {
    (0..r.nvars())
        .filter(|&i| r.var(i).hdeg == 0 && (r.var(i).weight[0] > 0) == positive)
        .collect()
}

/// Homology of one internal-degree slice of an algebra, over all pieces.
#[derive(Clone, Debug)]
pub struct SliceHomology {
    pub degree: i64,
    /// The slice is empty for weight reasons, in every budget.
    pub provably_empty: bool,
    pub pieces: Vec<PieceHomology>,
}

impl SliceHomology {
    /// Homology dimension per hdeg summed over certified pieces.
    pub fn certified_dims(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for p in self.pieces.iter().filter(|p| p.certified) {
            for (&k, &h) in &p.homology {
                *out.entry(k).or_insert(0) += h;
            }
        }
        out
    }

    pub fn all_certified(&self) -> bool {
        self.pieces.iter().all(|p| p.certified)
    }

    pub fn vanishing_verdict(&self) -> Verdict {
        if self.provably_empty {
            return Verdict::Pass;
        }
        if self.pieces.iter().any(|p| p.certified && !p.is_acyclic()) {
            Verdict::Fail
        } else if self.pieces.iter().any(|p| p.certified) {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Homology of the internal-degree-`n` slice of a single-weight algebra.
pub fn slice_homology(alg: &Arc<Algebra>, n: i64, bx: &TruncationBox) -> SliceHomology {
    let signs: Vec<i64> = alg
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.weight[0] != 0)
        .map(|(i, v)| {
            if alg.is_inverted(i) {
                0
            } else {
                v.weight[0].signum()
            }
        })
        .collect();
    let provably_empty =
        (n > 0 && signs.iter().all(|&s| s == -1)) || (n < 0 && signs.iter().all(|&s| s == 1));
    if provably_empty {
        return SliceHomology {
            degree: n,
            provably_empty,
            pieces: Vec::new(),
        };
    }
    let a = Arc::clone(alg);
    let model = AlgebraModel::with_filter(
        alg,
        bx.budget,
        bx.hmin,
        0,
        Box::new(move |m| a.weight(m)[0] == n),
    );
    let pieces = analyze(&model, bx.hmin, 0);
    SliceHomology {
        degree: n,
        provably_empty,
        pieces,
    }
}

#[derive(Clone, Debug)]
pub struct VanishingEntry {
    pub twist: i64,
    pub slice: SliceHomology,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct SodVanishingReport {
    pub a: i64,
    pub b: i64,
    /// `RHom(R(i), R/x(b+1)) = (R/x)_{b+1-i}` for each `i` in `[a, b]`.
    pub entries: Vec<VanishingEntry>,
    /// Probe at `i = b + 1`: the degree-0 slice, expected nonzero.
    pub probe: SliceHomology,
    pub probe_nonzero: bool,
    pub verdict: Verdict,
}

/// Checks `RHom(R(i), R/x(b+1)) = (R/x)_{b+1-i} = 0` for `i ∈ [a, b]`,
/// with `R/x` modeled by the Koszul complex of the positive variables
/// tensored into `R`, and that it fails one step further (`i = b + 1`).
/// The window `[a, b]` must hold at least `μ₊` twists.
pub fn sod_vanishing(
    r: &Arc<Algebra>,
    a: i64,
    b: i64,
    bx: &TruncationBox,
) -> Result<SodVanishingReport, WindowError> {
    let mu = compute_mu(r)?;
    if b - a + 1 < mu.mu_plus {
        return Err(WindowError::RangeTooShort {
            a,
            b,
            span: b - a + 1,
            mu_plus: mu.mu_plus,
        });
    }
    let xs: Vec<Poly> = base_vars(r, true).into_iter().map(|i| r.gen(i)).collect();
    let rx = koszul_complex(r, &xs, 0)?.alg;
    let entries: Vec<VanishingEntry> = (a..=b)
        .map(|i| {
            let slice = slice_homology(&rx, b + 1 - i, bx);
            let verdict = slice.vanishing_verdict();
            VanishingEntry {
                twist: i,
                slice,
                verdict,
            }
        })
        .collect();
    let probe = slice_homology(&rx, 0, bx);
    let probe_nonzero = probe.certified_dims().values().any(|&h| h > 0);
    let verdict =
        Verdict::all(entries.iter().map(|e| e.verdict)).and(Verdict::from_bool(probe_nonzero));
    Ok(SodVanishingReport {
        a,
        b,
        entries,
        probe,
        probe_nonzero,
        verdict,
    })
}

#[derive(Clone, Debug)]
pub struct EndoRingReport {
    /// Homology per hdeg of the Hom carrier in internal degree 0.
    pub carrier: BTreeMap<i64, usize>,
    /// Homology per hdeg of the invariant ring `R / (x, y)`.
    pub invariant: BTreeMap<i64, usize>,
    pub certified: bool,
    pub verdict: Verdict,
}

impl EndoRingReport {
    pub fn dims(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.invariant.iter().rev().map(|(_, &d)| d).collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }
}

/// `RHom(R/x, R/x)` in internal degree 0, computed from the carrier
/// `Λ•(⊕ k(a_i)) ⊗ R/x` (the Koszul differential vanishes on `R/x`, so it
/// splits over exterior monomials `θ_S`, each contributing the slice of
/// `R/x` of degree `a_S` shifted up by `|S|`), compared with `R/(x, y)`.
pub fn endo_ring(r: &Arc<Algebra>, bx: &TruncationBox) -> Result<EndoRingReport, WindowError> {
    compute_mu(r)?;
    let pos = base_vars(r, true);
    let rx = quotient_by(r, &pos)?;
    let weights: Vec<i64> = pos.iter().map(|&i| r.var(i).weight[0]).collect();
    let mut carrier: BTreeMap<i64, usize> = BTreeMap::new();
    let mut certified = true;
    for h in bx.hmin..=0 {
        carrier.insert(h, 0);
    }
    for mask in 0u32..(1 << weights.len()) {
        let shift = mask.count_ones() as i64;
        let a_s: i64 = (0..weights.len())
            .filter(|j| mask & (1 << j) != 0)
            .map(|j| weights[j])
            .sum();
        let sl = slice_homology(&rx, a_s, bx);
        if sl.provably_empty {
            continue;
        }
        certified &= sl.all_certified() && !sl.pieces.is_empty();
        for (h, d) in sl.certified_dims() {
            *carrier.entry(h + shift).or_insert(0) += d;
        }
    }
    let mut both = base_vars(r, true);
    both.extend(base_vars(r, false));
    let inv_alg = quotient_by(r, &both)?;
    let sl = slice_homology(&inv_alg, 0, bx);
    certified &= sl.all_certified() && !sl.pieces.is_empty();
    let mut invariant: BTreeMap<i64, usize> = (bx.hmin..=0).map(|h| (h, 0)).collect();
    for (h, d) in sl.certified_dims() {
        *invariant.entry(h).or_insert(0) += d;
    }
    let verdict = if carrier != invariant {
        Verdict::Fail
    } else if certified {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    Ok(EndoRingReport {
        carrier,
        invariant,
        certified,
        verdict,
    })
}

/// Which side receives the extra copies of `Perf(R^{G_m})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SodShape {
    /// `μ₊ + μ₋ = 0`: the two sides are equivalent.
    Equivalence,
    /// Copies on the `+` side.
    PlusBigger,
    /// Copies on the `-` side.
    MinusBigger,
}

#[derive(Clone, Debug)]
pub struct SodReport {
    pub mu: MuReport,
    pub shape: SodShape,
    /// Twists of the copies `R/x(j)` (negative for the `-` side), outermost first.
    pub twists: Vec<i64>,
    /// Twist of the wall-crossing functor `- ⊗ R(μ₊ - 1)`.
    pub functor_twist: i64,
    pub twist_note: String,
    pub violations: Vec<String>,
    pub steps: Vec<SodVanishingReport>,
    pub endo: Option<EndoRingReport>,
    pub verdict: Verdict,
}

/// Shape of the wall-crossing decomposition with its supporting checks.
pub fn sod_report(r: &Arc<Algebra>, bx: &TruncationBox) -> Result<SodReport, WindowError> {
    let mu = compute_mu(r)?;
    let violations = check_generator_weights(r, WeightMode::WallCross);
    let total = mu.mu_plus + mu.mu_minus;
    let (shape, work) = match total.signum() {
        0 => (SodShape::Equivalence, Arc::clone(r)),
        1 => (SodShape::PlusBigger, Arc::clone(r)),
        _ => (SodShape::MinusBigger, reverse_weights(r)?),
    };
    let count = total.abs();
    let sign = if shape == SodShape::MinusBigger {
        -1
    } else {
        1
    };
    let twists: Vec<i64> = (1..=count).rev().map(|j| sign * j).collect();
    let wmu = compute_mu(&work)?;
    let mut steps = Vec::new();
    for j in 1..=count {
        let b = j - 1;
        steps.push(sod_vanishing(&work, b - wmu.mu_plus + 1, b, bx)?);
    }
    let endo = if count > 0 {
        Some(endo_ring(&work, bx)?)
    } else {
        None
    };
    let mut verdict = Verdict::from_bool(violations.is_empty());
    verdict = verdict.and(Verdict::all(steps.iter().map(|s| s.verdict)));
    if let Some(e) = &endo {
        verdict = verdict.and(e.verdict);
    }
    let twist_note = format!(
        "wall-crossing functor uses - ⊗ R({}) (μ₊ - 1); the alternative convention O(-μ₊ - 1) = O({}) also circulates and is flagged, not used",
        mu.mu_plus - 1,
        -mu.mu_plus - 1
    );
    Ok(SodReport {
        functor_twist: mu.mu_plus - 1,
        mu,
        shape,
        twists,
        twist_note,
        violations,
        steps,
        endo,
        verdict,
    })
}

impl fmt::Display for SodReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "mu_plus = {}, mu_minus = {}",
            self.mu.mu_plus, self.mu.mu_minus
        )?;
        match self.shape {
            SodShape::Equivalence => {
                writeln!(f, "shape: equivalence (Calabi-Yau), no extra copies")?
            }
            SodShape::PlusBigger => writeln!(
                f,
                "shape: {} copies of Perf(R^Gm) on the + side",
                self.twists.len()
            )?,
            SodShape::MinusBigger => writeln!(
                f,
                "shape: {} copies of Perf(R^Gm) on the - side",
                self.twists.len()
            )?,
        }
        if !self.twists.is_empty() {
            let t: Vec<String> = self.twists.iter().map(|t| t.to_string()).collect();
            writeln!(f, "twists: {}", t.join(", "))?;
        }
        writeln!(f, "{}", self.twist_note)?;
        if !self.violations.is_empty() {
            writeln!(f, "hypothesis violated by: {}", self.violations.join(", "))?;
        }
        writeln!(f, "verdict: {}", self.verdict)
    }
}
