//! Finite monomial bases of graded slices and exact matrices between them.

use crate::algebra::{Algebra, Poly, Rat};
use crate::linalg::DenseMatrix;
use crate::mono::Mono;
use num_traits::Zero;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SliceError {
    #[error(
        "action of degree ({weight:?}, {hdeg}) does not map the source slice to the target slice"
    )]
    DegreeIncompatible { weight: Vec<i64>, hdeg: i64 },
    #[error("invalid truncation box: {0}")]
    InvalidBox(String),
    #[error("source and target slices live in different algebras")]
    AlgebraMismatch,
}

/// Finite window on an infinite graded algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncationBox {
    /// Maximal sum of absolute exponents of a monomial.
    pub budget: u32,
    /// Lowest homological degree considered (the window is `[hmin, 0]`).
    pub hmin: i64,
    /// Inclusive interval per internal grading coordinate.
    pub degree_range: Vec<(i64, i64)>,
}

impl TruncationBox {
    pub fn new(budget: u32, hmin: i64, degree_range: Vec<(i64, i64)>) -> Result<Self, SliceError> {
        if hmin > 0 {
            return Err(SliceError::InvalidBox(format!("hmin = {hmin} must be ≤ 0")));
        }
        if let Some((lo, hi)) = degree_range.iter().find(|(lo, hi)| lo > hi) {
            return Err(SliceError::InvalidBox(format!(
                "empty degree interval [{lo}, {hi}]"
            )));
        }
        Ok(TruncationBox {
            budget,
            hmin,
            degree_range,
        })
    }

    /// Same interval `[lo, hi]` on each of `arity` coordinates.
    pub fn uniform(arity: usize, budget: u32, hmin: i64, lo: i64, hi: i64) -> Self {
        TruncationBox {
            budget,
            hmin,
            degree_range: vec![(lo, hi); arity],
        }
    }

    /// Default box: budget 8, hmin −4, degrees within ±4.
    pub fn default_for(arity: usize) -> Self {
        Self::uniform(arity, 8, -4, -4, 4)
    }

    pub fn contains_degree(&self, w: &[i64]) -> bool {
        w.iter()
            .zip(&self.degree_range)
            .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    pub fn with_budget(&self, budget: u32) -> Self {
        TruncationBox {
            budget,
            ..self.clone()
        }
    }
}

/// All monomials of `alg` with size ≤ `budget`, hdeg in `[hmin, hmax]`,
/// accepted by `keep`.  Output is sorted in the monomial order.
pub fn enumerate_monomials(
    alg: &Algebra,
    budget: u32,
    hmin: i64,
    hmax: i64,
    keep: &dyn Fn(&Mono) -> bool,
) -> Vec<Mono> {
    let n = alg.nvars();
    let mut out = Vec::new();
    let mut cur = vec![0i32; n];
    fn rec(
        alg: &Algebra,
        i: usize,
        left: u32,
        h: i64,
        hmin: i64,
        hmax: i64,
        cur: &mut Vec<i32>,
        keep: &dyn Fn(&Mono) -> bool,
        out: &mut Vec<Mono>,
    ) {
        if i == alg.nvars() {
            if h <= hmax {
                let m = Mono::from_vec(cur.clone());
                if keep(&m) {
                    out.push(m);
                }
            }
            return;
        }
        let v = alg.var(i);
        let max = if alg.is_odd(i) { left.min(1) } else { left } as i32;
        let min = if alg.is_inverted(i) {
            -(left as i32)
        } else {
            0
        };
        for e in min..=max {
            let h2 = h + e as i64 * v.hdeg;
            if h2 < hmin {
                break;
            }
            cur[i] = e;
            rec(
                alg,
                i + 1,
                left - e.unsigned_abs(),
                h2,
                hmin,
                hmax,
                cur,
                keep,
                out,
            );
        }
        cur[i] = 0;
    }
    rec(alg, 0, budget, 0, hmin, hmax, &mut cur, keep, &mut out);
    out.sort();
    out
}

/// Ordered monomial basis of one slice under a truncation box.
#[derive(Clone, Debug)]
pub struct SliceBasis {
    pub alg: Arc<Algebra>,
    pub multidegree: Vec<i64>,
    pub hdeg: i64,
    pub budget: u32,
    pub monomials: Vec<Mono>,
}

impl SliceBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index(&self) -> HashMap<&Mono, usize> {
        self.monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.monomials
            .iter()
            .map(|m| self.alg.format_mono(m))
            .collect()
    }
}

pub fn enumerate_basis(
    alg: &Arc<Algebra>,
    multidegree: &[i64],
    hdeg: i64,
    bx: &TruncationBox,
) -> SliceBasis {
    let monomials = enumerate_monomials(alg, bx.budget, hdeg, hdeg, &|m| {
        alg.weight(m) == multidegree
    });
    SliceBasis {
        alg: Arc::clone(alg),
        multidegree: multidegree.to_vec(),
        hdeg,
        budget: bx.budget,
        monomials,
    }
}

/// What a slice matrix represents.
#[derive(Clone, Debug)]
pub enum SliceAction {
    /// Left multiplication by a homogeneous element.
    Multiply(Poly),
    Differential,
}

/// Exact matrix between two slice bases.  Columns whose image had terms
/// beyond the budget (dropped) are flagged.
#[derive(Clone, Debug)]
pub struct ExactMatrix {
    pub matrix: DenseMatrix,
    pub row_basis: Vec<Mono>,
    pub col_basis: Vec<Mono>,
    pub boundary_columns: Vec<bool>,
}

impl ExactMatrix {
    pub fn any_boundary(&self) -> bool {
        self.boundary_columns.iter().any(|&b| b)
    }
}

pub fn linear_map_slice(
    alg: &Algebra,
    action: &SliceAction,
    source: &SliceBasis,
    target: &SliceBasis,
) -> Result<ExactMatrix, SliceError> {
    if *source.alg != *alg || *target.alg != *alg {
        return Err(SliceError::AlgebraMismatch);
    }
    let (shift_w, shift_h): (Vec<i64>, i64) = match action {
        SliceAction::Differential => (vec![0; alg.arity()], 1),
        SliceAction::Multiply(p) => {
            let mut degs = p.iter().map(|(m, _)| (alg.weight(m), alg.hdeg(m)));
            match degs.next() {
                None => (
                    target
                        .multidegree
                        .iter()
                        .zip(&source.multidegree)
                        .map(|(a, b)| a - b)
                        .collect(),
                    target.hdeg - source.hdeg,
                ),
                Some(first) => {
                    if degs.any(|d| d != first) {
                        return Err(SliceError::DegreeIncompatible {
                            weight: first.0,
                            hdeg: first.1,
                        });
                    }
                    first
                }
            }
        }
    };
    let expected: Vec<i64> = source
        .multidegree
        .iter()
        .zip(&shift_w)
        .map(|(a, b)| a + b)
        .collect();
    if expected != target.multidegree || source.hdeg + shift_h != target.hdeg {
        return Err(SliceError::DegreeIncompatible {
            weight: shift_w,
            hdeg: shift_h,
        });
    }
    let row_index = target.index();
    let mut matrix = DenseMatrix::zeros(target.len(), source.len());
    let mut boundary = vec![false; source.len()];
    for (j, m) in source.monomials.iter().enumerate() {
        let mut img = Poly::zero();
        match action {
            SliceAction::Differential => alg.d_mono(m, &Rat::from_integer(1.into()), &mut img),
            SliceAction::Multiply(p) => {
                for (pm, pc) in p.iter() {
                    if let Some((prod, neg)) = alg.mul_mono(pm, m) {
                        img.add_term(prod, if neg { -pc.clone() } else { pc.clone() });
                    }
                }
            }
        }
        for (t, c) in img.iter() {
            match row_index.get(t) {
                Some(&i) => matrix.data[i][j] = c.clone(),
                None => {
                    if !c.is_zero() {
                        boundary[j] = true;
                    }
                }
            }
        }
    }
    Ok(ExactMatrix {
        matrix,
        row_basis: target.monomials.clone(),
        col_basis: source.monomials.clone(),
        boundary_columns: boundary,
    })
}

/// Exact rank over the rationals.
pub fn rank(m: &ExactMatrix) -> usize {
    crate::linalg::rank(&m.matrix)
}
