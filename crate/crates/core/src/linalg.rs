//! Exact linear algebra over the rationals.
//!
//! Two tools: an incremental sparse echelon basis (used by the slice
//! engines) and dense fraction-free (Bareiss) elimination for the public
//! `rank` entry point.

use crate::algebra::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Sparse vector: strictly increasing column indices, nonzero entries.
pub type SparseVec = Vec<(usize, Rat)>;

pub fn sparse_from_dense(v: &[Rat]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

/// `a - c * b`.
fn axpy(a: &SparseVec, c: &Rat, b: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ci = a.get(i).map(|x| x.0).unwrap_or(usize::MAX);
        let cj = b.get(j).map(|x| x.0).unwrap_or(usize::MAX);
        if ci < cj {
            out.push(a[i].clone());
            i += 1;
        } else if cj < ci {
            out.push((cj, -(c * &b[j].1)));
            j += 1;
        } else {
            let v = &a[i].1 - c * &b[j].1;
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Row-echelon basis of a growing subspace.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the span.
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        let mut k = 0;
        while k < v.len() {
            let col = v[k].0;
            match self.pivots.get(&col) {
                Some(p) => {
                    let c = v[k].1.clone();
                    v = axpy(&v, &c, p);
                }
                None => k += 1,
            }
        }
        v
    }

    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Inserts `v`; returns true if it enlarged the span.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let v = self.reduce(v);
        if v.is_empty() {
            return false;
        }
        let lead = v[0].1.clone();
        let v: SparseVec = if lead.is_one() {
            v
        } else {
            let inv = lead.recip();
            v.into_iter().map(|(c, x)| (c, x * &inv)).collect()
        };
        self.pivots.insert(v[0].0, v);
        true
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }
}

/// Rank of a list of sparse vectors.
pub fn sparse_rank(rows: impl IntoIterator<Item = SparseVec>) -> usize {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Basis of the kernel of the linear map whose columns are `cols`
/// (each a sparse vector in the target), as sparse vectors over the columns.
pub fn kernel_basis(cols: &[SparseVec]) -> Vec<SparseVec> {
    // Track combinations: augment each column with an identity tag.
    let offset = cols
        .iter()
        .flat_map(|c| c.iter().map(|x| x.0 + 1))
        .max()
        .unwrap_or(0);
    let mut e = Echelon::new();
    let mut kernel = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        let mut v = c.clone();
        v.push((offset + j, Rat::one()));
        let r = e.reduce(v);
        if r.first().map(|x| x.0 >= offset).unwrap_or(true) {
            kernel.push(r.into_iter().map(|(k, x)| (k - offset, x)).collect());
        } else {
            e.insert(r);
        }
    }
    kernel
}

/// Dense exact matrix, rows of rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<Rat>>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![vec![Rat::zero(); cols]; rows],
        }
    }

    pub fn from_rows(data: Vec<Vec<Rat>>) -> Self {
        let rows = data.len();
        let cols = data.first().map(|r| r.len()).unwrap_or(0);
        DenseMatrix { rows, cols, data }
    }

    pub fn from_i64(data: &[&[i64]]) -> Self {
        Self::from_rows(
            data.iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| Rat::from_integer(BigInt::from(x)))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = Rat::one();
        }
        m
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k][j];
                    if !b.is_zero() {
                        out.data[i][j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.iter().all(|x| x.is_zero()))
    }

    /// Column `j` as a sparse vector.
    pub fn column(&self, j: usize) -> SparseVec {
        (0..self.rows)
            .filter(|&i| !self.data[i][j].is_zero())
            .map(|i| (i, self.data[i][j].clone()))
            .collect()
    }
}

/// Exact rank by fraction-free (Bareiss) elimination: each row is first
/// scaled to integers, then all arithmetic stays in `Z`.
pub fn rank(m: &DenseMatrix) -> usize {
    let mut a: Vec<Vec<BigInt>> = m
        .data
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter()
                .map(|x| (x * Rat::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect();
    let (rows, cols) = (m.rows, m.cols);
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].abs();
        if prev.is_zero() {
            prev = BigInt::one();
        }
        r += 1;
    }
    r
}

/// Solves `A x = b` over the rationals (dense rows); free variables are set
/// to zero.  Returns `None` when inconsistent.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.first().map(|r| r.len()).unwrap_or(0);
    let mut rows: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..=n {
                    let v = &f * &rows[r][j];
                    rows[i][j] -= v;
                }
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut x = vec![Rat::zero(); n];
    for (r, c) in pivots {
        x[c] = rows[r][n].clone();
    }
    Some(x)
}
