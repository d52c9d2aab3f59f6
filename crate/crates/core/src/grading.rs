//! Finest gradings preserved by a differential.
//!
//! A functional `phi` on exponent vectors is d-invariant when
//! `phi(t) = phi(v)` for every generator `v` and every term `t` of `d(v)`.
//! The values of a basis of such functionals (the "piece key") split every
//! slice complex into a direct sum of smaller subcomplexes, one per key.

use crate::algebra::{Algebra, Rat};
use crate::linalg::{kernel_basis, SparseVec};
use crate::mono::Mono;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Integer matrix of d-invariant functionals, one row per functional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantGrading {
    pub rows: Vec<Vec<i64>>,
}

impl InvariantGrading {
    pub fn of(alg: &Algebra) -> Self {
        let n = alg.nvars();
        // constraint rows: exps(t) - e_v
        let mut constraints: Vec<Vec<i64>> = Vec::new();
        for v in 0..n {
            for (t, _) in alg.diff_of(v).iter() {
                let mut r: Vec<i64> = t.exps().iter().map(|&e| e as i64).collect();
                r[v] -= 1;
                constraints.push(r);
            }
        }
        Self::nullspace(n, &constraints)
    }

    /// Integer basis of `{phi : c . phi = 0 for all constraint rows c}`.
    pub fn nullspace(n: usize, constraints: &[Vec<i64>]) -> Self {
        let cols: Vec<SparseVec> = (0..n)
            .map(|j| {
                constraints
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r[j] != 0)
                    .map(|(i, r)| (i, Rat::from_integer(BigInt::from(r[j]))))
                    .collect()
            })
            .collect();
        let mut rows = Vec::new();
        for k in kernel_basis(&cols) {
            let l = k
                .iter()
                .fold(BigInt::one(), |acc, (_, x)| acc.lcm(x.denom()));
            let mut row = vec![0i64; n];
            for (j, x) in k {
                let v = (x * Rat::from_integer(l.clone())).to_integer();
                row[j] = v.to_i64().expect("grading entries fit in i64");
            }
            let g = row.iter().fold(0i64, |acc, &x| acc.gcd(&x));
            if g > 1 {
                for x in row.iter_mut() {
                    *x /= g;
                }
            }
            rows.push(row);
        }
        InvariantGrading { rows }
    }

    pub fn key(&self, m: &Mono) -> Vec<i64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(m.exps()).map(|(a, &e)| a * e as i64).sum())
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|x| x.is_zero()))
    }
}
