//! Exponent vectors and their deterministic ordering.

use std::cmp::Ordering;
use std::fmt;

/// Exponent vector of a monomial, one entry per declared variable.
///
/// Ordering is graded-lexicographic: first by total size (sum of absolute
/// exponents), then lexicographically in declaration order, a larger
/// exponent on an earlier variable ranking higher.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mono(pub Box<[i32]>);

impl Mono {
    pub fn one(n: usize) -> Self {
        Mono(vec![0; n].into_boxed_slice())
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Mono(e.into_boxed_slice())
    }

    pub fn from_vec(v: Vec<i32>) -> Self {
        Mono(v.into_boxed_slice())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Budget measure: sum of absolute exponents.
    pub fn size(&self) -> u32 {
        self.0.iter().map(|e| e.unsigned_abs()).sum()
    }

    pub fn exps(&self) -> &[i32] {
        &self.0
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.0)
    }
}
