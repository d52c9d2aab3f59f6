//! Graded-commutative semi-free dg algebras over the rationals.
//!
//! Variables carry an internal weight in `Z^g` (`g` in 1..=3) and a
//! non-positive homological degree.  Odd variables are exterior, even
//! variables polynomial, and hdeg-0 variables may be marked invertible.
//! Signs follow the Koszul rule on homological degree only.

mod map;
mod parse;
mod poly;

pub use map::{AlgMap, MapError};
pub use parse::{parse_element, ParseError};
pub use poly::{format_rat, rat, Poly, Rat};

use crate::mono::Mono;
use num_traits::{One, Zero};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("degree mismatch for d({var}): {reason}")]
    DegreeMismatch { var: String, reason: String },
    #[error("d(d({0})) is not zero")]
    DifferentialNotSquareZero(String),
    #[error(
        "variable `{0}` has homological degree 0 and internal weight 0; fold it into the coefficient ring instead"
    )]
    ZeroWeightBaseVariable(String),
    #[error(
        "variable `{0}` cannot be inverted: only homological degree 0 variables are invertible"
    )]
    OddVariableInverted(String),
    #[error("elements belong to different algebras")]
    AlgebraMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid declaration: {0}")]
    InvalidDecl(String),
    #[error("negative exponent on non-inverted variable `{0}`")]
    NegativeExponent(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A generator: name, internal weight vector and homological degree (≤ 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariableDecl {
    pub name: String,
    pub weight: Vec<i64>,
    pub hdeg: i64,
}

impl VariableDecl {
    pub fn new(name: impl Into<String>, weight: Vec<i64>, hdeg: i64) -> Self {
        VariableDecl {
            name: name.into(),
            weight,
            hdeg,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.hdeg.rem_euclid(2) == 1
    }
}

/// A validated presentation.  Immutable once built; share it via `Arc`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    arity: usize,
    vars: Vec<VariableDecl>,
    odd: Vec<bool>,
    diff: Vec<Poly>,
    inverted: Vec<bool>,
    index: HashMap<String, usize>,
}

fn valid_ident(s: &str) -> bool {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl Algebra {
    /// Unvalidated skeleton used while differentials are being parsed.
    fn skeleton(
        arity: usize,
        vars: Vec<VariableDecl>,
        inverted: &BTreeSet<String>,
    ) -> Result<Self, AlgebraError> {
        if !(1..=3).contains(&arity) {
            return Err(AlgebraError::InvalidDecl(format!(
                "grading arity {arity} not in 1..=3"
            )));
        }
        let mut index = HashMap::new();
        for (i, v) in vars.iter().enumerate() {
            if !valid_ident(&v.name) {
                return Err(AlgebraError::InvalidDecl(format!(
                    "bad variable name `{}`",
                    v.name
                )));
            }
            if v.weight.len() != arity {
                return Err(AlgebraError::InvalidDecl(format!(
                    "variable `{}` has weight of length {}, expected {arity}",
                    v.name,
                    v.weight.len()
                )));
            }
            if v.hdeg > 0 {
                return Err(AlgebraError::InvalidDecl(format!(
                    "variable `{}` has positive homological degree {}",
                    v.name, v.hdeg
                )));
            }
            if index.insert(v.name.clone(), i).is_some() {
                return Err(AlgebraError::DuplicateName(v.name.clone()));
            }
        }
        let mut inv = vec![false; vars.len()];
        for name in inverted {
            let &i = index
                .get(name)
                .ok_or_else(|| AlgebraError::UnknownVariable(name.clone()))?;
            if vars[i].hdeg != 0 {
                return Err(AlgebraError::OddVariableInverted(name.clone()));
            }
            inv[i] = true;
        }
        let n = vars.len();
        Ok(Algebra {
            arity,
            odd: vars.iter().map(|v| v.is_odd()).collect(),
            vars,
            diff: vec![Poly::zero(); n],
            inverted: inv,
            index,
        })
    }

    /// Builds and validates a presentation from differential strings.
    pub fn build(
        arity: usize,
        vars: Vec<VariableDecl>,
        differential: &[(String, String)],
        inverted: &BTreeSet<String>,
    ) -> Result<Arc<Self>, AlgebraError> {
        let mut alg = Self::skeleton(arity, vars, inverted)?;
        let mut diffs = vec![Poly::zero(); alg.nvars()];
        for (name, text) in differential {
            let i = alg
                .var_index(name)
                .ok_or_else(|| AlgebraError::UnknownVariable(name.clone()))?;
            diffs[i] = parse_element(&alg, text)?;
        }
        alg.diff = diffs;
        alg.validate()?;
        Ok(Arc::new(alg))
    }

    /// Builds and validates a presentation from already-formed differentials.
    pub fn from_parts(
        arity: usize,
        vars: Vec<VariableDecl>,
        diffs: Vec<Poly>,
        inverted: &BTreeSet<String>,
    ) -> Result<Arc<Self>, AlgebraError> {
        let mut alg = Self::skeleton(arity, vars, inverted)?;
        if diffs.len() != alg.nvars() {
            return Err(AlgebraError::InvalidDecl(
                "differential list length mismatch".into(),
            ));
        }
        alg.diff = diffs;
        alg.validate()?;
        Ok(Arc::new(alg))
    }

    fn validate(&self) -> Result<(), AlgebraError> {
        for (i, v) in self.vars.iter().enumerate() {
            if v.hdeg == 0 && v.weight.iter().all(|&w| w == 0) {
                return Err(AlgebraError::ZeroWeightBaseVariable(v.name.clone()));
            }
            for (m, _) in self.diff[i].iter() {
                self.check_exponents(m)?;
                let w = self.weight(m);
                if w != v.weight {
                    return Err(AlgebraError::DegreeMismatch {
                        var: v.name.clone(),
                        reason: format!("term of internal weight {:?}, expected {:?}", w, v.weight),
                    });
                }
                let h = self.hdeg(m);
                if h != v.hdeg + 1 {
                    return Err(AlgebraError::DegreeMismatch {
                        var: v.name.clone(),
                        reason: format!("term of homological degree {h}, expected {}", v.hdeg + 1),
                    });
                }
            }
        }
        for (i, v) in self.vars.iter().enumerate() {
            if !self.d(&self.diff[i]).is_zero() {
                return Err(AlgebraError::DifferentialNotSquareZero(v.name.clone()));
            }
        }
        Ok(())
    }

    /// Rejects exponent vectors that are not valid monomials of this algebra.
    pub fn check_exponents(&self, m: &Mono) -> Result<(), AlgebraError> {
        for (i, &e) in m.exps().iter().enumerate() {
            if e < 0 && !self.inverted[i] {
                return Err(AlgebraError::NegativeExponent(self.vars[i].name.clone()));
            }
            if self.odd[i] && e > 1 {
                return Err(AlgebraError::InvalidDecl(format!(
                    "odd variable `{}` with exponent {e}",
                    self.vars[i].name
                )));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[VariableDecl] {
        &self.vars
    }

    pub fn var(&self, i: usize) -> &VariableDecl {
        &self.vars[i]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.odd[i]
    }

    pub fn is_inverted(&self, i: usize) -> bool {
        self.inverted[i]
    }

    pub fn inverted_names(&self) -> BTreeSet<String> {
        (0..self.nvars())
            .filter(|&i| self.inverted[i])
            .map(|i| self.vars[i].name.clone())
            .collect()
    }

    pub fn diff_of(&self, i: usize) -> &Poly {
        &self.diff[i]
    }

    pub fn diffs(&self) -> &[Poly] {
        &self.diff
    }

    pub fn weight(&self, m: &Mono) -> Vec<i64> {
        let mut w = vec![0i64; self.arity];
        for (i, &e) in m.exps().iter().enumerate() {
            if e != 0 {
                for (k, wk) in w.iter_mut().enumerate() {
                    *wk += e as i64 * self.vars[i].weight[k];
                }
            }
        }
        w
    }

    pub fn hdeg(&self, m: &Mono) -> i64 {
        m.exps()
            .iter()
            .enumerate()
            .map(|(i, &e)| e as i64 * self.vars[i].hdeg)
            .sum()
    }

    /// Number of odd factors (mod 2 gives the Koszul parity).
    pub fn parity(&self, m: &Mono) -> bool {
        m.exps()
            .iter()
            .enumerate()
            .filter(|&(i, &e)| self.odd[i] && e != 0)
            .count()
            % 2
            == 1
    }

    pub fn one(&self) -> Poly {
        Poly::monomial(Mono::one(self.nvars()), Rat::one())
    }

    pub fn gen(&self, i: usize) -> Poly {
        Poly::monomial(Mono::var(self.nvars(), i), Rat::one())
    }

    pub fn gen_named(&self, name: &str) -> Option<Poly> {
        self.var_index(name).map(|i| self.gen(i))
    }

    /// Product of two monomials: `None` if an odd variable would square.
    pub fn mul_mono(&self, a: &Mono, b: &Mono) -> Option<(Mono, bool)> {
        let n = self.nvars();
        let mut out = Vec::with_capacity(n);
        let mut sign = false;
        // odd factors of `a` with index strictly greater than the current one
        let mut odd_a_after: usize = (0..n).filter(|&i| self.odd[i] && a.0[i] != 0).count();
        for i in 0..n {
            let (x, y) = (a.0[i], b.0[i]);
            if self.odd[i] {
                if x != 0 {
                    odd_a_after -= 1;
                }
                if x != 0 && y != 0 {
                    return None;
                }
                if y != 0 && odd_a_after % 2 == 1 {
                    sign = !sign;
                }
            }
            out.push(x + y);
        }
        Some((Mono::from_vec(out), sign))
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in a.iter() {
            for (mb, cb) in b.iter() {
                if let Some((m, neg)) = self.mul_mono(ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    pub fn mul_mono_poly(&self, m: &Mono, c: &Rat, b: &Poly, out: &mut Poly) {
        for (mb, cb) in b.iter() {
            if let Some((p, neg)) = self.mul_mono(m, mb) {
                let v = c * cb;
                out.add_term(p, if neg { -v } else { v });
            }
        }
    }

    /// `x^k` for an element `x`; negative powers only for unit monomials.
    pub fn pow(&self, a: &Poly, k: i32) -> Option<Poly> {
        if k >= 0 {
            let mut r = self.one();
            for _ in 0..k {
                r = self.mul(&r, a);
            }
            return Some(r);
        }
        let (m, c) = a.single_term()?;
        if m.exps()
            .iter()
            .enumerate()
            .any(|(i, &e)| e != 0 && !self.inverted[i])
        {
            return None;
        }
        let inv = Poly::monomial(
            Mono::from_vec(m.exps().iter().map(|e| -e).collect()),
            c.recip(),
        );
        self.pow(&inv, -k)
    }

    /// Differential of a single monomial (graded Leibniz rule).
    pub fn d_mono(&self, m: &Mono, coeff: &Rat, out: &mut Poly) {
        let n = self.nvars();
        let mut odd_before = 0usize;
        for i in 0..n {
            let e = m.0[i];
            if e != 0 && !self.diff[i].is_zero() {
                // m = L * v^e * R  ->  (-1)^{|L|} L * (e v^{e-1} dv) * R
                let mut left = vec![0; n];
                left[..i].copy_from_slice(&m.0[..i]);
                let mut right = vec![0; n];
                right[i + 1..].copy_from_slice(&m.0[i + 1..]);
                let mut mid = vec![0; n];
                mid[i] = e - 1;
                let left = Mono::from_vec(left);
                let right = Mono::from_vec(right);
                let mid = Mono::from_vec(mid);
                let mut c = coeff * Rat::from_integer(e.into());
                if odd_before % 2 == 1 {
                    c = -c;
                }
                for (t, ct) in self.diff[i].iter() {
                    let Some((lm, s1)) = self.mul_mono(&left, &mid) else {
                        continue;
                    };
                    let Some((lmt, s2)) = self.mul_mono(&lm, t) else {
                        continue;
                    };
                    let Some((full, s3)) = self.mul_mono(&lmt, &right) else {
                        continue;
                    };
                    let v = &c * ct;
                    out.add_term(full, if s1 ^ s2 ^ s3 { -v } else { v });
                }
            }
            if self.odd[i] && e != 0 {
                odd_before += 1;
            }
        }
    }

    pub fn d(&self, a: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in a.iter() {
            self.d_mono(m, c, &mut out);
        }
        out
    }

    /// Monomials `n` for which `m` may occur in `d(n)`: for each generator
    /// `v` and term `t` of `d(v)`, the monomial `v * m / t` when valid.
    pub fn preimage_candidates(&self, m: &Mono) -> Vec<Mono> {
        let mut out = Vec::new();
        for v in 0..self.nvars() {
            for (t, _) in self.diff[v].iter() {
                let mut e: Vec<i32> = m.exps().iter().zip(t.exps()).map(|(a, b)| a - b).collect();
                e[v] += 1;
                let ok = e
                    .iter()
                    .enumerate()
                    .all(|(j, &x)| (x >= 0 || self.inverted[j]) && (!self.odd[j] || x <= 1));
                if ok {
                    out.push(Mono::from_vec(e));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Returns the same presentation with additional variables inverted.
    pub fn localize(self: &Arc<Self>, names: &BTreeSet<String>) -> Result<Arc<Self>, AlgebraError> {
        if names.is_empty() {
            return Ok(Arc::clone(self));
        }
        let mut inv = self.inverted_names();
        for n in names {
            let i = self
                .var_index(n)
                .ok_or_else(|| AlgebraError::UnknownVariable(n.clone()))?;
            if self.vars[i].hdeg != 0 {
                return Err(AlgebraError::OddVariableInverted(n.clone()));
            }
            inv.insert(n.clone());
        }
        Algebra::from_parts(self.arity, self.vars.clone(), self.diff.clone(), &inv)
    }

    pub fn format_mono(&self, m: &Mono) -> String {
        let mut parts = Vec::new();
        for (i, &e) in m.exps().iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.vars[i].name.clone()),
                _ => parts.push(format!("{}^{}", self.vars[i].name, e)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn format(&self, p: &Poly) -> String {
        if p.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (m, c)) in p.iter().rev().enumerate() {
            let neg = c < &Rat::zero();
            let a = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono = self.format_mono(m);
            if a.is_one() {
                s.push_str(&mono);
            } else if m.is_one() {
                s.push_str(&format_rat(&a));
            } else {
                s.push_str(&format_rat(&a));
                s.push('*');
                s.push_str(&mono);
            }
        }
        s
    }
}

/// `build_algebra` for a one-line call site.
pub fn build_algebra(
    arity: usize,
    decls: Vec<VariableDecl>,
    differential: &[(&str, &str)],
    inverted: &[&str],
) -> Result<Arc<Algebra>, AlgebraError> {
    let diff: Vec<(String, String)> = differential
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let inv: BTreeSet<String> = inverted.iter().map(|s| s.to_string()).collect();
    Algebra::build(arity, decls, &diff, &inv)
}

/// An element tied to its algebra; operations check that operands agree.
#[derive(Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    alg: Arc<Algebra>,
    poly: Poly,
}

impl AlgebraElement {
    pub fn new(alg: &Arc<Algebra>, poly: Poly) -> Self {
        AlgebraElement {
            alg: Arc::clone(alg),
            poly,
        }
    }

    pub fn parse(alg: &Arc<Algebra>, text: &str) -> Result<Self, AlgebraError> {
        Ok(Self::new(alg, parse_element(alg, text)?))
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    fn same(&self, other: &Self) -> Result<(), AlgebraError> {
        if Arc::ptr_eq(&self.alg, &other.alg) || self.alg == other.alg {
            Ok(())
        } else {
            Err(AlgebraError::AlgebraMismatch)
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same(other)?;
        Ok(Self::new(&self.alg, self.alg.mul(&self.poly, &other.poly)))
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same(other)?;
        Ok(Self::new(&self.alg, self.poly.add(&other.poly)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.same(other)?;
        Ok(Self::new(&self.alg, self.poly.sub(&other.poly)))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::new(&self.alg, self.poly.scale(c))
    }

    pub fn differential(&self) -> Self {
        Self::new(&self.alg, self.alg.d(&self.poly))
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Homological degree if all terms agree.
    pub fn hdeg(&self) -> Option<i64> {
        let mut it = self.poly.iter().map(|(m, _)| self.alg.hdeg(m));
        let first = it.next()?;
        it.all(|h| h == first).then_some(first)
    }

    /// Internal weight if all terms agree.
    pub fn weight(&self) -> Option<Vec<i64>> {
        let mut it = self.poly.iter().map(|(m, _)| self.alg.weight(m));
        let first = it.next()?;
        it.all(|h| h == first).then_some(first)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.alg.format(&self.poly))
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraElement({self})")
    }
}

/// Functional form of the product.
pub fn multiply(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    a.multiply(b)
}

/// Functional form of the differential.
pub fn apply_differential(a: &AlgebraElement) -> AlgebraElement {
    a.differential()
}

/// Functional form of localization.
pub fn localize(alg: &Arc<Algebra>, vars: &[&str]) -> Result<Arc<Algebra>, AlgebraError> {
    alg.localize(&vars.iter().map(|s| s.to_string()).collect())
}
