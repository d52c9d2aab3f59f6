//! Algebra homomorphisms given by generator images.

use super::{Algebra, Poly};
use crate::mono::Mono;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("image list has {got} entries, source has {expected} generators")]
    Arity { expected: usize, got: usize },
    #[error("image of inverted generator `{0}` is not a unit monomial")]
    NotAUnit(String),
    #[error("image of `{var}` has {reason}")]
    Degree { var: String, reason: String },
    #[error("map does not commute with the differential on `{0}`")]
    NotChainMap(String),
}

/// `phi: source -> target`, determined by the images of the generators.
pub struct AlgMap {
    pub source: Arc<Algebra>,
    pub target: Arc<Algebra>,
    images: Vec<Poly>,
    cache: Mutex<HashMap<Mono, Poly>>,
}

impl Clone for AlgMap {
    fn clone(&self) -> Self {
        AlgMap {
            source: Arc::clone(&self.source),
            target: Arc::clone(&self.target),
            images: self.images.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for AlgMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = (0..self.source.nvars())
            .map(|i| {
                format!(
                    "{} -> {}",
                    self.source.var(i).name,
                    self.target.format(&self.images[i])
                )
            })
            .collect();
        write!(f, "AlgMap[{}]", parts.join(", "))
    }
}

impl AlgMap {
    /// Builds the map; checks arity and that inverted generators go to units.
    pub fn new(
        source: &Arc<Algebra>,
        target: &Arc<Algebra>,
        images: Vec<Poly>,
    ) -> Result<Self, MapError> {
        if images.len() != source.nvars() {
            return Err(MapError::Arity {
                expected: source.nvars(),
                got: images.len(),
            });
        }
        for i in 0..source.nvars() {
            if source.is_inverted(i) && target.pow(&images[i], -1).is_none() {
                return Err(MapError::NotAUnit(source.var(i).name.clone()));
            }
        }
        Ok(AlgMap {
            source: Arc::clone(source),
            target: Arc::clone(target),
            images,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Builds the map from `(source name, target expression)` pairs;
    /// generators not listed map to the same-named target generator.
    pub fn from_strings(
        source: &Arc<Algebra>,
        target: &Arc<Algebra>,
        pairs: &[(&str, &str)],
    ) -> Result<Self, super::AlgebraError> {
        let mut images = Vec::with_capacity(source.nvars());
        for v in source.vars() {
            let img = match pairs.iter().find(|(n, _)| *n == v.name) {
                Some((_, text)) => super::parse_element(target, text)?,
                None => target
                    .gen_named(&v.name)
                    .ok_or_else(|| super::AlgebraError::UnknownVariable(v.name.clone()))?,
            };
            images.push(img);
        }
        AlgMap::new(source, target, images)
            .map_err(|e| super::AlgebraError::InvalidDecl(e.to_string()))
    }

    pub fn image(&self, i: usize) -> &Poly {
        &self.images[i]
    }

    pub fn images(&self) -> &[Poly] {
        &self.images
    }

    pub fn apply_mono(&self, m: &Mono) -> Poly {
        if let Some(p) = self.cache.lock().expect("cache poisoned").get(m) {
            return p.clone();
        }
        let t = &self.target;
        let mut acc = t.one();
        for (i, &e) in m.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let p = t
                .pow(&self.images[i], e)
                .expect("inverted generators map to units");
            acc = t.mul(&acc, &p);
            if acc.is_zero() {
                break;
            }
        }
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.len() < 1 << 20 {
            cache.insert(m.clone(), acc.clone());
        }
        acc
    }

    pub fn apply(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in p.iter() {
            out.add_assign(&self.apply_mono(m).scale(c));
        }
        out
    }

    /// Checks `phi(d v) = d(phi v)` on every generator.
    pub fn check_chain_map(&self) -> Result<(), MapError> {
        for i in 0..self.source.nvars() {
            let lhs = self.apply(self.source.diff_of(i));
            let rhs = self.target.d(&self.images[i]);
            if lhs != rhs {
                return Err(MapError::NotChainMap(self.source.var(i).name.clone()));
            }
        }
        Ok(())
    }

    /// Checks that each generator image is homogeneous with the expected
    /// homological degree and internal weight `weight_of(source weight)`.
    pub fn check_degrees(&self, weight_of: impl Fn(&[i64]) -> Vec<i64>) -> Result<(), MapError> {
        for (i, v) in self.source.vars().iter().enumerate() {
            let want = weight_of(&v.weight);
            for (m, _) in self.images[i].iter() {
                let w = self.target.weight(m);
                let h = self.target.hdeg(m);
                if w != want || h != v.hdeg {
                    return Err(MapError::Degree {
                        var: v.name.clone(),
                        reason: format!(
                            "a term of degree ({w:?}, {h}), expected ({want:?}, {})",
                            v.hdeg
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn compose(&self, after: &AlgMap) -> AlgMap {
        let images = self.images.iter().map(|p| after.apply(p)).collect();
        AlgMap::new(&self.source, &after.target, images).expect("composite of valid maps")
    }

    /// True if `self ∘ other` and `other ∘ self` are identities on generators.
    pub fn is_inverse_of(&self, other: &AlgMap) -> bool {
        let id_src =
            (0..self.source.nvars()).all(|i| other.apply(&self.images[i]) == self.source.gen(i));
        let id_tgt =
            (0..other.source.nvars()).all(|i| self.apply(other.image(i)) == other.source.gen(i));
        id_src && id_tgt
    }

    /// True if every generator maps to a single term (so monomials map to
    /// monomials up to scalar).
    pub fn is_monomial(&self) -> bool {
        self.images.iter().all(|p| p.len() <= 1)
    }

    /// All source monomials whose image is a nonzero multiple of `t`, for a
    /// monomial map.  Generators mapping to constants are solved from the
    /// `pins` (fixed multidegree coordinates of the source complex); `None`
    /// when the set cannot be bounded.
    pub fn monomial_preimages(&self, t: &Mono, pins: &[(usize, i64)]) -> Option<Vec<Mono>> {
        if !self.is_monomial() {
            return None;
        }
        let n = self.source.nvars();
        let mut bounded = Vec::new();
        let mut constant = Vec::new();
        for v in 0..n {
            let Some((m, _)) = self.images[v].iter().next() else {
                continue;
            };
            if self.source.is_inverted(v) || m.exps().iter().any(|&e| e < 0) {
                return None;
            }
            if m.is_one() {
                constant.push(v);
            } else {
                bounded.push((v, m.clone()));
            }
        }
        if t.exps().iter().any(|&e| e < 0) {
            return Some(Vec::new());
        }
        let mut out = Vec::new();
        let mut cur = vec![0i32; n];
        let mut rem: Vec<i32> = t.exps().to_vec();
        let mut ok = true;
        self.preimage_search(
            &bounded, 0, &mut rem, &mut cur, &constant, pins, &mut out, &mut ok,
        );
        ok.then_some(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn preimage_search(
        &self,
        bounded: &[(usize, Mono)],
        i: usize,
        rem: &mut Vec<i32>,
        cur: &mut Vec<i32>,
        constant: &[usize],
        pins: &[(usize, i64)],
        out: &mut Vec<Mono>,
        ok: &mut bool,
    ) {
        if !*ok {
            return;
        }
        if i == bounded.len() {
            if rem.iter().any(|&e| e != 0) {
                return;
            }
            if constant.is_empty() {
                out.push(Mono::from_vec(cur.clone()));
                return;
            }
            // a single constant-image generator can be pinned by a fixed
            // multidegree coordinate; anything else is unbounded
            let &[c] = constant else {
                *ok = false;
                return;
            };
            let w = self.source.weight(&Mono::from_vec(cur.clone()));
            let wc = &self.source.var(c).weight;
            let Some(&(j, val)) = pins.iter().find(|(j, _)| wc[*j] != 0) else {
                *ok = false;
                return;
            };
            let need = val - w[j];
            if need % wc[j] != 0 {
                return;
            }
            let e = need / wc[j];
            if e < 0 || (self.source.is_odd(c) && e > 1) {
                return;
            }
            let mut full = cur.clone();
            full[c] = e as i32;
            out.push(Mono::from_vec(full));
            return;
        }
        let (v, m) = &bounded[i];
        let cap = m
            .exps()
            .iter()
            .zip(rem.iter())
            .filter(|(&a, _)| a > 0)
            .map(|(&a, &r)| r / a)
            .min()
            .unwrap_or(0);
        let cap = if self.source.is_odd(*v) {
            cap.min(1)
        } else {
            cap
        };
        for e in 0..=cap {
            for (r, &a) in rem.iter_mut().zip(m.exps()) {
                *r -= e * a;
            }
            cur[*v] = e;
            self.preimage_search(bounded, i + 1, rem, cur, constant, pins, out, ok);
            for (r, &a) in rem.iter_mut().zip(m.exps()) {
                *r += e * a;
            }
        }
        cur[*v] = 0;
    }

    pub fn identity(alg: &Arc<Algebra>) -> AlgMap {
        let images = (0..alg.nvars()).map(|i| alg.gen(i)).collect();
        AlgMap::new(alg, alg, images).expect("identity")
    }
}
