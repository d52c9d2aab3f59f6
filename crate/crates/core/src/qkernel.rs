//! The kernel algebras `Δ(R) = R[u, u^-1]` and `Q(R) ⊆ Δ(R)` with their
//! two structure maps `p`, `s: R -> Q`, and the structural checks relating
//! them: localization, base change and middle-degree invariants.
//!
//! Naming in `Q`: base variables of positive weight keep their name,
//! negative ones are renamed `y.. -> z..` (otherwise prefixed `z_`),
//! dg generators of non-negative weight keep their name, negative ones are
//! renamed `f.. -> g..` (otherwise prefixed `g_`), and `u` is added with
//! bidegree `(-1, 1)`.

use crate::algebra::{AlgMap, Algebra, AlgebraError, MapError, Poly, Rat, VariableDecl};
use crate::chain::{analyze, Cone};
use crate::complexes::{
    key_of, pullback_key, summarize, AlgebraModel, ComplexError, QuasiIsoReport, Verdict,
};
use crate::mono::Mono;
use crate::slices::TruncationBox;
use num_traits::One;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("base algebra must be graded by a single integer weight (got arity {0})")]
    UnsupportedArity(usize),
    #[error("base algebra must not have inverted variables")]
    InvertedBase,
    #[error("differential of `{0}` does not map to a bihomogeneous element")]
    NonHomogeneousDifferential(String),
    #[error("element of internal degree {degree} cannot be used on side {side}")]
    WrongSide { degree: i64, side: Side },
    #[error("element `{0}` must be a monomial in the base variables")]
    NotABaseMonomial(String),
    #[error("dg generator `{name}` has positive internal degree {degree}")]
    PositiveGeneratorPresent { name: String, degree: i64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Which structure map of the kernel a localization acts through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    P,
    S,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::P => "p",
            Side::S => "s",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Delta,
    Q,
}

/// Role of a base-algebra generator in the kernel construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// hdeg 0, positive weight.
    Positive,
    /// hdeg 0, negative weight.
    Negative,
    /// hdeg < 0, weight ≥ 0.
    UpperGen,
    /// hdeg < 0, weight < 0.
    LowerGen,
}

pub fn role_of(v: &VariableDecl) -> Role {
    match (v.hdeg == 0, v.weight[0] > 0, v.weight[0] >= 0) {
        (true, true, _) => Role::Positive,
        (true, false, _) => Role::Negative,
        (false, _, true) => Role::UpperGen,
        (false, _, false) => Role::LowerGen,
    }
}

/// A bigraded kernel algebra with its structure maps from the base.
#[derive(Clone, Debug)]
pub struct KernelAlgebra {
    pub kind: KernelKind,
    pub base: Arc<Algebra>,
    pub alg: Arc<Algebra>,
    /// Co-projection side (`π` for `Δ`).
    pub p: AlgMap,
    /// Co-action side (`σ` for `Δ`).
    pub s: AlgMap,
    /// Index of `u` in `alg`.
    pub u: usize,
    /// For `Q`: the inclusion into `Δ(R)`.
    pub eta: Option<(Box<KernelAlgebra>, AlgMap)>,
}

impl KernelAlgebra {
    pub fn u_poly(&self) -> Poly {
        self.alg.gen(self.u)
    }

    /// Bidegree of `u`.
    pub fn u_bidegree(&self) -> Vec<i64> {
        self.alg.var(self.u).weight.clone()
    }

    pub fn delta(&self) -> Option<&KernelAlgebra> {
        self.eta.as_ref().map(|(d, _)| d.as_ref())
    }

    pub fn eta(&self) -> Option<&AlgMap> {
        self.eta.as_ref().map(|(_, m)| m)
    }

    /// Name in the kernel of the generator standing for base generator `i`.
    pub fn partner(&self, i: usize) -> &str {
        let img = self.s.image(i);
        let (m, _) = img
            .iter()
            .next()
            .expect("structure maps send generators to monomials");
        let j = (0..self.alg.nvars())
            .find(|&j| j != self.u && m.exps()[j] != 0)
            .expect("generator image involves a partner variable");
        &self.alg.var(j).name
    }
}

pub(crate) fn check_base(r: &Algebra) -> Result<(), KernelError> {
    if r.arity() != 1 {
        return Err(KernelError::UnsupportedArity(r.arity()));
    }
    if (0..r.nvars()).any(|i| r.is_inverted(i)) {
        return Err(KernelError::InvertedBase);
    }
    Ok(())
}

/// `x^e` style monomial with the listed exponents.
pub(crate) fn mono_of(n: usize, parts: &[(usize, i32)]) -> Poly {
    let mut e = vec![0i32; n];
    for &(i, k) in parts {
        e[i] += k;
    }
    Poly::monomial(Mono::from_vec(e), Rat::one())
}

pub(crate) fn fresh_name(taken: &HashSet<String>, wanted: String) -> String {
    let mut name = wanted;
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

fn renamed(name: &str, from: char, to: char) -> String {
    match name.strip_prefix(from) {
        Some(rest) => format!("{to}{rest}"),
        _ => format!("{to}_{name}"),
    }
}

/// `Δ(R) = R[u, u^-1]`, bigraded with `r ↦ (deg r, 0)` and `u ↦ (-1, 1)`;
/// `π(r) = r`, `σ(r) = r u^{deg r}`.
pub fn build_delta(r: &Arc<Algebra>) -> Result<KernelAlgebra, KernelError> {
    check_base(r)?;
    let n = r.nvars();
    let taken: HashSet<String> = r.vars().iter().map(|v| v.name.clone()).collect();
    let mut vars: Vec<VariableDecl> = r
        .vars()
        .iter()
        .map(|v| VariableDecl::new(v.name.clone(), vec![v.weight[0], 0], v.hdeg))
        .collect();
    vars.push(VariableDecl::new(
        fresh_name(&taken, "u".into()),
        vec![-1, 1],
        0,
    ));
    let u = n;
    let mut diffs: Vec<Poly> = r.diffs().to_vec();
    for p in diffs.iter_mut() {
        *p = extend(p, 1);
    }
    diffs.push(Poly::zero());
    let inverted: BTreeSet<String> = [vars[u].name.clone()].into();
    let alg = Algebra::from_parts(2, vars, diffs, &inverted)?;
    let pi = AlgMap::new(r, &alg, (0..n).map(|i| mono_of(n + 1, &[(i, 1)])).collect())?;
    let sigma = AlgMap::new(
        r,
        &alg,
        (0..n)
            .map(|i| mono_of(n + 1, &[(i, 1), (u, r.var(i).weight[0] as i32)]))
            .collect(),
    )?;
    Ok(KernelAlgebra {
        kind: KernelKind::Delta,
        base: Arc::clone(r),
        alg,
        p: pi,
        s: sigma,
        u,
        eta: None,
    })
}

/// Pads every monomial of `p` with `extra` trailing zero exponents.
pub(crate) fn extend(p: &Poly, extra: usize) -> Poly {
    Poly::from_terms(p.iter().map(|(m, c)| {
        let mut e = m.exps().to_vec();
        e.extend(std::iter::repeat(0).take(extra));
        (Mono::from_vec(e), c.clone())
    }))
}

/// The explicit presentation `Q(R) = Q(T)[e, g]` with `p`, `s` and the
/// inclusion `η: Q(R) -> Δ(R)`.
pub fn build_q(r: &Arc<Algebra>) -> Result<KernelAlgebra, KernelError> {
    check_base(r)?;
    let n = r.nvars();
    let mut taken: HashSet<String> = HashSet::new();
    let mut vars = Vec::with_capacity(n + 1);
    let roles: Vec<Role> = r.vars().iter().map(role_of).collect();
    // the renamed partner may collide with an original name; reserve those
    // that are kept verbatim first
    for (v, role) in r.vars().iter().zip(&roles) {
        if matches!(role, Role::Positive | Role::UpperGen) {
            taken.insert(v.name.clone());
        }
    }
    for (v, role) in r.vars().iter().zip(&roles) {
        let w = v.weight[0];
        let decl = match role {
            Role::Positive | Role::UpperGen => {
                VariableDecl::new(v.name.clone(), vec![w, 0], v.hdeg)
            }
            Role::Negative => {
                let name = fresh_name(&taken, renamed(&v.name, 'y', 'z'));
                taken.insert(name.clone());
                VariableDecl::new(name, vec![0, w], v.hdeg)
            }
            Role::LowerGen => {
                let name = fresh_name(&taken, renamed(&v.name, 'f', 'g'));
                taken.insert(name.clone());
                VariableDecl::new(name, vec![0, w], v.hdeg)
            }
        };
        vars.push(decl);
    }
    let u = n;
    vars.push(VariableDecl::new(
        fresh_name(&taken, "u".into()),
        vec![-1, 1],
        0,
    ));

    let mut p_imgs = Vec::with_capacity(n);
    let mut s_imgs = Vec::with_capacity(n);
    for (i, (v, role)) in r.vars().iter().zip(&roles).enumerate() {
        let w = v.weight[0] as i32;
        let (p, s) = match role {
            Role::Positive | Role::UpperGen => {
                (mono_of(n + 1, &[(i, 1)]), mono_of(n + 1, &[(i, 1), (u, w)]))
            }
            Role::Negative | Role::LowerGen => (
                mono_of(n + 1, &[(i, 1), (u, -w)]),
                mono_of(n + 1, &[(i, 1)]),
            ),
        };
        p_imgs.push(p);
        s_imgs.push(s);
    }

    // provisional algebra without differential, used to transport d_R
    let bare = Algebra::from_parts(2, vars.clone(), vec![Poly::zero(); n + 1], &BTreeSet::new())?;
    let p_bare = AlgMap::new(r, &bare, p_imgs.clone())?;
    let s_bare = AlgMap::new(r, &bare, s_imgs.clone())?;
    let mut diffs = Vec::with_capacity(n + 1);
    for (i, role) in roles.iter().enumerate() {
        let d = match role {
            Role::Positive | Role::Negative => Poly::zero(),
            Role::UpperGen => p_bare.apply(r.diff_of(i)),
            Role::LowerGen => s_bare.apply(r.diff_of(i)),
        };
        let mut degs = d.iter().map(|(m, _)| bare.weight(m));
        if let Some(first) = degs.next() {
            if degs.any(|w| w != first) || first != vars[i].weight {
                return Err(KernelError::NonHomogeneousDifferential(
                    r.var(i).name.clone(),
                ));
            }
        }
        diffs.push(d);
    }
    diffs.push(Poly::zero());
    let alg = Algebra::from_parts(2, vars, diffs, &BTreeSet::new())?;
    let p = AlgMap::new(r, &alg, p_imgs)?;
    let s = AlgMap::new(r, &alg, s_imgs)?;

    let delta = build_delta(r)?;
    let du = delta.u;
    let mut eta_imgs = Vec::with_capacity(n + 1);
    for (i, (v, role)) in r.vars().iter().zip(&roles).enumerate() {
        let w = v.weight[0] as i32;
        eta_imgs.push(match role {
            Role::Positive | Role::UpperGen => mono_of(n + 1, &[(i, 1)]),
            Role::Negative | Role::LowerGen => mono_of(n + 1, &[(i, 1), (du, w)]),
        });
    }
    eta_imgs.push(mono_of(n + 1, &[(du, 1)]));
    let eta = AlgMap::new(&alg, &delta.alg, eta_imgs)?;
    Ok(KernelAlgebra {
        kind: KernelKind::Q,
        base: Arc::clone(r),
        alg,
        p,
        s,
        u,
        eta: Some((Box::new(delta), eta)),
    })
}

/// Consistency of a kernel algebra: structure maps are chain maps with the
/// expected bidegrees, and (for `Q`) `η p = π`, `η s = σ`, `η` is a chain map.
pub fn check_structure(q: &KernelAlgebra) -> Result<(), KernelError> {
    q.p.check_chain_map()?;
    q.s.check_chain_map()?;
    q.p.check_degrees(|w| vec![w[0], 0])?;
    q.s.check_degrees(|w| vec![0, w[0]])?;
    if let Some((delta, eta)) = &q.eta {
        eta.check_chain_map()?;
        eta.check_degrees(|w| w.to_vec())?;
        for i in 0..q.base.nvars() {
            let name = &q.base.var(i).name;
            if eta.apply(q.p.image(i)) != *delta.p.image(i)
                || eta.apply(q.s.image(i)) != *delta.s.image(i)
            {
                return Err(MapError::NotChainMap(name.clone()).into());
            }
        }
    }
    Ok(())
}

/// Outcome of a structural isomorphism check.
#[derive(Clone, Debug)]
pub struct IsoCheck {
    pub label: String,
    /// Individually verified facts, each with its outcome.
    pub facts: Vec<(String, bool)>,
    /// Piecewise homology comparison on the certified band.
    pub comparison: QuasiIsoReport,
    pub verdict: Verdict,
}

impl IsoCheck {
    pub(crate) fn new(
        label: String,
        facts: Vec<(String, bool)>,
        comparison: QuasiIsoReport,
    ) -> Self {
        let exact = Verdict::all(facts.iter().map(|(_, ok)| Verdict::from_bool(*ok)));
        let verdict = exact.and(comparison.verdict);
        IsoCheck {
            label,
            facts,
            comparison,
            verdict,
        }
    }
}

/// Cone comparison for a map with a known monomial inverse: preimages of a
/// target monomial are read off the inverse.
pub fn compare_with_inverse(
    f: &AlgMap,
    inverse: &AlgMap,
    src: &AlgebraModel,
    tgt: &AlgebraModel,
) -> Result<QuasiIsoReport, KernelError> {
    f.check_chain_map()?;
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
        map_preimages: Box::new(|t: &Mono| {
            let img = inverse.apply_mono(t);
            Some(img.iter().map(|(m, _)| m.clone()).collect())
        }),
    };
    Ok(summarize(analyze(
        &cone,
        src.lo.min(tgt.lo),
        src.hi.max(tgt.hi),
    )))
}

/// Monomial factors of a base monomial given by name, e.g. `x1*x2^2`.
fn base_monomial(r: &Arc<Algebra>, t: &str) -> Result<Mono, KernelError> {
    let poly = crate::algebra::parse_element(r, t).map_err(AlgebraError::from)?;
    let (m, _) = poly
        .single_term()
        .ok_or_else(|| KernelError::NotABaseMonomial(t.into()))?;
    if m.exps()
        .iter()
        .enumerate()
        .any(|(i, &e)| e != 0 && r.var(i).hdeg != 0)
        || m.is_one()
    {
        return Err(KernelError::NotABaseMonomial(t.into()));
    }
    Ok(m.clone())
}

fn support_names(alg: &Algebra, p: &Poly) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (m, _) in p.iter() {
        for (i, &e) in m.exps().iter().enumerate() {
            if e != 0 {
                out.insert(alg.var(i).name.clone());
            }
        }
    }
    out
}

/// After inverting `side(t)` in `Q` and `σ(t)`/`π(t)` in `Δ`, `η` becomes an
/// isomorphism.  Verified through the explicit witness for `u^{-1}`, an
/// explicit inverse map, and a piecewise cone comparison.
pub fn check_localization_iso(
    q: &KernelAlgebra,
    t: &str,
    side: Side,
    bx: &TruncationBox,
) -> Result<IsoCheck, KernelError> {
    let r = &q.base;
    let (delta, eta) = q
        .eta
        .as_ref()
        .map(|(d, e)| (d.as_ref(), e))
        .expect("check runs on Q");
    let tm = base_monomial(r, t)?;
    let deg = r.weight(&tm)[0];
    match side {
        Side::S if deg > 0 => {}
        Side::P if deg < 0 => {}
        _ => return Err(KernelError::WrongSide { degree: deg, side }),
    }
    let tp = Poly::monomial(tm.clone(), Rat::one());
    let (q_side, d_side) = match side {
        Side::S => (q.s.apply(&tp), delta.s.apply(&tp)),
        Side::P => (q.p.apply(&tp), delta.p.apply(&tp)),
    };
    let q_loc = q.alg.localize(&support_names(&q.alg, &q_side))?;
    let d_loc = delta.alg.localize(&support_names(&delta.alg, &d_side))?;
    let mut facts = Vec::new();

    // witness: side(t)^{-1} * (other-side image of t) * u^{±deg t - 1} = u^{-1}
    let u_inv = q_loc
        .pow(&q.u_poly(), -1)
        .expect("u is inverted after localization");
    let side_inv = q_loc.pow(&q_side, -1).expect("localized element is a unit");
    let witness = match side {
        Side::S => {
            let pt = q.p.apply(&tp);
            q_loc.mul(
                &q_loc.mul(&side_inv, &pt),
                &q_loc.pow(&q.u_poly(), (deg - 1) as i32).expect("u power"),
            )
        }
        Side::P => {
            let st = q.s.apply(&tp);
            q_loc.mul(
                &q_loc.mul(&side_inv, &st),
                &q_loc.pow(&q.u_poly(), (-deg - 1) as i32).expect("u power"),
            )
        }
    };
    facts.push((
        format!("witness {} = u^-1", q_loc.format(&witness)),
        witness == u_inv,
    ));

    let forward = AlgMap::new(&q_loc, &d_loc, eta.images().to_vec())?;
    // inverse: base generators through p, u to u
    let mut inv_imgs: Vec<Poly> = (0..r.nvars()).map(|i| q.p.image(i).clone()).collect();
    inv_imgs.push(q.u_poly());
    // Negative and lower generators: p(y) = u^{-b} z, so y = u^{-b} z needs no
    // inversion; the inverse of η on z, g is z = u^{-deg y} y.
    let inverse = AlgMap::new(&d_loc, &q_loc, inv_imgs)?;
    facts.push((
        "eta is a chain map after localization".into(),
        forward.check_chain_map().is_ok(),
    ));
    facts.push((
        "explicit inverse is a chain map".into(),
        inverse.check_chain_map().is_ok(),
    ));
    facts.push((
        "eta and the inverse are mutually inverse".into(),
        forward.is_inverse_of(&inverse),
    ));
    facts.push((
        "eta preserves bidegrees".into(),
        forward.check_degrees(|w| w.to_vec()).is_ok(),
    ));
    let src = AlgebraModel::new(&q_loc, bx);
    let tgt = AlgebraModel::new(&d_loc, bx);
    let comparison = compare_with_inverse(&forward, &inverse, &src, &tgt)?;
    Ok(IsoCheck::new(
        format!("localization at {side}({t})"),
        facts,
        comparison,
    ))
}

/// `Q(T) ⊗_T R -> Q(R)` via `s`: `q ⊗ 1 ↦ q`, `1 ⊗ f ↦ g` (`e` for weight-0
/// generators).  Requires every dg generator to have non-positive weight.
pub fn check_basechange(r: &Arc<Algebra>, bx: &TruncationBox) -> Result<IsoCheck, KernelError> {
    check_base(r)?;
    for v in r.vars() {
        if v.hdeg < 0 && v.weight[0] > 0 {
            return Err(KernelError::PositiveGeneratorPresent {
                name: v.name.clone(),
                degree: v.weight[0],
            });
        }
    }
    let q = build_q(r)?;
    let n = r.nvars();
    // Q(T) ⊗_T R: the Q(T) variables with R's dg generators adjoined, placed
    // in the second bidegree slot and with d(f') = s(d f).
    let gens: Vec<usize> = (0..n).filter(|&i| r.var(i).hdeg < 0).collect();
    let mut vars: Vec<VariableDecl> = Vec::new();
    let mut idx_in_tensor = vec![usize::MAX; q.alg.nvars()];
    for j in 0..q.alg.nvars() {
        let base_idx = (j < n).then_some(j);
        if base_idx.is_some_and(|i| r.var(i).hdeg < 0) {
            continue;
        }
        idx_in_tensor[j] = vars.len();
        vars.push(q.alg.var(j).clone());
    }
    let mut gen_idx = Vec::new();
    for &i in &gens {
        let v = r.var(i);
        gen_idx.push(vars.len());
        vars.push(VariableDecl::new(
            format!("{}'", v.name),
            vec![0, v.weight[0]],
            v.hdeg,
        ));
    }
    let nt = vars.len();
    // d(f') = s(d f) with f-generators inside d f replaced by their primes;
    // s(f) = g is the Q-variable at position f, which is absent in the
    // tensor, so map it to the primed generator.
    let mut q_to_tensor = vec![Poly::zero(); q.alg.nvars()];
    for j in 0..q.alg.nvars() {
        if idx_in_tensor[j] != usize::MAX {
            q_to_tensor[j] = mono_of(nt, &[(idx_in_tensor[j], 1)]);
        }
    }
    for (k, &i) in gens.iter().enumerate() {
        q_to_tensor[i] = mono_of(nt, &[(gen_idx[k], 1)]);
    }
    let bare = Algebra::from_parts(2, vars.clone(), vec![Poly::zero(); nt], &BTreeSet::new())?;
    let q_into_bare = AlgMap::new(&q.alg, &bare, q_to_tensor.clone())?;
    let mut diffs = vec![Poly::zero(); nt];
    for (k, &i) in gens.iter().enumerate() {
        diffs[gen_idx[k]] = q_into_bare.apply(&q.s.apply(r.diff_of(i)));
    }
    let tensor = Algebra::from_parts(2, vars, diffs, &BTreeSet::new())?;
    // forward: tensor -> Q
    let mut fwd = vec![Poly::zero(); nt];
    for j in 0..q.alg.nvars() {
        if idx_in_tensor[j] != usize::MAX {
            fwd[idx_in_tensor[j]] = q.alg.gen(j);
        }
    }
    for (k, &i) in gens.iter().enumerate() {
        fwd[gen_idx[k]] = q.s.image(i).clone();
    }
    let forward = AlgMap::new(&tensor, &q.alg, fwd)?;
    let inverse = AlgMap::new(&q.alg, &tensor, q_to_tensor)?;
    let mut facts = Vec::new();
    facts.push((
        "assignment is a chain map".into(),
        forward.check_chain_map().is_ok(),
    ));
    facts.push((
        "assignment preserves bidegrees".into(),
        forward.check_degrees(|w| w.to_vec()).is_ok(),
    ));
    facts.push((
        "inverse assignment is a chain map".into(),
        inverse.check_chain_map().is_ok(),
    ));
    facts.push((
        "assignments are mutually inverse".into(),
        forward.is_inverse_of(&inverse),
    ));
    let src = AlgebraModel::new(&tensor, bx);
    let tgt = AlgebraModel::new(&q.alg, bx);
    let comparison = compare_with_inverse(&forward, &inverse, &src, &tgt)?;
    Ok(IsoCheck::new(
        "base change Q(T) (x)_T R -> Q(R)".into(),
        facts,
        comparison,
    ))
}

/// Middle-degree-0 parts of `Q ⊗_π Δ = Q[v^±]` and `Δ ⊗_p Q = Q[w^±]`,
/// each compared with `Q` through the substitution that forgets the new
/// variable (`uv ↦ u`, resp. `wu ↦ u`).
pub fn check_middle_invariants(
    q: &KernelAlgebra,
    bx: &TruncationBox,
) -> Result<Vec<IsoCheck>, KernelError> {
    let mut out = Vec::new();
    for left in [true, false] {
        out.push(middle_invariants_one(q, bx, left)?);
    }
    Ok(out)
}

fn middle_invariants_one(
    q: &KernelAlgebra,
    bx: &TruncationBox,
    q_first: bool,
) -> Result<IsoCheck, KernelError> {
    let n = q.alg.nvars();
    let mut vars: Vec<VariableDecl> = Vec::with_capacity(n + 1);
    for v in q.alg.vars() {
        let (a, b) = (v.weight[0], v.weight[1]);
        let w = if q_first {
            vec![a, b, 0]
        } else {
            vec![0, a, b]
        };
        vars.push(VariableDecl::new(v.name.clone(), w, v.hdeg));
    }
    let taken: HashSet<String> = vars.iter().map(|v| v.name.clone()).collect();
    let (name, w) = if q_first {
        ("v", vec![0, -1, 1])
    } else {
        ("w", vec![-1, 1, 0])
    };
    let extra = fresh_name(&taken, name.into());
    vars.push(VariableDecl::new(extra.clone(), w, 0));
    let diffs: Vec<Poly> = q
        .alg
        .diffs()
        .iter()
        .map(|p| extend(p, 1))
        .chain([Poly::zero()])
        .collect();
    let big = Algebra::from_parts(3, vars, diffs, &[extra].into())?;
    // forward: forget the new variable
    let mut fwd: Vec<Poly> = (0..n).map(|j| q.alg.gen(j)).collect();
    fwd.push(q.alg.one());
    let forward = AlgMap::new(&big, &q.alg, fwd)?;
    // inverse: q ↦ q · new^k with k making the middle degree vanish
    let inv: Vec<Poly> = (0..n)
        .map(|j| {
            let w = &q.alg.var(j).weight;
            let k = if q_first { w[1] } else { -w[0] };
            mono_of(n + 1, &[(j, 1), (n, k as i32)])
        })
        .collect();
    let inverse = AlgMap::new(&q.alg, &big, inv)?;
    let mut facts = Vec::new();
    let id = (0..n).all(|j| forward.apply(inverse.image(j)) == q.alg.gen(j));
    facts.push(("substitution inverts the middle-degree lift".into(), id));
    let mid0 = (0..n).all(|j| inverse.image(j).iter().all(|(m, _)| big.weight(m)[1] == 0));
    facts.push(("lift lands in middle degree 0".into(), mid0));
    facts.push((
        "lift is a chain map".into(),
        inverse.check_chain_map().is_ok(),
    ));
    facts.push((
        "substitution is a chain map".into(),
        forward.check_chain_map().is_ok(),
    ));
    let a = Arc::clone(&big);
    let bx2 = bx.clone();
    let keep = Box::new(move |m: &Mono| {
        let w = a.weight(m);
        w[1] == 0 && bx2.contains_degree(&[w[0], w[2]])
    });
    let src = AlgebraModel::with_filter(&big, bx.budget, bx.hmin, 0, keep).with_pins(vec![(1, 0)]);
    let tgt = AlgebraModel::new(&q.alg, bx);
    let comparison = compare_with_inverse(&forward, &inverse, &src, &tgt)?;
    let label = if q_first {
        "middle invariants of Q (x)_s Delta"
    } else {
        "middle invariants of Delta (x)_p Q"
    };
    Ok(IsoCheck::new(label.into(), facts, comparison))
}

/// All base variables eligible for a localization check on each side.
pub fn eligible_localizations(r: &Algebra) -> Vec<(String, Side)> {
    let mut out = Vec::new();
    for v in r.vars() {
        if v.hdeg == 0 {
            if v.weight[0] > 0 {
                out.push((v.name.clone(), Side::S));
            } else if v.weight[0] < 0 {
                out.push((v.name.clone(), Side::P));
            }
        }
    }
    out
}
