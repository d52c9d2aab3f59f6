//! Canned presentations used by the verification suites.

use crate::algebra::{build_algebra, Algebra, AlgebraError, VariableDecl};
use std::sync::Arc;

fn base(name: &str, w: i64) -> VariableDecl {
    VariableDecl::new(name, vec![w], 0)
}

/// Rank-`l` Mukai flop: `k[x_i, y_i][e]`, weights `±1`, `de = Σ x_i y_i`.
pub fn mukai(l: usize) -> Result<Arc<Algebra>, AlgebraError> {
    let mut vars: Vec<VariableDecl> = (1..=l).map(|i| base(&format!("x{i}"), 1)).collect();
    vars.extend((1..=l).map(|i| base(&format!("y{i}"), -1)));
    vars.push(VariableDecl::new("e", vec![0], -1));
    let d: Vec<String> = (1..=l).map(|i| format!("x{i}*y{i}")).collect();
    let d = d.join(" + ");
    let diff = if l == 0 {
        vec![]
    } else {
        vec![("e", d.as_str())]
    };
    build_algebra(1, vars, &diff, &[])
}

/// Two points: `k[x1, x2][e]`, weights 1, `deg e = 2`, `de = x1 x2`.
pub fn twopoints() -> Result<Arc<Algebra>, AlgebraError> {
    let vars = vec![
        base("x1", 1),
        base("x2", 1),
        VariableDecl::new("e", vec![2], -1),
    ];
    build_algebra(1, vars, &[("e", "x1*x2")], &[])
}

/// Two Koszul generators: `de_i = x_i y_i`, a kernel with two homologies.
pub fn qnotasheaf() -> Result<Arc<Algebra>, AlgebraError> {
    let vars = vec![
        base("x1", 1),
        base("x2", 1),
        base("y1", -1),
        base("y2", -1),
        VariableDecl::new("e1", vec![0], -1),
        VariableDecl::new("e2", vec![0], -1),
    ];
    build_algebra(1, vars, &[("e1", "x1*y1"), ("e2", "x2*y2")], &[])
}

/// The affine base `k[x, y]` with weights `(1, -1)`.
pub fn affine_base() -> Result<Arc<Algebra>, AlgebraError> {
    build_algebra(1, vec![base("x", 1), base("y", -1)], &[], &[])
}
