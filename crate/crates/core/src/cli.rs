//! Scenario files, task dispatch, the canned verification suites and
//! report rendering.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "mukai"
//! tasks = ["q-build", "window", "property-p"]
//!
//! [base_ring]
//! variables = [{ name = "x1", weight = 1 }, { name = "y1", weight = -1 }]
//!
//! [[dg_generators]]
//! name = "e"
//! weight = 0
//! hdeg = -1
//! differential = "x1*y1"
//!
//! [truncation]
//! E = 8
//! hmin = -4
//! degree_range = [-4, 4]
//!
//! [output]
//! format = "text"
//! ```

use crate::algebra::{parse_element, Algebra, AlgebraError, Poly, VariableDecl};
use crate::chain::HilbertTable;
use crate::complexes::Verdict;
use crate::pushforward::{
    window_image, window_membership, CechError, WindowImageReport, WindowSide,
};
use crate::qkernel::{
    build_q, check_basechange, check_localization_iso, check_middle_invariants, check_structure,
    eligible_localizations, IsoCheck,
};
use crate::resolutions::{
    check_koszul_tate, check_property_p, resolution_k, self_tensor, KResolution,
};
use crate::slices::TruncationBox;
use crate::wallcross::{chart_homology, fiber_comparison, restrict_kernel, WallCrossError};
use crate::windows::{
    check_generator_weights, compute_mu, endo_ring, sod_report, sod_vanishing, WeightMode,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Validation(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown suite `{0}` (expected mukai, twopoints, qnotasheaf or affine-base)")]
pub struct UnknownSuite(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Structured,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "structured" => Ok(Format::Structured),
            _ => Err(format!(
                "unknown format `{s}` (expected text or structured)"
            )),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutputOptions {
    pub format: Format,
    pub path: Option<String>,
}

/// One requested computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Task {
    /// Build `Q` and check its structure maps.
    QBuild,
    /// Localization, base-change and middle-invariant checks.
    Structure,
    /// Window membership of all twists in the window, on one or both sides.
    Window(Option<WindowSide>),
    WindowImage {
        twist: i64,
        side: WindowSide,
    },
    PropertyP,
    /// The semi-free resolution `K → Q`.
    Resolution,
    /// `K ⊗ Q'` and `ρ`, reusing an earlier resolution.
    DerivedTensor,
    KoszulTate(Vec<String>),
    Mu,
    GeneratorCheck(WeightMode),
    Sod,
    SodVanishing {
        a: i64,
        b: i64,
    },
    EndoRing,
    Fiber,
    /// Chart homology of one chart, or of all of them.
    Charts(Option<(String, String)>),
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::QBuild => f.write_str("q-build"),
            Task::Structure => f.write_str("structure"),
            Task::Window(None) => f.write_str("window"),
            Task::Window(Some(s)) => write!(f, "window side={}", side_name(*s)),
            Task::WindowImage { twist, side } => {
                write!(f, "window-image twist={twist} side={}", side_name(*side))
            }
            Task::PropertyP => f.write_str("property-p"),
            Task::Resolution => f.write_str("resolution"),
            Task::DerivedTensor => f.write_str("derived-tensor"),
            Task::KoszulTate(g) => write!(f, "koszul-tate ideal={}", g.join(",")),
            Task::Mu => f.write_str("mu"),
            Task::GeneratorCheck(m) => write!(
                f,
                "generator-check mode={}",
                match m {
                    WeightMode::Plus => "plus",
                    WeightMode::Minus => "minus",
                    WeightMode::WallCross => "wallcross",
                }
            ),
            Task::Sod => f.write_str("sod"),
            Task::SodVanishing { a, b } => write!(f, "sod-vanishing a={a} b={b}"),
            Task::EndoRing => f.write_str("endo-ring"),
            Task::Fiber => f.write_str("fiber"),
            Task::Charts(None) => f.write_str("charts"),
            Task::Charts(Some((x, y))) => write!(f, "charts x={x} y={y}"),
        }
    }
}

fn side_name(s: WindowSide) -> &'static str {
    match s {
        WindowSide::Plus => "plus",
        WindowSide::Minus => "minus",
    }
}

fn parse_side(v: &str) -> Result<WindowSide, String> {
    match v {
        "plus" | "+" => Ok(WindowSide::Plus),
        "minus" | "-" => Ok(WindowSide::Minus),
        _ => Err(format!("unknown side `{v}`")),
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    /// `name key=value ...`
    fn from_str(s: &str) -> Result<Self, String> {
        let mut words = s.split_whitespace();
        let name = words.next().ok_or("empty task")?;
        let mut args: BTreeMap<&str, &str> = BTreeMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| format!("task argument `{w}` is not key=value"))?;
            args.insert(k, v);
        }
        let mut take = |k: &str| args.remove(k);
        let int = |v: Option<&str>, k: &str| -> Result<i64, String> {
            v.ok_or_else(|| format!("task `{name}` needs {k}="))?
                .parse()
                .map_err(|_| format!("{k} must be an integer"))
        };
        let task = match name {
            "q-build" => Task::QBuild,
            "structure" => Task::Structure,
            "window" => Task::Window(take("side").map(parse_side).transpose()?),
            "window-image" => {
                let twist = int(take("twist"), "twist")?;
                let side = take("side")
                    .map(parse_side)
                    .transpose()?
                    .unwrap_or(WindowSide::Plus);
                Task::WindowImage { twist, side }
            }
            "property-p" => Task::PropertyP,
            "resolution" => Task::Resolution,
            "derived-tensor" => Task::DerivedTensor,
            "koszul-tate" => {
                let ideal = take("ideal").ok_or("task `koszul-tate` needs ideal=")?;
                Task::KoszulTate(ideal.split(',').map(str::to_string).collect())
            }
            "mu" => Task::Mu,
            "generator-check" => Task::GeneratorCheck(match take("mode").unwrap_or("plus") {
                "plus" => WeightMode::Plus,
                "minus" => WeightMode::Minus,
                "wallcross" => WeightMode::WallCross,
                m => return Err(format!("unknown mode `{m}`")),
            }),
            "sod" => Task::Sod,
            "sod-vanishing" => Task::SodVanishing {
                a: int(take("a"), "a")?,
                b: int(take("b"), "b")?,
            },
            "endo-ring" => Task::EndoRing,
            "fiber" => Task::Fiber,
            "charts" => match (take("x"), take("y")) {
                (None, None) => Task::Charts(None),
                (Some(x), Some(y)) => Task::Charts(Some((x.into(), y.into()))),
                _ => return Err("task `charts` needs both x= and y=, or neither".into()),
            },
            _ => return Err(format!("unknown task `{name}`")),
        };
        if let Some(k) = args.keys().next() {
            return Err(format!("unexpected argument `{k}` for task `{name}`"));
        }
        Ok(task)
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub algebra: Arc<Algebra>,
    pub truncation: TruncationBox,
    pub tasks: Vec<Task>,
    pub output: OutputOptions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    #[serde(default)]
    tasks: Vec<toml::Spanned<String>>,
    base_ring: BaseRingFile,
    #[serde(default)]
    dg_generators: Vec<GeneratorFile>,
    #[serde(default)]
    truncation: TruncationFile,
    #[serde(default)]
    output: OutputFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseRingFile {
    variables: Vec<VariableFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableFile {
    name: String,
    weight: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorFile {
    name: String,
    weight: i64,
    hdeg: i64,
    #[serde(default)]
    differential: Option<toml::Spanned<String>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TruncationFile {
    #[serde(rename = "E")]
    budget: Option<u32>,
    hmin: Option<i64>,
    degree_range: Option<(i64, i64)>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OutputFile {
    format: Option<Format>,
    path: Option<String>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map(|i| offset - i).unwrap_or(offset + 1);
    (line, column)
}

fn syntax(text: &str, offset: usize, message: impl Into<String>) -> ScenarioError {
    let (line, column) = line_col(text, offset);
    ScenarioError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| {
        let offset = e.span().map(|s| s.start).unwrap_or(0);
        syntax(text, offset, e.message())
    })?;
    let mut decls: Vec<VariableDecl> = Vec::new();
    for v in &file.base_ring.variables {
        decls.push(VariableDecl::new(v.name.clone(), vec![v.weight], 0));
    }
    for g in &file.dg_generators {
        if g.hdeg >= 0 {
            return Err(ScenarioError::Validation(format!(
                "dg generator `{}` must have negative homological degree, got {}",
                g.name, g.hdeg
            )));
        }
        decls.push(VariableDecl::new(g.name.clone(), vec![g.weight], g.hdeg));
    }
    let invalid = |e: AlgebraError| ScenarioError::Validation(e.to_string());
    let bare = Algebra::from_parts(
        1,
        decls.clone(),
        vec![Poly::zero(); decls.len()],
        &BTreeSet::new(),
    )
    .map_err(invalid)?;
    let nbase = file.base_ring.variables.len();
    let mut diffs = vec![Poly::zero(); decls.len()];
    for (j, g) in file.dg_generators.iter().enumerate() {
        let Some(d) = &g.differential else { continue };
        // the value span includes the opening quote
        let start = d.span().start + 1;
        diffs[nbase + j] = parse_element(&bare, d.get_ref()).map_err(|e| {
            syntax(
                text,
                start + e.offset,
                format!("in differential of `{}`: {}", g.name, e.message),
            )
        })?;
    }
    let algebra = Algebra::from_parts(1, decls, diffs, &BTreeSet::new()).map_err(invalid)?;
    let default = TruncationBox::default_for(1);
    let t = &file.truncation;
    let truncation = TruncationBox::new(
        t.budget.unwrap_or(default.budget),
        t.hmin.unwrap_or(default.hmin),
        vec![t.degree_range.unwrap_or(default.degree_range[0])],
    )
    .map_err(|e| ScenarioError::Validation(e.to_string()))?;
    let mut tasks = Vec::new();
    for s in &file.tasks {
        let task: Task = s.get_ref().parse().map_err(ScenarioError::Validation)?;
        if let Task::KoszulTate(gens) = &task {
            for g in gens {
                parse_element(&algebra, g).map_err(|e| {
                    ScenarioError::Validation(format!(
                        "ideal generator `{g}` of task at byte {}: {e}",
                        s.span().start
                    ))
                })?;
            }
        }
        tasks.push(task);
    }
    Ok(Scenario {
        name: file.name.unwrap_or_else(|| "scenario".into()),
        algebra,
        truncation,
        tasks,
        output: OutputOptions {
            format: file.output.format.unwrap_or_default(),
            path: file.output.path,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Outcome::Pass,
            Verdict::Fail => Outcome::Fail,
            Verdict::Inconclusive => Outcome::Inconclusive,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Inconclusive => "inconclusive",
            Outcome::Error => "error",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fact {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Entry {
    pub degree: Vec<i64>,
    pub hdeg: i64,
    pub dim: usize,
    pub certified: bool,
    /// Value predicted by an independent carrier, where one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table {
    pub name: String,
    pub entries: Vec<Entry>,
}

impl Table {
    fn from_hilbert(name: impl Into<String>, t: &HilbertTable) -> Self {
        let entries = t
            .iter()
            .map(|((d, k), e)| Entry {
                degree: d.clone(),
                hdeg: *k,
                dim: e.dim,
                certified: e.certified,
                expected: None,
            })
            .collect();
        Table {
            name: name.into(),
            entries,
        }
    }

    pub fn get(&self, degree: &[i64], hdeg: i64) -> Option<&Entry> {
        self.entries
            .iter()
            .find(|e| e.degree == degree && e.hdeg == hdeg)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskReport {
    pub task: String,
    pub verdict: Outcome,
    pub hypothesis_violation: bool,
    pub facts: Vec<Fact>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall-clock time; omitted from the structured rendering so that it
    /// stays byte-identical across runs.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl TaskReport {
    fn new(task: &Task) -> Self {
        TaskReport {
            task: task.to_string(),
            verdict: Outcome::Inconclusive,
            hypothesis_violation: false,
            facts: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            error: None,
            elapsed: Duration::ZERO,
        }
    }

    fn fact(&mut self, name: impl Into<String>, holds: bool) {
        self.facts.push(Fact {
            name: name.into(),
            holds,
        });
    }

    fn iso(&mut self, c: &IsoCheck) {
        for (name, ok) in &c.facts {
            self.fact(format!("{}: {name}", c.label), *ok);
        }
        self.fact(
            format!(
                "{}: cone acyclic on certified pieces ({} certified, {} failing)",
                c.label, c.comparison.certified_pieces, c.comparison.failing_pieces
            ),
            c.comparison.verdict == Verdict::Pass,
        );
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Certification band of a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Band {
    #[serde(rename = "E")]
    pub budget: u32,
    pub hmin: i64,
    pub degree_range: (i64, i64),
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: String,
    pub band: Band,
    pub tasks: Vec<TaskReport>,
}

impl Report {
    /// 0 when everything passes, 1 on any failure, 2 when the only
    /// non-passing tasks are flagged as hypothesis violations.
    pub fn exit_code(&self) -> i32 {
        let bad = self.tasks.iter().filter(|t| t.verdict != Outcome::Pass);
        let mut code = 0;
        for t in bad {
            if t.hypothesis_violation {
                code = code.max(2);
            } else {
                return 1;
            }
        }
        if code == 0 && self.tasks.iter().any(|t| t.hypothesis_violation) {
            code = 2;
        }
        code
    }

    pub fn all_pass(&self) -> bool {
        self.tasks.iter().all(|t| t.verdict == Outcome::Pass)
    }

    pub fn task(&self, prefix: &str) -> Option<&TaskReport> {
        self.tasks.iter().find(|t| t.task.starts_with(prefix))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Structured => self.render_structured(),
        }
    }

    /// One JSON object per line: the header, then one per task.
    pub fn render_structured(&self) -> String {
        #[derive(Serialize)]
        struct Header<'a> {
            scenario: &'a str,
            band: &'a Band,
            tasks: usize,
            exit_code: i32,
        }
        let mut out = serde_json::to_string(&Header {
            scenario: &self.scenario,
            band: &self.band,
            tasks: self.tasks.len(),
            exit_code: self.exit_code(),
        })
        .expect("serializable");
        out.push('\n');
        for t in &self.tasks {
            out.push_str(&serde_json::to_string(t).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let b = &self.band;
        let _ = writeln!(
            s,
            "scenario {} (E = {}, hmin = {}, degrees {}..{})",
            self.scenario, b.budget, b.hmin, b.degree_range.0, b.degree_range.1
        );
        for t in &self.tasks {
            let flag = if t.hypothesis_violation {
                " [hypothesis violated]"
            } else {
                ""
            };
            let _ = writeln!(s, "[{}] {}{} ({:.2?})", t.verdict, t.task, flag, t.elapsed);
            if let Some(e) = &t.error {
                let _ = writeln!(s, "  error: {e}");
            }
            for f in &t.facts {
                let _ = writeln!(s, "  {} {}", if f.holds { "ok  " } else { "FAIL" }, f.name);
            }
            for table in &t.tables {
                let _ = writeln!(s, "  table {}:", table.name);
                for e in &table.entries {
                    let d: Vec<String> = e.degree.iter().map(|x| x.to_string()).collect();
                    let cert = if e.certified {
                        "certified"
                    } else {
                        "uncertified"
                    };
                    let exp = e
                        .expected
                        .map(|x| format!(", expected {x}"))
                        .unwrap_or_default();
                    let _ = writeln!(
                        s,
                        "    ({}) H^{} = {} [{cert}{exp}]",
                        d.join(","),
                        e.hdeg,
                        e.dim
                    );
                }
            }
            for n in &t.notes {
                let _ = writeln!(s, "  note: {n}");
            }
        }
        let count = |o: Outcome| self.tasks.iter().filter(|t| t.verdict == o).count();
        let _ = writeln!(
            s,
            "summary: {} pass, {} fail, {} inconclusive, {} error; exit code {}",
            count(Outcome::Pass),
            count(Outcome::Fail),
            count(Outcome::Inconclusive),
            count(Outcome::Error),
            self.exit_code()
        );
        s
    }
}

/// Results shared between tasks of one run.
#[derive(Default)]
struct Context {
    resolution: Option<KResolution>,
}

fn arity2(bx: &TruncationBox) -> TruncationBox {
    let (lo, hi) = bx.degree_range[0];
    TruncationBox::uniform(2, bx.budget, bx.hmin, lo, hi)
}

fn window_tables(rep: &mut TaskReport, w: &WindowImageReport) {
    let side = side_name(w.side);
    rep.tables.push(Table::from_hilbert(
        format!("window {side} twist {}", w.twist),
        &w.cohomology,
    ));
    if !w.uncertified.is_empty() {
        rep.tables.push(Table::from_hilbert(
            format!("window {side} twist {} uncertified", w.twist),
            &w.uncertified,
        ));
    }
    for (label, v) in &w.terms {
        let state = match v {
            Verdict::Pass => "acyclic",
            Verdict::Fail => "not acyclic",
            Verdict::Inconclusive => "acyclicity undetermined",
        };
        rep.notes.push(format!(
            "side {side} twist {}: Čech term {label} {state}",
            w.twist
        ));
    }
    if let Some(c) = &w.comparison {
        rep.fact(
            format!(
                "side {side} twist {}: R(i) -> Čech image isomorphic ({} certified, {} failing)",
                w.twist, c.certified_pieces, c.failing_pieces
            ),
            c.verdict == Verdict::Pass,
        );
    }
    for d in &w.diagnostics {
        rep.notes
            .push(format!("side {side} twist {}: {d}", w.twist));
    }
    if !w.hypothesis_ok {
        rep.hypothesis_violation = true;
    }
}

type TaskResult = Result<(), String>;

fn run_one(task: &Task, s: &Scenario, ctx: &mut Context, rep: &mut TaskReport) -> TaskResult {
    let r = &s.algebra;
    let bx = &s.truncation;
    let err = |e: &dyn std::error::Error| e.to_string();
    match task {
        Task::QBuild => {
            let q = build_q(r).map_err(|e| err(&e))?;
            let ok = check_structure(&q).is_ok();
            rep.fact(
                "p and s are chain maps of the expected bidegrees; η p = π, η s = σ",
                ok,
            );
            for i in 0..q.alg.nvars() {
                let d = q.alg.diff_of(i);
                if !d.is_zero() {
                    rep.notes
                        .push(format!("d {} = {}", q.alg.var(i).name, q.alg.format(d)));
                }
            }
            rep.verdict = Verdict::from_bool(ok).into();
        }
        Task::Structure => {
            let q = build_q(r).map_err(|e| err(&e))?;
            let mut checks = Vec::new();
            for (t, side) in eligible_localizations(r) {
                checks.push(check_localization_iso(&q, &t, side, bx).map_err(|e| err(&e))?);
            }
            checks.push(check_basechange(r, bx).map_err(|e| err(&e))?);
            checks.extend(check_middle_invariants(&q, bx).map_err(|e| err(&e))?);
            for c in &checks {
                rep.iso(c);
            }
            rep.verdict = Verdict::all(checks.iter().map(|c| c.verdict)).into();
        }
        Task::Window(side) => {
            let sides = match side {
                Some(s) => vec![*s],
                None => vec![WindowSide::Plus, WindowSide::Minus],
            };
            let mut verdict = Verdict::Pass;
            let mut any = false;
            for side in sides {
                match window_membership(r, side, bx) {
                    Ok(w) => {
                        let t: Vec<String> = w.twists.iter().map(|t| t.to_string()).collect();
                        rep.notes.push(format!(
                            "side {}: window twists [{}]",
                            side_name(side),
                            t.join(", ")
                        ));
                        if w.degenerate {
                            rep.notes
                                .push(format!("side {}: empty window", side_name(side)));
                        }
                        for wi in &w.reports {
                            window_tables(rep, wi);
                        }
                        verdict = verdict.and(w.verdict);
                        any = true;
                    }
                    Err(CechError::EmptySide(_)) => {
                        rep.notes.push(format!(
                            "side {}: no variables of this sign, nothing to check",
                            side_name(side)
                        ));
                    }
                    Err(e) => return Err(e.to_string()),
                }
            }
            rep.verdict = if any {
                verdict.into()
            } else {
                Outcome::Inconclusive
            };
        }
        Task::WindowImage { twist, side } => {
            let w = window_image(r, *twist, *side, bx).map_err(|e| err(&e))?;
            window_tables(rep, &w);
            rep.fact(
                format!(
                    "{} certified classes in nonzero Čech degree",
                    w.higher_classes
                ),
                w.higher_classes == 0,
            );
            rep.verdict = w.verdict.into();
        }
        Task::PropertyP => {
            let p = check_property_p(r, bx).map_err(|e| err(&e))?;
            let fmt_set = |s: &BTreeSet<i64>| {
                s.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            rep.fact(
                format!(
                    "(K ⊗ Q)₀ homology concentrated in degree 0 (degrees {{{}}})",
                    fmt_set(&p.tensor_degrees)
                ),
                p.tensor_degrees.iter().all(|&k| k == 0),
            );
            rep.fact(
                format!(
                    "Q homology concentrated in degree 0 (degrees {{{}}})",
                    fmt_set(&p.kernel_degrees)
                ),
                p.kernel_degrees.iter().all(|&k| k == 0),
            );
            rep.fact(
                format!(
                    "ρ is a slicewise isomorphism ({} certified, {} failing)",
                    p.rho.certified_pieces, p.rho.failing_pieces
                ),
                p.rho.verdict == Verdict::Pass,
            );
            let (a, b, c, d) = p.generators;
            rep.notes.push(format!(
                "resolution generators adjoined: {a} for positive variables, {c} for negative variables, \
                 {b} for non-negative dg generators, {d} for negative dg generators"
            ));
            rep.verdict = p.verdict.into();
        }
        Task::Resolution => {
            let q = Arc::new(build_q(r).map_err(|e| err(&e))?);
            let (k, cmp) = resolution_k(&q, &arity2(bx)).map_err(|e| err(&e))?;
            rep.fact(
                format!(
                    "augmentation K -> Q is a quasi-isomorphism ({} certified, {} failing)",
                    cmp.certified_pieces, cmp.failing_pieces
                ),
                cmp.verdict == Verdict::Pass,
            );
            rep.notes
                .extend(k.presentation.export().lines().map(str::to_string));
            rep.verdict = cmp.verdict.into();
            ctx.resolution = Some(k);
        }
        Task::DerivedTensor => {
            if ctx.resolution.is_none() {
                let q = Arc::new(build_q(r).map_err(|e| err(&e))?);
                let (k, _) = resolution_k(&q, &arity2(bx)).map_err(|e| err(&e))?;
                rep.notes
                    .push("no earlier resolution task; resolved here".into());
                ctx.resolution = Some(k);
            }
            let k = ctx.resolution.as_ref().expect("set above");
            let st = self_tensor(k).map_err(|e| err(&e))?;
            rep.fact(
                "ρ: K ⊗ Q' -> Q is a chain map",
                st.rho.check_chain_map().is_ok(),
            );
            rep.notes
                .push(format!("K ⊗ Q' has {} generators", st.alg.nvars()));
            rep.verdict = Outcome::Pass;
        }
        Task::KoszulTate(gens) => {
            let ideal: Vec<Poly> = gens
                .iter()
                .map(|g| parse_element(r, g).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let kt = check_koszul_tate(r, &ideal, bx.hmin, bx).map_err(|e| err(&e))?;
            rep.notes
                .extend(kt.presentation.export().lines().map(str::to_string));
            for h in (bx.hmin + 1..0).rev() {
                let n = kt.presentation.adjoined_in_degree(h).len();
                rep.notes
                    .push(format!("{n} generators adjoined in homological degree {h}"));
            }
            let entries = kt
                .h0
                .iter()
                .map(|(d, &(got, want))| Entry {
                    degree: d.clone(),
                    hdeg: 0,
                    dim: got,
                    certified: true,
                    expected: Some(want),
                })
                .collect();
            rep.tables.push(Table {
                name: "H^0 against T/I".into(),
                entries,
            });
            rep.fact(
                "H^0 equals T/I on every certified piece",
                kt.h0.values().all(|(a, b)| a == b),
            );
            rep.fact(
                format!(
                    "{} certified classes strictly between hmin and 0",
                    kt.higher_classes
                ),
                kt.higher_classes == 0,
            );
            rep.verdict = kt.verdict.into();
        }
        Task::Mu => {
            let m = compute_mu(r).map_err(|e| err(&e))?;
            rep.notes
                .push(format!("μ₊ = {}, μ₋ = {}", m.mu_plus, m.mu_minus));
            rep.fact("Calabi–Yau (μ₊ + μ₋ = 0)", m.calabi_yau());
            rep.verdict = Outcome::Pass;
        }
        Task::GeneratorCheck(mode) => {
            let bad = check_generator_weights(r, *mode);
            rep.fact(
                "every dg generator satisfies the weight hypothesis",
                bad.is_empty(),
            );
            if !bad.is_empty() {
                rep.hypothesis_violation = true;
                rep.notes.push(format!("violated by: {}", bad.join(", ")));
            }
            rep.verdict = Verdict::from_bool(bad.is_empty()).into();
        }
        Task::Sod => {
            let sod = sod_report(r, bx).map_err(|e| err(&e))?;
            rep.notes.extend(
                sod.to_string()
                    .lines()
                    .filter(|l| !l.starts_with("verdict"))
                    .map(str::to_string),
            );
            for st in &sod.steps {
                rep.fact(
                    format!("vanishing for window [{}, {}]", st.a, st.b),
                    st.verdict == Verdict::Pass,
                );
            }
            if let Some(e) = &sod.endo {
                rep.fact(
                    format!("endomorphism ring matches its carrier: {:?}", e.dims()),
                    e.verdict == Verdict::Pass,
                );
            }
            rep.hypothesis_violation = !sod.violations.is_empty();
            rep.verdict = sod.verdict.into();
        }
        Task::SodVanishing { a, b } => {
            let v = sod_vanishing(r, *a, *b, bx).map_err(|e| err(&e))?;
            for e in &v.entries {
                let entries = e
                    .slice
                    .certified_dims()
                    .iter()
                    .map(|(&k, &dim)| Entry {
                        degree: vec![e.twist],
                        hdeg: k,
                        dim,
                        certified: true,
                        expected: Some(0),
                    })
                    .collect();
                rep.tables.push(Table {
                    name: format!("twist {}", e.twist),
                    entries,
                });
            }
            rep.fact(
                format!("sharpness probe at twist {} is nonzero", b + 1),
                v.probe_nonzero,
            );
            rep.verdict = v.verdict.into();
        }
        Task::EndoRing => {
            let e = endo_ring(r, bx).map_err(|e| err(&e))?;
            let entries = e
                .invariant
                .iter()
                .map(|(&k, &dim)| Entry {
                    degree: vec![0],
                    hdeg: k,
                    dim,
                    certified: e.certified,
                    expected: Some(e.carrier.get(&k).copied().unwrap_or(0)),
                })
                .collect();
            rep.tables.push(Table {
                name: "endomorphism ring".into(),
                entries,
            });
            rep.notes.push(format!("dimensions {:?}", e.dims()));
            rep.verdict = e.verdict.into();
        }
        Task::Fiber => match fiber_comparison(r, bx) {
            Ok(f) => {
                rep.notes.push(format!(
                    "invariant generators (budget {}): {}",
                    f.generator_budget,
                    f.invariant_generators.join(", ")
                ));
                rep.fact(
                    "p(g) = s(g) for every invariant generator g",
                    f.relations_hold,
                );
                for c in &f.charts {
                    let (x, y) = &c.chart;
                    rep.fact(
                        format!("chart ({x}, {y}): u^deg({x}) = p({x})^-1 s({x})"),
                        c.witness,
                    );
                    rep.notes.push(format!(
                        "chart ({x}, {y}): module generators {}",
                        c.module_generators.join(", ")
                    ));
                    if let Some(iso) = &c.iso {
                        rep.iso(iso);
                    }
                }
                if f.charts.is_empty() {
                    rep.notes
                        .push("no charts: the comparison is degenerate".into());
                }
                rep.verdict = f.verdict.into();
            }
            Err(WallCrossError::HypothesisViolation(v)) => {
                rep.hypothesis_violation = true;
                rep.notes
                    .push(format!("dg generators of nonzero weight: {}", v.join(", ")));
                rep.verdict = Outcome::Inconclusive;
            }
            Err(e) => return Err(e.to_string()),
        },
        Task::Charts(which) => {
            let charts: Vec<(String, String)> = match which {
                Some(c) => vec![c.clone()],
                None => restrict_kernel(r)
                    .map_err(|e| err(&e))?
                    .into_iter()
                    .map(|c| (c.x, c.y))
                    .collect(),
            };
            let mut verdict = Verdict::Pass;
            for (x, y) in charts {
                let h = chart_homology(r, &x, &y, bx).map_err(|e| err(&e))?;
                let rows: Vec<String> = h.nonzero_rows.iter().map(|k| k.to_string()).collect();
                rep.notes.push(format!(
                    "chart ({x}, {y}): homology rows [{}], {} of {} pieces certified",
                    rows.join(", "),
                    h.certified_pieces,
                    h.pieces
                ));
                rep.tables
                    .push(Table::from_hilbert(format!("chart ({x}, {y})"), &h.table));
                let carriers: Vec<_> = [&h.h0_carrier, &h.h1_carrier]
                    .into_iter()
                    .flatten()
                    .collect();
                for c in &carriers {
                    rep.fact(
                        format!(
                            "chart ({x}, {y}): {} ({} pieces match, {} differ)",
                            c.description,
                            c.matched,
                            c.mismatched.len()
                        ),
                        c.verdict == Verdict::Pass,
                    );
                    verdict = verdict.and(c.verdict);
                }
                if carriers.is_empty() {
                    let sheaf = h.h_minus_one_vanishes() && h.certified_pieces > 0;
                    rep.fact(
                        format!("chart ({x}, {y}): homology concentrated in degree 0"),
                        sheaf,
                    );
                    verdict = verdict.and(Verdict::from_bool(sheaf));
                }
            }
            rep.verdict = verdict.into();
        }
    }
    Ok(())
}

/// Runs every task in order; a failing task never aborts its siblings.
pub fn run_tasks(s: &Scenario) -> Report {
    let mut ctx = Context::default();
    let mut tasks = Vec::with_capacity(s.tasks.len());
    for task in &s.tasks {
        let mut rep = TaskReport::new(task);
        let start = Instant::now();
        if let Err(e) = run_one(task, s, &mut ctx, &mut rep) {
            rep.verdict = Outcome::Error;
            rep.error = Some(e);
        }
        rep.elapsed = start.elapsed();
        tasks.push(rep);
    }
    let b = &s.truncation;
    Report {
        scenario: s.name.clone(),
        band: Band {
            budget: b.budget,
            hmin: b.hmin,
            degree_range: b.degree_range[0],
        },
        tasks,
    }
}

/// Parameters of the canned suites.
#[derive(Clone, Debug)]
pub struct SuiteParams {
    /// Rank of the Mukai datum.
    pub l: usize,
    pub truncation: TruncationBox,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            l: 2,
            truncation: TruncationBox::default_for(1),
        }
    }
}

const SUITES: [&str; 4] = ["mukai", "twopoints", "qnotasheaf", "affine-base"];

/// The scenario run by a canned suite.
pub fn suite_scenario(name: &str, params: &SuiteParams) -> Result<Scenario, UnknownSuite> {
    use crate::catalog;
    if !SUITES.contains(&name) {
        return Err(UnknownSuite(name.into()));
    }
    let parse = |ts: &[&str]| {
        ts.iter()
            .map(|t| t.parse::<Task>().expect("canned task"))
            .collect::<Vec<_>>()
    };
    let (algebra, tasks) = match name {
        "mukai" => (
            catalog::mukai(params.l),
            parse(&["q-build", "window", "property-p", "fiber", "charts"]),
        ),
        "twopoints" => (
            catalog::twopoints(),
            parse(&[
                "generator-check mode=plus",
                "window-image twist=0 side=plus",
                "sod",
            ]),
        ),
        "qnotasheaf" => (
            catalog::qnotasheaf(),
            parse(&["q-build", "charts x=x1 y=y2", "charts", "endo-ring"]),
        ),
        _ => (
            catalog::affine_base(),
            parse(&[
                "q-build",
                "structure",
                "window",
                "property-p",
                "koszul-tate ideal=x^2,x*y",
            ]),
        ),
    };
    let label = if name == "mukai" {
        format!("mukai l={}", params.l)
    } else {
        name.to_string()
    };
    let algebra = algebra.map_err(|_| UnknownSuite(label.clone()))?;
    Ok(Scenario {
        name: label,
        algebra,
        truncation: params.truncation.clone(),
        tasks,
        output: OutputOptions::default(),
    })
}

/// Runs a canned suite end to end.
pub fn verify_suite(name: &str, params: &SuiteParams) -> Result<Report, UnknownSuite> {
    Ok(run_tasks(&suite_scenario(name, params)?))
}
