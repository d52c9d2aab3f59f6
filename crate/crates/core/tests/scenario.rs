use fmkernel::cli::{
    parse_scenario, run_tasks, verify_suite, Format, Outcome, ScenarioError, SuiteParams, Task,
    UnknownSuite,
};
use fmkernel::pushforward::WindowSide;
use fmkernel::windows::WeightMode;

const MUKAI: &str = include_str!("../../../scenarios/mukai.toml");

fn with_tasks(tasks: &str) -> String {
    MUKAI.replace(
        r#"tasks = ["q-build", "window", "property-p"]"#,
        &format!("tasks = {tasks}"),
    )
}

#[test]
fn mukai_scenario_parses() {
    let s = parse_scenario(MUKAI).unwrap();
    assert_eq!(s.name, "mukai");
    assert_eq!(s.algebra.nvars(), 5);
    assert_eq!(s.tasks, [Task::QBuild, Task::Window(None), Task::PropertyP]);
    assert_eq!(s.truncation.budget, 8);
    assert_eq!(s.truncation.hmin, -4);
    assert_eq!(s.output.format, Format::Text);
}

#[test]
fn task_arguments() {
    let s = parse_scenario(&with_tasks(
        r#"["window side=minus", "window-image twist=-1 side=plus", "generator-check mode=wallcross", "sod-vanishing a=-1 b=0", "charts x=x1 y=y2", "koszul-tate ideal=x1*y1,x2*y2"]"#,
    ))
    .unwrap();
    assert_eq!(
        s.tasks,
        [
            Task::Window(Some(WindowSide::Minus)),
            Task::WindowImage {
                twist: -1,
                side: WindowSide::Plus
            },
            Task::GeneratorCheck(WeightMode::WallCross),
            Task::SodVanishing { a: -1, b: 0 },
            Task::Charts(Some(("x1".into(), "y2".into()))),
            Task::KoszulTate(vec!["x1*y1".into(), "x2*y2".into()]),
        ]
    );
}

#[test]
fn unknown_task_is_a_validation_error() {
    let err = parse_scenario(&with_tasks(r#"["frobnicate"]"#)).unwrap_err();
    assert!(matches!(err, ScenarioError::Validation(_)), "{err}");
}

#[test]
fn trailing_operator_is_a_syntax_error() {
    let text = MUKAI.replace(
        r#"differential = "x1*y1 + x2*y2""#,
        r#"differential = "x1*""#,
    );
    match parse_scenario(&text).unwrap_err() {
        ScenarioError::Syntax { line, column, .. } => {
            let l = text.lines().nth(line - 1).unwrap();
            assert!(l.starts_with("differential"));
            // points at the dangling `*`
            assert_eq!(&l[column - 1..column], "*");
        }
        e => panic!("expected a syntax error, got {e}"),
    }
}

#[test]
fn malformed_toml_is_a_syntax_error() {
    let err = parse_scenario("name = \n").unwrap_err();
    assert!(
        matches!(err, ScenarioError::Syntax { line: 1, .. }),
        "{err}"
    );
}

#[test]
fn weight_zero_base_variable_is_rejected() {
    let text = MUKAI.replace(
        r#"{ name = "x2", weight = 1 }"#,
        r#"{ name = "x2", weight = 0 }"#,
    );
    match parse_scenario(&text).unwrap_err() {
        ScenarioError::Validation(msg) => assert!(msg.contains("coefficient ring"), "{msg}"),
        e => panic!("expected a validation error, got {e}"),
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let text = format!("{MUKAI}\n[extra]\nkey = 1\n");
    assert!(parse_scenario(&text).is_err());
}

#[test]
fn mukai_tasks_pass() {
    let report = run_tasks(&parse_scenario(MUKAI).unwrap());
    assert_eq!(report.tasks.len(), 3);
    assert!(report.all_pass(), "{}", report.render_text());
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn empty_task_list_gives_empty_report() {
    let report = run_tasks(&parse_scenario(&with_tasks("[]")).unwrap());
    assert!(report.tasks.is_empty());
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn failing_task_does_not_abort_siblings() {
    let report = run_tasks(&parse_scenario(&with_tasks(r#"["charts x=x1 y=x2", "mu"]"#)).unwrap());
    assert_eq!(report.tasks.len(), 2);
    assert_eq!(report.tasks[0].verdict, Outcome::Error);
    assert!(report.tasks[0].error.is_some());
    assert_eq!(report.tasks[1].verdict, Outcome::Pass);
    assert_eq!(report.exit_code(), 1);
}

#[test]
fn sod_on_twopoints_is_flagged() {
    let report = verify_suite("twopoints", &SuiteParams::default()).unwrap();
    let sod = report.task("sod").unwrap();
    assert!(sod.hypothesis_violation);
    assert_eq!(report.exit_code(), 2);
}

#[test]
fn two_homology_suite() {
    let report = verify_suite("qnotasheaf", &SuiteParams::default()).unwrap();
    assert!(report.all_pass(), "{}", report.render_text());
    let chart = report.task("charts x=x1 y=y2").unwrap();
    assert!(chart
        .notes
        .iter()
        .chain(chart.facts.iter().map(|f| &f.name))
        .any(|s| s.contains("-1")));
}

#[test]
fn unknown_suite() {
    assert_eq!(
        verify_suite("bogus", &SuiteParams::default()).unwrap_err(),
        UnknownSuite("bogus".into())
    );
}

#[test]
fn structured_output_is_deterministic() {
    let s = parse_scenario(&with_tasks(r#"["q-build", "mu", "endo-ring"]"#)).unwrap();
    let a = run_tasks(&s).render(Format::Structured);
    let b = run_tasks(&s).render(Format::Structured);
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 4);
    assert!(
        a.lines().all(|l| l.starts_with('{') && l.ends_with('}')),
        "{a}"
    );
}
