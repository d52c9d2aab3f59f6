use std::process::{Command, Output};

fn fmkernel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmkernel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    fmkernel(args).status.code().expect("exit code")
}

fn scenario(name: &str) -> String {
    format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn passing_suite_exits_zero() {
    assert_eq!(code(&["verify", "qnotasheaf"]), 0);
    assert_eq!(code(&["run", &scenario("affine.toml")]), 0);
}

#[test]
fn hypothesis_violation_exits_two() {
    assert_eq!(code(&["verify", "twopoints"]), 2);
}

#[test]
fn input_errors_exit_three() {
    assert_eq!(code(&["verify", "bogus"]), 3);
    assert_eq!(code(&["verify", "mukai", "--l", "0"]), 3);
    assert_eq!(code(&["run", "/nonexistent.toml"]), 3);
    assert_eq!(code(&["--degrees", "3..1", "verify", "qnotasheaf"]), 3);
    assert_eq!(code(&["frobnicate"]), 3);
}

#[test]
fn failing_task_exits_one() {
    let dir = std::env::temp_dir().join(format!("fmkernel-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad-chart.toml");
    let text = std::fs::read_to_string(scenario("mukai.toml"))
        .unwrap()
        .replace(
            r#"tasks = ["q-build", "window", "property-p"]"#,
            r#"tasks = ["mu", "charts x=x1 y=x2"]"#,
        );
    std::fs::write(&path, text).unwrap();
    assert_eq!(code(&["run", path.to_str().unwrap()]), 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn structured_output_is_stable() {
    let args = [
        "--format",
        "structured",
        "--budget",
        "6",
        "verify",
        "affine-base",
    ];
    let a = fmkernel(&args);
    let b = fmkernel(&args);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with('{')));
    assert!(text.contains("\"E\":6"), "{text}");
}
