use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .display()
        .to_string()
}

fn mixcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixcheck"))
        .args(args)
        .env_remove("MIXCHECK_BUDGET")
        .output()
        .unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mixcheck"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn temp(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("mixcheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn check_reports_the_failing_query() {
    let o = mixcheck(&["check", &corpus("icell.mix")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("OddICell <: (BICell with Inc with Double): Valid"));
    assert!(out.contains("EvenICell <: (BICell with Inc with Double): Invalid (not proven)"));
    assert!(out.contains("ICell: 1/2 verified (50%)"));
}

#[test]
fn empty_file_is_silent() {
    let o = mixcheck(&["check", &temp("empty.mix", "")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn lin_prints_the_arrow_form() {
    let o = mixcheck(&["lin", &corpus("icell.mix"), "EvenICell"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "EvenICell ← Inc ← Double ← BICell ← ICell\n");
}

#[test]
fn subtype_exit_codes() {
    let f = corpus("icell.mix");
    assert_eq!(mixcheck(&["subtype", &f, "OddICell", "(BICell with Inc with Double)"]).status.code(), Some(0));
    assert_eq!(mixcheck(&["subtype", &f, "EvenICell", "(BICell with Inc with Double)"]).status.code(), Some(1));
    let o = mixcheck(&["subtype", &f, "Nope", "BICell"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Nope"));
}

#[test]
fn study_without_files_prints_empty_totals() {
    let o = mixcheck(&["study"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains('0'), "{}", out);
    assert!(out.contains('—'), "{}", out);
}

#[test]
fn study_over_corpus() {
    let o = mixcheck(&["study", &corpus("maths.mix"), &corpus("icell.mix")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("Maths"));
    assert!(out.contains("80"));
    let o = mixcheck(&["study", &corpus("sleek.mix")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_report_schema() {
    let o = mixcheck(&["--json", "check", &corpus("icell.mix")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["version"], "mixcheck-1");
    assert!(v["queries"].as_array().unwrap().len() >= 6);
    assert!(v.get("errors").is_none());
}

#[test]
fn parse_errors_carry_a_span() {
    let f = temp("bad.mix", "trait A.\ntrait B extends .\n");
    let o = mixcheck(&["check", &f]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.mix:2:"), "{}", err);
    assert!(o.stdout.is_empty());
}

#[test]
fn no_frame_rejects_leftover_heap() {
    let f = corpus("icell.mix");
    let q = "this::BICell<v> * v::Inc<v1> * v1::Double<null> |- this::BICell<u>";
    assert_eq!(mixcheck(&["entail", &f, q]).status.code(), Some(0));
    assert_eq!(mixcheck(&["--no-frame", "entail", &f, q]).status.code(), Some(1));
}

#[test]
fn budget_from_the_environment() {
    let f = corpus("sleek.mix");
    let q = "x::node<_, y> * y::node<_, null> |- x::ll<n> & n = 2";
    let run = |b: &str| {
        Command::new(env!("CARGO_BIN_EXE_mixcheck"))
            .args(["entail", &f, q])
            .env("MIXCHECK_BUDGET", b)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("0"), Some(1));
    assert_eq!(run("8"), Some(0));
}

#[test]
fn repl_keeps_declarations() {
    let o = with_stdin(
        &["--open-tail", "repl"],
        "interface trait ICell.\ntrait BICell extends ICell.\ntrait Inc\n  extends ICell.\nclass K extends BICell with Inc.\nsubtype K <: BICell.\nlin K.\n",
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("K <: BICell: Valid"), "{}", out);
    assert!(out.contains("K ← Inc ← BICell ← ICell"), "{}", out);
}

#[test]
fn repl_reports_errors_and_continues() {
    let o = with_stdin(&["repl"], "trait A.\ntrait A.\nlin A.\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("A\n"));
    assert!(!stderr(&o).is_empty());
}
