use std::path::Path;
use std::process::{Command, Output};

fn cfgval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfgval")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

#[test]
fn json_report_for_the_counted_loop() {
    let out = cfgval(&["analyze", &data("counted_loop.cfg"), "--json", "-", "--report-nodes", "marked"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let i = &doc["main"]["2"]["i"];
    assert_eq!(i["signed"], serde_json::json!([0, 10]));
    assert_eq!(i["unsigned"], serde_json::json!([0, 10]));
    assert_eq!(i["bounded"], true);
    assert_eq!(doc["main"]["4"]["i"]["signed"], serde_json::json!([10, 10]));
    assert!(doc["main"].get("3").is_none());
}

#[test]
fn json_output_is_deterministic() {
    let a = cfgval(&["analyze", &data("sign_choice.cfg"), "--json", "-"]);
    let b = cfgval(&["analyze", &data("sign_choice.cfg"), "--json", "-"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_to_file() {
    let dir = std::env::temp_dir().join(format!("cfgval-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("r.json");
    let run = cfgval(&["analyze", &data("chained_guard.cfg"), "--json", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["main"]["2"]["v"]["signed"], serde_json::json!([5, 9]));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn text_wto_and_oracle() {
    let out = cfgval(&["analyze", &data("counted_loop.cfg"), "--text", "--wto", "--oracle", "seeds=3", "fuel=100"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("main: 1 (2 3) 4"), "{stdout}");
    assert!(stdout.contains("[0, 10]"), "{stdout}");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("no violations"), "{stderr}");
}

#[test]
fn errors_exit_with_1() {
    assert_eq!(cfgval(&["analyze", "/nonexistent/file.cfg"]).status.code(), Some(1));

    let bad = std::env::temp_dir().join(format!("cfgval-bad-{}.cfg", std::process::id()));
    std::fs::write(&bad, "1: x = -> 2\n").unwrap();
    let out = cfgval(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("1:"));
    std::fs::remove_file(bad).unwrap();

    let out = cfgval(&["analyze", &data("counted_loop.cfg"), "--oracle", "runs=3"]);
    assert_eq!(out.status.code(), Some(1));
}
