use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_paraunit"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_example_grid() {
    let o = run(&["verify", "--family", data("example1.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("ok Ccc"));
}

#[test]
fn verify_rejects_a_broken_grid() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("example1.json")).unwrap().replace("[0, 3, 2, 3]", "[0, 3, 2, 1]");
    let path = dir.path().join("broken.json");
    std::fs::write(&path, text).unwrap();
    assert_eq!(run(&["verify", "--family", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn enum_count_only() {
    let o = run(&["enum", "--q", "3", "--N", "3", "--m", "2", "--count-only"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "486");
    let o = run(&["seed", "enum", "--q", "2", "--N", "2", "--m", "3", "--count-only"]);
    assert_eq!(stdout(&o).trim(), "48");
}

#[test]
fn enum_guard_from_environment() {
    let o = bin().args(["enum", "--q", "3", "--N", "3", "--m", "2", "--count-only"]).env("PARAUNIT_GUARD", "100").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("guard"));
}

#[test]
fn golay_pmepr_is_at_most_two() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("golay.json");
    let csv = dir.path().join("golay.csv");
    let params = r#"{"q":4,"pi":[2,0,1,3],"linear":[1,0,3,2],"constant":1}"#;
    let o = run(&["seed", "named", "--id", "1", "--m", "4", "--params", params, "--out", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["export", "--family", json.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["pmepr", "--family", csv.to_str().unwrap(), "--oversample", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let max: f64 = out.lines().last().unwrap().strip_prefix("max ").unwrap().parse().unwrap();
    assert!(max <= 2.0 + 1e-9, "{out}");
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn five_variable_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cca.json");
    let o = run(&["recur", "build", "--plan", data("five_var_plan.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(run(&["verify", "--family", out.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn output_is_independent_of_threads() {
    let a = run(&["--threads", "1", "seed", "gen", "--q", "4", "--N", "4", "--m", "2", "--seed", "7"]);
    let b = run(&["--threads", "4", "seed", "gen", "--q", "4", "--N", "4", "--m", "2", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["--threads", "1", "enum", "--q", "3", "--N", "3", "--m", "2"]);
    let b = run(&["--threads", "3", "enum", "--q", "3", "--N", "3", "--m", "2"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 487);
}

#[test]
fn genseed_with_block_mixing_permutation() {
    let o = run(&["genseed", "gen", "--q", "2", "--n", "2", "--m", "2", "--pi", "1,2,3,0"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["genseed", "gen", "--q", "2", "--n", "2", "--m", "2", "--pi", "1,2,3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bh_commands() {
    let o = run(&["bh", "list", "--q", "4", "--N", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("representatives"));
    assert_eq!(run(&["bh", "check", "--matrix", data("not_bh.json").to_str().unwrap()]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, r#"{"q":4,"N":2,"phases":[[0,0],[0,2]]}"#).unwrap();
    std::fs::write(&b, r#"{"q":4,"N":2,"phases":[[1,3],[3,3]]}"#).unwrap();
    assert_eq!(run(&["bh", "check", "--matrix", b.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(run(&["bh", "equiv", a.to_str().unwrap(), b.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["enum", "--q", "3"]).status.code(), Some(2));
    assert_eq!(run(&["seed", "named", "--id", "9", "--m", "2"]).status.code(), Some(2));
}
