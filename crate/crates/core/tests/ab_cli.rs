use std::path::Path;
use std::process::{Command, Output};

use rigid_dga::dga::{build_test_dga_c, serialize_dga, DegreeWindow};
use rigid_dga::padic::Ring;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigid-dga")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_paper_and_config_errors() {
    let o = run(&["verify-paper", "--prime", "3", "--precision", "4", "--window", "-40:40"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("RESULT: PASS\n"));

    let o = run(&["verify-paper", "--prime", "3", "--precision", "2", "--window", "-40:40"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("precision must be ≥ 4 for this window"));

    let o = run(&["verify-paper", "--prime", "4", "--precision", "4", "--window", "-40:40"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("prime must be an odd prime"));

    let o = run(&["verify-paper", "--window", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn homology_tables() {
    let o = run(&["homology", "--input", "builtin:C", "--prime", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let line = |deg: &str| out.lines().find(|l| l.trim_start().starts_with(&format!("{deg} |"))).unwrap().to_string();
    assert!(line("3").contains("Z/3"));
    assert!(line("11").contains("Z/9"));

    let dir = tempfile::tempdir().unwrap();
    let trivial = "prime = 3\nprecision = 2\n[window]\nmin = -4\nmax = 4\n[unit]\ndegree = 0\nidx = 0\n[[basis]]\ndegree = 0\nlabels = [\"1\"]\n";
    let path = write(dir.path(), "trivial.toml", trivial);
    let o = run(&["homology", "--input", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for l in stdout(&o).lines().skip(2) {
        let cells: Vec<&str> = l.split('|').map(str::trim).collect();
        let expected = if cells[0] == "0" { "Z_3" } else { "0" };
        assert_eq!(cells[1], expected, "{l}");
    }

    // d(t) = a, d(a) = 1: d^2 != 0 in degree 2
    let bad = "prime = 3\nprecision = 2\n[window]\nmin = -1\nmax = 3\n[unit]\ndegree = 0\nidx = 0\n\
[[basis]]\ndegree = 0\nlabels = [\"1\"]\n[[basis]]\ndegree = 1\nlabels = [\"a\"]\n[[basis]]\ndegree = 2\nlabels = [\"t\"]\n\
[[differential]]\ndegree = 1\nmatrix = [[1]]\n[[differential]]\ndegree = 2\nmatrix = [[1]]\n";
    let path = write(dir.path(), "bad.toml", bad);
    let o = run(&["homology", "--input", &path]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("degree 2"), "{}", stderr(&o));

    let path = write(dir.path(), "garbage.toml", "prime = [");
    assert_eq!(run(&["homology", "--input", &path]).status.code(), Some(2));
}

#[test]
fn massey_brackets() {
    let o = run(&["massey", "--i", "1", "--j", "1", "--prime", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("result: γ_2, indeterminacy 0"));

    let o = run(&["massey", "--i", "2", "--j", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("result: γ_1, indeterminacy 0"));

    let o = run(&["massey", "--i", "1", "--j", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("i+j must be nonzero"));

    // a free class in degree 3: p * [e] != 0
    let dir = tempfile::tempdir().unwrap();
    let free = "prime = 3\nprecision = 2\n[window]\nmin = -1\nmax = 9\n[[generators]]\nname = \"e\"\ndegree = 3\n";
    let path = write(dir.path(), "free.toml", free);
    let o = run(&["massey", "--input", &path, "--i", "1", "--j", "1"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("bracket undefined"));

    let o = run(&["massey", "--i", "1", "--j", "2", "--machine"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["named"], "γ_3");
    assert_eq!(v["indeterminacy_order"], 1);
}

#[test]
fn perturb_is_deterministic_and_plain_at_zero_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str, seed: &str, budget: &str| {
        let path = dir.path().join(name);
        let o = run(&["perturb", "--seed", seed, "--budget", budget, "--output", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read_to_string(path).unwrap()
    };
    let c = build_test_dga_c(Ring::new(3, 4).unwrap(), DegreeWindow::new(-40, 40).unwrap()).unwrap();
    assert_eq!(out("zero.toml", "0", "0"), serialize_dga(&c));
    let first = out("a.toml", "3", "8");
    assert_eq!(first, out("b.toml", "3", "8"));
    assert!(first.starts_with("# "));
    assert_ne!(first, out("c.toml", "4", "8"));
}

#[test]
fn synthesize_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    for (seed, budget) in [("42", "10"), ("7", "10")] {
        let path = dir.path().join(format!("p{seed}.toml"));
        let o = run(&["perturb", "--seed", seed, "--budget", budget, "--output", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let o = run(&["synthesize", "--input", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        let text = stdout(&o);
        assert!(text.contains("phi(e) = "));
        assert!(text.contains("phi(x^-1) = "));
        assert!(text.ends_with("RESULT: certified quasi-isomorphism C -> D\n"));
    }

    let o = run(&["synthesize", "--input", "builtin:C", "--machine"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "success");
    assert_eq!(v["synthesis"]["chains"]["theta_valuation"], 0);

    let bad = "prime = 3\nprecision = 4\n[window]\nmin = -40\nmax = 40\n\
[[generators]]\nname = \"x\"\ndegree = 4\ninvertible = true\n[[generators]]\nname = \"e\"\ndegree = 3\n\
[[differentials]]\nname = \"x\"\nexpression = \"9*e\"\n";
    let path = write(dir.path(), "corrupt.toml", bad);
    let o = run(&["synthesize", "--input", &path]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).contains("homology mismatch at degree 3"));
}
