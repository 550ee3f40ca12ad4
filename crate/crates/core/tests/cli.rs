use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn egqel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egqel")).args(args).output().expect("binary runs")
}

fn example(name: &str) -> String {
    examples().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim_end().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn qel_on_the_examples() {
    let cases = [
        ("phi1.smt2", "(and (> 3 (+ k 1)) (= (+ k 1) (read a x)))"),
        ("phi4.smt2", "(= 6 (f (g 6)))"),
        ("phi5.smt2", "(and (= (f y) (f (g (f y)))) (= y (h (f y))))"),
        ("psi_cong.smt2", "true"),
    ];
    for (file, expected) in cases {
        let o = egqel(&["qel", &example(file), "--check", "--seed-order", "id"]);
        assert_eq!(o.status.code(), Some(0), "{file}: {}", stderr(&o));
        assert_eq!(stdout(&o), expected, "{file}");
    }
}

#[test]
fn qel_reports_variables() {
    let o = egqel(&["qel", &example("phi5.smt2")]);
    let err = stderr(&o);
    assert!(err.contains("eliminated: x\n"), "{err}");
    assert!(err.contains("remaining: y\n"), "{err}");
}

#[test]
fn mbp_on_the_example() {
    let expected = "(and (= i (read (fst (read p2 j)) i)) (= (read p2 j) (pair (fst (read p2 j)) l)) \
                    (= l (snd (read p2 j))) (= p2 (write p1 j (read p2 j))) (not (= (read p2 j) pp)))";
    for model in ["phi_mbp.model", "phi_mbp_alt.model"] {
        let o = egqel(&["mbp", &example("phi_mbp.smt2"), "--model", &example(model), "--check"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(stdout(&o), expected);
        assert!(stderr(&o).contains("eliminated: p a\n"));
    }
}

#[test]
fn dot_files_per_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dot");
    let o = egqel(&["qel", &example("phi5.smt2"), "--dot", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for stage in ["egraph", "find_defs", "refine_defs"] {
        let text = std::fs::read_to_string(out.join(format!("{stage}.dot"))).unwrap();
        assert!(text.starts_with("digraph"), "{stage}");
    }
    let o = egqel(&[
        "mbp",
        &example("phi_mbp.smt2"),
        "--model",
        &example("phi_mbp.model"),
        "--dot",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("saturated.dot").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.smt2");
    std::fs::write(&bad, "(declare-sort S 0)\n(assert (= x").unwrap();
    let o = egqel(&["qel", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2:"), "{}", stderr(&o));

    let o = egqel(&["qel", dir.path().join("missing.smt2").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = egqel(&["qel"]);
    assert_eq!(o.status.code(), Some(2));

    let wrong = dir.path().join("wrong.model");
    std::fs::write(&wrong, "(define-value i 0) (define-value j 0) (define-value l 0)").unwrap();
    let o = egqel(&["mbp", &example("phi_mbp.smt2"), "--model", wrong.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = egqel(&["mbp", &example("phi_mbp.smt2"), "--model", &example("phi_mbp.model"), "--budget", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("budget"));

    let o = egqel(&["qel", &example("phi5.smt2"), "--seed-order", "random"]);
    assert_eq!(o.status.code(), Some(2));

    let o = egqel(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn check_confirms_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.smt2");
    std::fs::write(
        &f,
        "(declare-sort S 0) (declare-const a S) (declare-fun f (S) S) (declare-var x S)
         (assert (= (f x) a)) (assert (= x a))",
    )
    .unwrap();
    let o = egqel(&["qel", f.to_str().unwrap(), "--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "(= a (f a))");
    assert!(stderr(&o).contains("equivalence holds"));
}
