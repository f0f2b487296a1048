//! The `qif` binary: golden outputs, determinism, formats and exit codes.

use std::path::PathBuf;
use std::process::Command;

use qif_cli::prior::parse_hyper;
use qif_core::lang::parse_program;
use qif_core::semantics::space_of;

fn example(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name).to_string_lossy().into_owned()
}

fn qif(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qif")).args(args).env("QIF_COLOR", "0").output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("qif-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn golden_pre_gains() {
    let cases = [
        ("clamp_parity.kuif", "[x <= 1] MAX [x >= 1]"),
        ("halving.kuif", "MAX n in 0..4: [x div 2 = n]"),
        ("guess_bool.kuif", "[a or b] MAX [a or not b]"),
        ("search.kuif", "[x in A]"),
        ("guess10.kuif", "(MAX n in {0, 3, 6, 9}: [x = n]) PLUS (MAX n in {1, 2, 4, 5, 7, 8}: [x = n])"),
        ("most_money.kuif", "max(A)"),
        ("no_leak.kuif", "MAX i in 0..2: A[i]"),
        ("countdown.kuif", "1"),
    ];
    for (file, want) in cases {
        let (code, out, err) = qif(&["wp", &example(file)]);
        assert_eq!(code, 0, "{file}: {err}");
        assert_eq!(out.trim(), want, "{file}");
    }
}

#[test]
fn golden_run() {
    let (code, out, _) = qif(&["run", &example("halving.kuif"), "--prior", &example("halving_thirds.prior")]);
    assert_eq!(code, 0);
    let body: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(body, ["inner 1 : 1", "  x=0 : 1/4", "  x=1 : 1/4", "  x=3 : 1/4", "  x=4 : 1/4"]);
}

#[test]
fn trace_lists_every_statement() {
    let (code, out, _) = qif(&["--loops", "invariant", "wp", &example("search.kuif"), "--show-trace"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.first(), Some(&"{ [x in A] }"));
    assert_eq!(lines.last(), Some(&"{ MAX i in 0..2: [A[i] = x] }"));
    assert!(lines.iter().any(|l| l.contains("{ [x in A[n:]] }")));
}

#[test]
fn runs_are_deterministic() {
    for args in [
        vec!["check", "search_visible_flag.kuif", "--priors", "random:20:7"],
        vec!["run", "password.kuif", "--prior", "uniform"],
        vec!["--format", "json", "wp", "swap_cells.kuif", "--show-trace"],
    ] {
        let mut full: Vec<String> = args.iter().map(|a| a.to_string()).collect();
        let i = full.iter().position(|a| a.ends_with(".kuif")).unwrap();
        full[i] = example(&full[i]);
        let full: Vec<&str> = full.iter().map(String::as_str).collect();
        assert_eq!(qif(&full), qif(&full));
    }
}

#[test]
fn json_and_table_agree() {
    let file = example("guess10.kuif");
    let (_, table, _) = qif(&["run", &file, "--prior", "uniform"]);
    let (_, json, _) = qif(&["--format", "json", "run", &file, "--prior", "uniform"]);
    let p = parse_program(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let sp = space_of(&p.decls).unwrap();
    let from_table = parse_hyper(&sp, &table).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let mut rebuilt = String::new();
    for (k, inner) in v["hyper"].as_array().unwrap().iter().enumerate() {
        rebuilt += &format!("inner {} : {}\n", k + 1, inner["outer"].as_str().unwrap());
        for e in inner["inner"].as_array().unwrap() {
            rebuilt += &format!("x={} : {}\n", e["state"]["x"], e["p"].as_str().unwrap());
        }
    }
    assert_eq!(parse_hyper(&sp, &rebuilt).unwrap(), from_table);

    let (_, pre, _) = qif(&["wp", &file]);
    let (_, pre_json, _) = qif(&["--format", "json", "wp", &file]);
    let v: serde_json::Value = serde_json::from_str(&pre_json).unwrap();
    assert_eq!(v["pre"].as_str().unwrap(), pre.trim());
}

#[test]
fn check_passes_on_the_corpus_sample() {
    for file in ["guess_bool.kuif", "swap_cells.kuif", "countdown.kuif"] {
        let (code, out, _) = qif(&["check", &example(file), "--also-forward"]);
        assert_eq!(code, 0, "{file}\n{out}");
        assert!(out.lines().last().unwrap().contains(" 0 failed, 0 errors"), "{out}");
    }
}

#[test]
fn eval_on_prior_and_hyper() {
    let file = example("guess10.kuif");
    let gain = "MAX n in 0..9: [x = n]";
    let (_, table, _) = qif(&["run", &file, "--prior", "uniform"]);
    let hyper = scratch("guess10.hyper", &table);
    assert_eq!(qif(&["eval", &file, "--gain", gain, "--hyper", &hyper]).1.trim(), "1/5");
    assert_eq!(qif(&["eval", &file, "--gain", gain, "--prior", "uniform"]).1.trim(), "1/10");
    assert_eq!(qif(&["eval", &file, "--gain", gain, "--prior", &example("guess10.prior")]).1.trim(), "1/10");
}

#[test]
fn exit_codes() {
    let missing = qif(&["wp", "/nonexistent/program.kuif"]);
    assert_eq!(missing.0, 2);

    let bad = scratch("bad.kuif", "hidden x: int[0..3];\nx := x +\n");
    let (code, _, err) = qif(&["wp", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains("parse error at 3:1"), "{err}");

    let ill_typed = scratch("typed.kuif", "hidden x: int[0..3]; hidden b: bool;\nx := b\n");
    assert_eq!(qif(&["wp", &ill_typed]).0, 2);

    let out_of_range = scratch("range.kuif", "hidden x: int[0..3];\nx := x + 1\n@post { x }\n");
    assert_eq!(qif(&["run", &out_of_range, "--prior", "uniform"]).0, 3);

    let leak_blind = qif(&["check", &example("guess_bool.kuif"), "--unsound-no-branch-leak"]);
    assert_eq!(leak_blind.0, 1);
    assert!(leak_blind.1.lines().any(|l| l.starts_with("FAIL")));

    let wrong = scratch(
        "wrong.kuif",
        "hidden x: int[0..3];\nwhile x > 0 invariant { [x = 0] } do x := x - 1 od\n@post { MAX v in 0..3: [x = v] }\n",
    );
    let (code, _, err) = qif(&["--loops", "invariant", "wp", &wrong]);
    assert_eq!(code, 4, "{err}");
    assert!(err.contains("invariant"), "{err}");

    let tight = scratch("tight.kuif", "hidden x: int[0..3];\nwhile x > 0 do x := x - 1 od\n@post { [x = 0] }\n");
    assert_eq!(qif(&["--loop-bound", "2", "wp", &tight]).0, 3);
    assert_eq!(qif(&["--loop-bound", "3", "wp", &tight]).0, 0);
}
