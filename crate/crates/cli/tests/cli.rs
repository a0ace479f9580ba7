use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use treelab::transduce::Dtop;
use treelab::{fixtures, Dbta};
use treelab_cli::formats;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn treelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treelab")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = treelab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn d(name: &str) -> String {
    data(name).display().to_string()
}

fn dbta_files() -> Vec<(&'static str, Dbta)> {
    let plain = |a| Dbta::new(a, []).unwrap();
    vec![
        ("bool_and.dbta", fixtures::l_true_and()),
        ("bool_or.dbta", fixtures::l_true_or()),
        ("bool.dbta", fixtures::l_true_bool()),
        ("pott.dbta", fixtures::l_pott()),
        ("pott6.dbta", fixtures::l_pott_redundant()),
        ("pott_k.dbta", fixtures::k_pott()),
        ("pair.dbta", fixtures::l_pair()),
        ("two.dbta", fixtures::l_two()),
        ("line_even.dbta", fixtures::l_line_even()),
        ("even.dbta", fixtures::l_even()),
        ("root_g.dbta", fixtures::root_is_g()),
        ("semilattice.dbta", plain(fixtures::semilattice())),
        ("lattice.dbta", plain(fixtures::lattice())),
    ]
}

fn dup() -> Dtop {
    Dtop::from_hom(&fixtures::hom_dup())
}

#[test]
#[ignore = "rewrites crates/cli/data"]
fn regenerate_data() {
    for (name, d) in dbta_files() {
        std::fs::write(data(name), formats::save_dbta(&d)).unwrap();
    }
    std::fs::write(data("dup.dtop"), formats::save_dtop(&dup())).unwrap();
}

#[test]
fn data_files_match_fixtures() {
    for (name, d) in dbta_files() {
        let text = std::fs::read_to_string(data(name)).unwrap();
        assert_eq!(text, formats::save_dbta(&d), "{name}");
        let back = formats::parse_dbta(&text).unwrap();
        assert_eq!(formats::save_dbta(&back), text, "{name}");
    }
    let text = std::fs::read_to_string(data("dup.dtop")).unwrap();
    assert_eq!(text, formats::save_dtop(&dup()));
    assert_eq!(formats::save_dtop(&formats::parse_dtop(&text).unwrap()), text);
}

#[test]
fn formats_round_trip() {
    let alpha = fixtures::sig_gcd();
    let text = formats::save_alphabet(&alpha);
    assert_eq!(formats::save_alphabet(&formats::parse_alphabet(&text).unwrap()), text);

    let k = fixtures::k_pott();
    let top = treelab::paths::mixes_dtta(&k, treelab::Caps::default()).unwrap();
    let text = formats::save_dtta(&top);
    assert_eq!(formats::save_dtta(&formats::parse_dtta(&text).unwrap()), text);

    let g = k.algebra().clone();
    let mh = treelab::transduce::dtop_to_matrix_hom(&dup(), &g).unwrap();
    let text = formats::save_matrix(&mh, &g);
    assert_eq!(formats::save_matrix(&formats::parse_matrix(&text, &g).unwrap(), &g), text);
}

#[test]
fn parser_reports_lines() {
    let e = formats::parse_dbta("letter a 0\ncarrier 2\nop a -> 5\n").unwrap_err();
    assert_eq!(e.line, 3);
    let e = formats::parse_dbta("letter a 0\ncarrier 2\n").unwrap_err();
    assert!(e.msg.contains("missing row"), "{e}");
    let e = formats::parse_dbta("letter a 0\ncarrier 1\nop a -> 0\nbogus\n").unwrap_err();
    assert_eq!(e.line, 4);
}

#[test]
fn universal_path_examples() {
    assert_eq!(stdout(&["universal-path", "--lang", &d("bool_and.dbta")]), "yes\n");
    let out = stdout(&["universal-path", "--lang", &d("bool_or.dbta")]);
    assert!(out.starts_with("no\ncounterexample: "), "{out}");
    assert_eq!(stdout(&["doubly-det", "--lang", &d("bool_and.dbta")]).lines().next(), Some("no"));
}

#[test]
fn minimize_example() {
    let out = stdout(&["minimize", "--lang", &d("pott.dbta")]);
    assert!(out.starts_with("3 elements\n") && out.contains("carrier 3\n"), "{out}");
    let out = stdout(&["minimize", "--lang", &d("pott6.dbta")]);
    assert!(out.starts_with("3 elements\n"), "{out}");
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("min.dbta");
    stdout(&["minimize", "--lang", &d("pott6.dbta"), "--out", target.to_str().unwrap()]);
    let m = formats::parse_dbta(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(m.algebra().size(), 3);
    let out = stdout(&["equiv", "--lang", target.to_str().unwrap(), "--other", &d("pott.dbta")]);
    assert_eq!(out, "yes\n");
}

#[test]
fn ctl_verify_example() {
    let out = stdout(&["ctl", "verify", "--formula", "E[lbl(f1) U lbl(f0)]", "--max-nodes", "8"]);
    assert!(out.starts_with("agree on ") && out.trim_end().ends_with(" trees"), "{out}");
    let out = stdout(&["ctl", "eval", "--formula", "E[lbl(f1) U lbl(f0)]", "--tree", "f1(f0)"]);
    assert_eq!(out, "true\n");
}

#[test]
fn equiv_gives_witness() {
    let dir = tempfile::tempdir().unwrap();
    let comp = dir.path().join("comp.dbta");
    stdout(&["bool", "--op", "complement", "--lang", &d("pott.dbta"), "--out", comp.to_str().unwrap()]);
    let out = stdout(&["equiv", "--lang", &d("pott.dbta"), "--other", comp.to_str().unwrap()]);
    assert_eq!(out, "no\nwitness: f0\naccepted-by: first\n");
}

#[test]
fn dtop_commands() {
    let out = stdout(&["dtop", "preimage", "--dtop", &d("dup.dtop"), "--lang", &d("pott_k.dbta")]);
    assert!(out.ends_with("\n") && out.contains(" elements"), "{out}");
    let out = stdout(&["dtop", "apply", "--dtop", &d("dup.dtop"), "--tree", "f1(f0)"]);
    assert!(!out.trim().is_empty());
}

#[test]
fn structure_commands() {
    let out = stdout(&["structure", "congruences", "--lang", &d("semilattice.dbta")]);
    assert!(out.ends_with("\n") && out.contains("congruences"), "{out}");
    let out = stdout(&["structure", "lattice-divides", "--lang", &d("lattice.dbta")]);
    assert_eq!(out.lines().next(), Some("yes"));
    let out = stdout(&["structure", "lattice-divides", "--lang", &d("semilattice.dbta")]);
    assert_eq!(out.lines().next(), Some("no"));
}

#[test]
fn output_is_deterministic() {
    let runs = [
        vec!["mixes", "--lang", "PATH"],
        vec!["ctl", "compile", "--formula", "E[lbl(f1) U lbl(f0)]", "--flatten"],
        vec!["--format", "tsv", "minimize", "--lang", "PATH"],
    ];
    let path = d("bool_or.dbta");
    for args in runs {
        let args: Vec<&str> = args.iter().map(|a| if *a == "PATH" { path.as_str() } else { a }).collect();
        let first = treelab(&args);
        let second = treelab(&args);
        assert!(first.status.success());
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn tsv_format() {
    let out = stdout(&["--format", "tsv", "universal-path", "--lang", &d("bool_and.dbta")]);
    assert_eq!(out, "verdict\tyes\n");
}

#[test]
fn exit_codes() {
    assert_eq!(treelab(&["--help"]).status.code(), Some(0));
    assert_eq!(treelab(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(treelab(&["accepts", "--lang", &d("pott.dbta"), "--tree", "f9"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dbta");
    std::fs::write(&bad, "letter a 0\ncarrier x\n").unwrap();
    assert_eq!(treelab(&["minimize", "--lang", bad.to_str().unwrap()]).status.code(), Some(2));
    let out = treelab(&["ctl", "compile", "--formula", "E[lbl(f1) U lbl(f0)]", "--max-width", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let missing = dir.path().join("missing.dbta");
    assert_eq!(treelab(&["minimize", "--lang", missing.to_str().unwrap()]).status.code(), Some(4));
}
