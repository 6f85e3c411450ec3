//! End-to-end runs of the `platec` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(name)
}

fn platec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_platec"))
        .args(args)
        .env("PLATEC_NO_COLOR", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn translate_lda(out: &Path, extra: &[&str]) -> Output {
    let input = corpus("lda.bpn");
    let hints = corpus("lda.hints");
    let mut args = vec![
        "translate",
        input.to_str().unwrap(),
        "--hints",
        hints.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    platec(&args)
}

#[test]
fn lda_end_to_end() {
    let tmp = TempDir::new().unwrap();
    let o = translate_lda(tmp.path(), &["--emit", "json,dot,ddl"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        stdout(&o).trim(),
        "LDA: 4 entities, 2 associations, 3 direct relationships (stage reduced)"
    );
    assert_eq!(listing(tmp.path()), vec!["lda.ddl.sql", "lda.erm.dot", "lda.erm.json"]);
    for name in ["lda.ddl.sql", "lda.erm.dot", "lda.erm.json"] {
        assert_eq!(
            fs::read_to_string(tmp.path().join(name)).unwrap(),
            fs::read_to_string(corpus(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn stop_after_apm_writes_only_the_atomic_model() {
    let tmp = TempDir::new().unwrap();
    let o = translate_lda(tmp.path(), &["--stop-after", "apm", "--emit", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "LDA: 4 plates, 6 atoms, 0 edges (stage apm)");
    assert_eq!(listing(tmp.path()), vec!["lda.apm.json"]);
    let text = fs::read_to_string(tmp.path().join("lda.apm.json")).unwrap();
    assert!(text.contains("\"schema\": \"apm/v1\""));
}

#[test]
fn ddl_before_reduction_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let o = translate_lda(tmp.path(), &["--stop-after", "raw-erm", "--emit", "json,mermaid,ddl"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(listing(tmp.path()).is_empty());
}

#[test]
fn missing_input_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = platec(&["translate", "no-such-model.bpn", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("no-such-model.bpn"));
    assert!(!out.exists());
}

#[test]
fn apm_json_resumes_like_a_full_run() {
    let full = TempDir::new().unwrap();
    let staged = TempDir::new().unwrap();
    assert!(translate_lda(full.path(), &["--emit", "json,dot,mermaid,ddl"]).status.success());
    assert!(translate_lda(staged.path(), &["--stop-after", "apm"]).status.success());

    let apm = staged.path().join("lda.apm.json");
    let hints = corpus("lda.hints");
    let o = platec(&[
        "translate",
        apm.to_str().unwrap(),
        "--hints",
        hints.to_str().unwrap(),
        "--emit",
        "json,dot,mermaid,ddl",
        "--out-dir",
        staged.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in listing(full.path()) {
        assert_eq!(
            fs::read(full.path().join(&name)).unwrap(),
            fs::read(staged.path().join(&name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn raw_erm_json_resumes_like_a_full_run() {
    let full = TempDir::new().unwrap();
    let staged = TempDir::new().unwrap();
    assert!(translate_lda(full.path(), &[]).status.success());
    assert!(translate_lda(staged.path(), &["--stop-after", "raw-erm"]).status.success());
    let raw = staged.path().join("lda.raw-erm.json");
    let hints = corpus("lda.hints");
    let o = platec(&[
        "translate",
        raw.to_str().unwrap(),
        "--hints",
        hints.to_str().unwrap(),
        "--out-dir",
        staged.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        fs::read(full.path().join("lda.erm.json")).unwrap(),
        fs::read(staged.path().join("lda.erm.json")).unwrap()
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [a.path(), b.path()] {
        assert!(translate_lda(dir, &["--emit", "json,dot,mermaid,ddl"]).status.success());
    }
    let names = listing(a.path());
    assert_eq!(names, listing(b.path()));
    assert_eq!(names.len(), 4);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn unresolved_duplicates() {
    let tmp = TempDir::new().unwrap();
    let input = corpus("lda.bpn");
    let out = tmp.path().to_str().unwrap();
    let input = input.to_str().unwrap();

    let lenient = platec(&["translate", input, "--out-dir", out]);
    assert_eq!(lenient.status.code(), Some(0), "{}", stderr(&lenient));
    assert!(stdout(&lenient).contains("4 direct relationships (stage reduced-with-warnings)"));
    assert!(stderr(&lenient).contains("UNRESOLVED_DUPLICATE"));

    let strict_dir = tmp.path().join("strict");
    let strict = platec(&["translate", input, "--strict", "--out-dir", strict_dir.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(!strict_dir.exists());

    let ddl_dir = tmp.path().join("ddl");
    let ddl = platec(&["translate", input, "--emit", "ddl", "--out-dir", ddl_dir.to_str().unwrap()]);
    assert_eq!(ddl.status.code(), Some(2));
    assert!(!ddl_dir.exists());

    let assumed = platec(&["translate", input, "--assume-equivalent", "--strict", "--emit", "ddl", "--out-dir", out]);
    assert_eq!(assumed.status.code(), Some(0), "{}", stderr(&assumed));
    assert_eq!(
        fs::read_to_string(tmp.path().join("lda.ddl.sql")).unwrap(),
        fs::read_to_string(corpus("lda.ddl.sql")).unwrap()
    );
}

#[test]
fn validate_exit_codes() {
    let ok = platec(&["validate", corpus("lda.bpn").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok).trim(), "LDA: 0 error(s), 0 warning(s)");

    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.bpn");
    fs::write(&bad, "model M\nvar x : real[K] hidden\n").unwrap();
    let o = platec(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.bpn:2:14: error UNDECLARED_INDEX"), "{}", stderr(&o));
    assert!(!stderr(&o).contains('\x1b'));

    let t = platec(&["translate", bad.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(t.status.code(), Some(1));
    assert_eq!(listing(tmp.path()), vec!["bad.bpn"]);

    assert_eq!(platec(&["validate", "absent.bpn"]).status.code(), Some(3));
}

#[test]
fn usage_errors() {
    assert_eq!(platec(&["translate"]).status.code(), Some(4));
    assert_eq!(platec(&["translate", "x.bpn", "--stop-after", "never"]).status.code(), Some(4));
    assert_eq!(platec(&["translate", "x.bpn", "--emit", "png"]).status.code(), Some(4));
    assert_eq!(platec(&["--help"]).status.code(), Some(0));
}

fn copy_corpus(to: &Path) {
    for name in listing(&corpus("")) {
        fs::copy(corpus(&name), to.join(&name)).unwrap();
    }
}

#[test]
fn corpus_check_on_pristine_corpus() {
    let o = platec(&["corpus-check", "--corpus", corpus("").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fixtures = platec::corpus_fixtures(&corpus("")).unwrap();
    assert!(fixtures.len() >= 6);
    assert!(stdout(&o).starts_with(&format!("{} fixtures, ", fixtures.len())));
    assert!(stdout(&o).trim_end().ends_with(", 0 drifted"));
}

#[test]
fn corpus_check_reports_first_drifting_byte() {
    let tmp = TempDir::new().unwrap();
    copy_corpus(tmp.path());
    let golden = tmp.path().join("matrix.erm.json");
    let mut bytes = fs::read(&golden).unwrap();
    bytes[20] ^= 0x20;
    fs::write(&golden, &bytes).unwrap();
    fs::remove_file(tmp.path().join("vector.erm.mmd")).unwrap();

    let o = platec(&["corpus-check", "--corpus", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("matrix.erm.json: drift at byte 20 (line "), "{err}");
    assert!(err.contains("vector.erm.mmd: golden file missing"), "{err}");
    assert!(stdout(&o).trim_end().ends_with(", 2 drifted"));

    let bless = platec(&["corpus-check", "--corpus", tmp.path().to_str().unwrap(), "--bless"]);
    assert_eq!(bless.status.code(), Some(0));
    let again = platec(&["corpus-check", "--corpus", tmp.path().to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0), "{}", stderr(&again));
}

#[test]
fn first_difference_positions() {
    assert_eq!(platec::first_difference(b"abc", b"abc"), None);
    assert_eq!(platec::first_difference(b"abc", b"abd"), Some(2));
    assert_eq!(platec::first_difference(b"abc", b"ab"), Some(2));
    assert_eq!(platec::first_difference(b"", b"x"), Some(0));
}
