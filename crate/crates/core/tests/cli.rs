use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use burstalign::align::AlignmentResult;
use burstalign::BINet;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_burstalign"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("spawn burstalign")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn generate(dir: &Path) {
    let o = run(&["generate", "-o", "data"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("self_check\tpass"));
}

#[test]
fn generate_then_decipher_recovers_gold() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path());
    for f in ["source.tsv", "target.tsv", "lexicon.tsv", "romanization.tsv", "gold.tsv", "pipeline.conf"] {
        assert!(tmp.path().join("data").join(f).is_file(), "{f} missing");
    }
    let o = run(&["decipher", "-c", "data/pipeline.conf"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy: 1.0000"), "{}", stdout(&o));

    let out = tmp.path().join("data/out");
    let pairs = fs::read_to_string(out.join("pairs.tsv")).unwrap();
    let parsed = AlignmentResult::read_pairs(pairs.as_bytes(), "pairs.tsv").unwrap();
    assert!(!parsed.is_empty());
    assert!(parsed.windows(2).all(|w| w[0].score >= w[1].score));

    let o = run(
        &["eval", "--result", "data/out/pairs.tsv", "--gold", "data/gold.tsv", "-k", "1", "5", "1000"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "k\taccuracy");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("1000\t"));
}

#[test]
fn decipher_is_deterministic_and_respects_k() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path());
    let read = |name: &str| fs::read_to_string(tmp.path().join(name)).unwrap();

    let a = run(&["decipher", "-c", "data/pipeline.conf", "-o", "a"], tmp.path());
    let b = run(&["decipher", "-c", "data/pipeline.conf", "-o", "b"], tmp.path());
    assert!(a.status.success() && b.status.success());
    assert_eq!(read("a/pairs.tsv"), read("b/pairs.tsv"));
    assert_eq!(read("a/words.tsv"), read("b/words.tsv"));

    let o = run(&["decipher", "-c", "data/pipeline.conf", "-o", "k", "--k", "3"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let body = read("k/pairs.tsv");
    let rows = body.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).count();
    assert!(rows <= 3, "{body}");
}

#[test]
fn split_decipher_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path());
    let o = run(
        &["decipher", "-c", "data/pipeline.conf", "-o", "s", "--split-epoch", "45"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(tmp.path().join("s/report.txt")).unwrap();
    assert!(report.contains("split_epoch\t45"));

    let o = run(
        &["decipher", "-c", "data/pipeline.conf", "-o", "s", "--split-epoch", "100000"],
        tmp.path(),
    );
    assert!(!o.status.success());
}

#[test]
fn build_binet_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path());
    let o = run(&["build-binet", "-c", "data/pipeline.conf", "-o", "net", "--stream", "target"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let net = BINet::load(tmp.path().join("net/nodes.tsv"), tmp.path().join("net/edges.tsv")).unwrap();
    assert!(net.num_nodes() > 0);
    assert!(stdout(&o).contains(&format!("{} nodes", net.num_nodes())));
    assert!(stdout(&o).contains(&format!("{} edges", net.num_edges())));

    let o = run(&["detect-bursts", "-c", "data/pipeline.conf", "-o", "net"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("net/bursts.tsv").is_file());
}

#[test]
fn single_word_corpora_run_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    fs::write(p.join("s.tsv"), "1\t2020-01-01\tfoo\n2\t2020-01-02\tfoo\n").unwrap();
    fs::write(p.join("t.tsv"), "1\t2020-01-01\tbar\n").unwrap();
    let o = run(
        &["decipher", "--set", "source_corpus=s.tsv", "--set", "target_corpus=t.tsv", "-o", "out"],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(p.join("out/pairs.tsv").is_file());
}

#[test]
fn empty_corpus_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("empty.tsv"), "").unwrap();
    let o = run(&["detect-bursts", "--corpus", "empty.tsv"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    assert_eq!(run(&["--help"], p).status.code(), Some(0));
    assert_eq!(run(&["no-such-command"], p).status.code(), Some(1));
    // unknown config key and missing corpus setting are usage errors
    assert_eq!(run(&["decipher", "--set", "bogus=1"], p).status.code(), Some(1));
    assert_eq!(run(&["decipher"], p).status.code(), Some(1));
    assert_eq!(run(&["decipher", "--set", "alpha=0.5"], p).status.code(), Some(1));
    // missing input file is a runtime error
    let o = run(&["decipher", "--set", "source_corpus=nope.tsv", "--set", "target_corpus=nope.tsv"], p);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["eval", "--result", "nope.tsv", "--gold", "nope.tsv", "-k", "0"], p);
    assert_ne!(o.status.code(), Some(0));
}
