//! Black-box tests of the `tripart` binary: subcommand wiring, output
//! formats, and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tripart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tripart"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// generate + load into a temp dir; returns (workload dir, dataset dir).
fn prepared(tmp: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let wl = tmp.join("wl");
    let ds = tmp.join("ds");
    let out = tripart(&[
        "generate",
        "star",
        wl.to_str().unwrap(),
        "--subjects",
        "80",
        "--predicates",
        "8",
        "--seed",
        "5",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = tripart(&[
        "load",
        wl.join("data.nt").to_str().unwrap(),
        ds.to_str().unwrap(),
        "--partitions",
        "4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    (wl, ds)
}

#[test]
fn load_reports_counts_and_writes_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, ds) = prepared(tmp.path());
    for piece in ["manifest", "dict.tsv", "stats.tsv", "vp", "pt"] {
        assert!(ds.join(piece).exists(), "missing {piece}");
    }
}

#[test]
fn query_strategies_agree_on_sorted_tsv() {
    let tmp = tempfile::tempdir().unwrap();
    let (wl, ds) = prepared(tmp.path());
    let query = wl.join("queries/S2.rq");

    let run = |strategy: &str| {
        let out = tripart(&[
            "query",
            ds.to_str().unwrap(),
            query.to_str().unwrap(),
            "--strategy",
            strategy,
        ]);
        assert!(out.status.success(), "{strategy}: {}", stderr(&out));
        let text = stdout(&out);
        let mut lines: Vec<&str> = text.lines().collect();
        let header = lines.remove(0).to_string();
        lines.sort_unstable();
        (header, lines.join("\n"))
    };
    let mixed = run("mixed");
    let vp = run("vp");
    let oracle = run("oracle");
    assert_eq!(mixed, vp);
    assert_eq!(mixed, oracle);
}

#[test]
fn explain_goes_to_stderr() {
    let tmp = tempfile::tempdir().unwrap();
    let (wl, ds) = prepared(tmp.path());
    // S1 has 2 patterns sharing one subject: a single PT node under mixed
    let out = tripart(&[
        "query",
        ds.to_str().unwrap(),
        wl.join("queries/S1.rq").to_str().unwrap(),
        "--strategy",
        "mixed",
        "--explain",
    ]);
    assert!(out.status.success());
    let err = stderr(&out);
    assert!(err.contains("PT score="), "explain missing PT node:\n{err}");
    assert_eq!(
        err.lines().count(),
        1,
        "star should collapse to one node:\n{err}"
    );
}

#[test]
fn limit_zero_prints_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let (wl, ds) = prepared(tmp.path());
    let out = tripart(&[
        "query",
        ds.to_str().unwrap(),
        wl.join("queries/S1.rq").to_str().unwrap(),
        "--limit",
        "0",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn malformed_input_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.nt");
    fs::write(&bad, "<http://ex/s> <http://ex/p> \"v\"\n").unwrap();
    let out = tripart(&[
        "load",
        bad.to_str().unwrap(),
        tmp.path().join("ds").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));
}

#[test]
fn unsupported_query_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, ds) = prepared(tmp.path());
    let q = tmp.path().join("bad.rq");
    fs::write(
        &q,
        "SELECT ?x WHERE { ?x <http://ex/p> ?y . FILTER(?y > 3) }",
    )
    .unwrap();
    let out = tripart(&["query", ds.to_str().unwrap(), q.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("FILTER"), "{}", stderr(&out));
}

#[test]
fn missing_dataset_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let q = tmp.path().join("q.rq");
    fs::write(&q, "SELECT * WHERE { ?x <http://ex/p> ?y }").unwrap();
    let out = tripart(&[
        "query",
        tmp.path().join("nope").to_str().unwrap(),
        q.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_writes_csv_and_prints_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let (wl, ds) = prepared(tmp.path());
    let csv = tmp.path().join("report.csv");
    let out = tripart(&[
        "bench",
        ds.to_str().unwrap(),
        wl.join("queries").to_str().unwrap(),
        "--strategies",
        "mixed,vp",
        "--repeat",
        "2",
        "--report",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("query_id,shape,strategy,run_index,wall_ms,joins,rows,plan_hash"));
    // 10 star queries x 2 strategies
    assert_eq!(text.lines().count(), 21);
    let summary = stdout(&out);
    assert!(summary.contains("S"), "{summary}");
    assert!(summary.contains("mixed"), "{summary}");
    assert!(summary.contains("vp"), "{summary}");
}

#[test]
fn generate_is_deterministic_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = tripart(&[
            "generate",
            "complex",
            dir.to_str().unwrap(),
            "--subjects",
            "40",
            "--predicates",
            "6",
            "--seed",
            "9",
        ]);
        assert!(out.status.success());
    }
    assert_eq!(
        fs::read(a.join("data.nt")).unwrap(),
        fs::read(b.join("data.nt")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("queries/C3.rq")).unwrap(),
        fs::read(b.join("queries/C3.rq")).unwrap()
    );
}

#[test]
fn query_reads_from_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let tmp = tempfile::tempdir().unwrap();
    let (_, ds) = prepared(tmp.path());
    let mut child = Command::new(env!("CARGO_BIN_EXE_tripart"))
        .args(["query", ds.to_str().unwrap(), "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"SELECT * WHERE { ?s <http://ex.org/p0> ?o }")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("?s\t?o\n"));
}
