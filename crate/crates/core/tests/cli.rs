use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tricomm::{mdl, Partition, TripartiteHypergraph};

fn tricomm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tricomm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = tricomm(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = tricomm(dir, args);
    assert!(!out.status.success(), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn generate_easy(dir: &Path) {
    ok(
        dir,
        &[
            "generate",
            "--quiet",
            "--seed",
            "4",
            "--p-dense",
            "0.5",
            "--p-sparse",
            "0.0005",
        ],
    );
}

#[test]
fn generate_writes_graph_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    generate_easy(dir.path());
    let graph = TripartiteHypergraph::read(
        fs::read(dir.path().join("hypergraph.txt"))
            .unwrap()
            .as_slice(),
    )
    .unwrap();
    assert_eq!(graph.node_counts(), [30, 30, 30]);
    assert!(graph.total_weight() > 0);
    let truth = Partition::read(fs::File::open(dir.path().join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth.community_counts(), [3, 3, 3]);

    ok(
        dir.path(),
        &[
            "generate",
            "--quiet",
            "--preset",
            "many2many",
            "--communities",
            "2,3,4",
            "--triples",
            "5",
            "--nodes-per-comm",
            "4",
            "--p-dense",
            "0.3",
            "--out",
            "m.txt",
            "--truth",
            "m.json",
        ],
    );
    let truth = Partition::read(fs::File::open(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(truth.node_counts(), [8, 12, 16]);
}

#[test]
fn detect_recovers_easy_instance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate_easy(d);
    let stdout = ok(
        d,
        &[
            "detect",
            "--in",
            "hypergraph.txt",
            "--out",
            "pred.json",
            "--report",
        ],
    );
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["communities"], serde_json::json!([3, 3, 3]));
    let q = report["q"].as_f64().unwrap();
    let parts = report["l_index"].as_f64().unwrap() + report["l_recover"].as_f64().unwrap();
    assert!((q - parts).abs() < 1e-9 * q);

    let per_color = ok(d, &["nmi", "--truth", "truth.json", "--pred", "pred.json"]);
    assert_eq!(per_color, "red 1.000000\ngreen 1.000000\nblue 1.000000\n");
    assert_eq!(
        ok(
            d,
            &[
                "nmi",
                "--truth",
                "truth.json",
                "--pred",
                "pred.json",
                "--color",
                "all"
            ]
        ),
        "1.000000\n"
    );
    assert_eq!(
        ok(
            d,
            &[
                "nmi",
                "--truth",
                "truth.json",
                "--pred",
                "pred.json",
                "--color",
                "green"
            ]
        ),
        "1.000000\n"
    );

    let printed = ok(d, &["detect", "--in", "hypergraph.txt"]);
    let from_stdout = Partition::read(printed.as_bytes()).unwrap();
    let from_file = Partition::read(fs::File::open(d.join("pred.json")).unwrap()).unwrap();
    assert_eq!(from_stdout, from_file);
}

#[test]
fn score_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("g.txt"), "2 2 2\n0 0 0\n1 1 1\n").unwrap();
    fs::write(
        d.join("one.json"),
        r#"{"red":[0,0],"green":[0,0],"blue":[0,0]}"#,
    )
    .unwrap();
    let out = ok(d, &["score", "--in", "g.txt", "--partition", "one.json"]);
    assert_eq!(out, "q 6.392317\nl_index 1.584963\nl_recover 4.807355\n");

    let graph = TripartiteHypergraph::read(fs::read(d.join("g.txt")).unwrap().as_slice()).unwrap();
    let q: f64 = mdl::quality(&graph, &Partition::singletons([2, 2, 2]))
        .unwrap()
        .q;
    fs::write(
        d.join("s.json"),
        r#"{"red":[0,1],"green":[0,1],"blue":[0,1]}"#,
    )
    .unwrap();
    let out = ok(d, &["score", "--in", "g.txt", "--partition", "s.json"]);
    assert!(out.starts_with(&format!("q {q:.6}\n")));
}

#[test]
fn oracle_prints_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("g.txt"),
        "# two parallel edges\n2 2 2\n0 0 0\n1 1 1\n",
    )
    .unwrap();
    let out = ok(d, &["oracle", "--in", "g.txt", "--out", "best.json"]);
    assert_eq!(out, "q 6.392317\n");
    let best = Partition::read(fs::File::open(d.join("best.json")).unwrap()).unwrap();
    assert_eq!(best, Partition::all_one([2, 2, 2]));

    let err = fails(d, &["oracle", "--in", "g.txt", "--limit", "3"]);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn sweep_row_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "sweep",
            "--quiet",
            "--nodes-per-comm",
            "5",
            "--p-dense",
            "0.5,0.1",
            "--runs",
            "3",
            "--jobs",
            "2",
            "--out",
            "s.csv",
        ],
    );
    let csv = fs::read_to_string(d.join("s.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "p_dense,run,nmi_red,nmi_green,nmi_blue,q,seconds");
    assert_eq!(lines.len(), 1 + 2 * (3 + 2));
    let runs: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(
        runs,
        ["0", "1", "2", "mean", "std", "0", "1", "2", "mean", "std"]
    );
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7);
        for f in fields.iter().skip(2) {
            assert_eq!(f.split('.').nth(1).map(str::len), Some(6), "{line}");
        }
    }
}

#[test]
fn failures_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let err = fails(d, &["detect", "--in", "missing.txt"]);
    assert!(
        err.starts_with("error:") && err.trim_end().lines().count() == 1,
        "{err}"
    );

    fs::write(d.join("bad.txt"), "2 2 2\n0 0 0\n0 5 0\n").unwrap();
    let err = fails(d, &["detect", "--in", "bad.txt"]);
    assert!(err.contains("line 3"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);

    fails(d, &["detect", "--in", "bad.txt", "--jobs", "0"]);
    fails(d, &["generate", "--p-dense", "1.5"]);
    fails(
        d,
        &["generate", "--preset", "many2many", "--p-dense", "0.5"],
    );
    fails(d, &["sweep", "--p-dense", "0.5", "--runs", "0"]);

    fs::write(d.join("g.txt"), "1 1 1\n0 0 0\n").unwrap();
    fs::write(d.join("p.json"), r#"{"red":[0,0],"green":[0],"blue":[0]}"#).unwrap();
    fails(d, &["score", "--in", "g.txt", "--partition", "p.json"]);
}
