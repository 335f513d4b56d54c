use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use graph_squash::desk;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_graph-squash"));
    cmd.env_remove("GRAPH_SQUASH_THRESHOLD");
    cmd
}

struct Desk {
    dir: tempfile::TempDir,
}

impl Desk {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("desk.nt"), desk::ntriples()).unwrap();
        fs::write(dir.path().join("desk.rq"), desk::QUERY).unwrap();
        fs::write(dir.path().join("vectors.txt"), desk::WORD_VECTORS).unwrap();
        Desk { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        bin().current_dir(self.dir.path()).args(args).output().unwrap()
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn verify_desk_is_lossless() {
    let desk = Desk::new();
    let out = desk.run(&["verify", "--input", "desk.nt", "--query", "desk.rq"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("lossless"));
}

#[test]
fn verify_with_word_vectors() {
    let desk = Desk::new();
    let out = desk.run(&[
        "verify", "--input", "desk.nt", "--query", "desk.rq", "--embedding", "word-vectors", "--vectors", "vectors.txt",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn offline_gbs_rejects_a_query() {
    let desk = Desk::new();
    let out = desk.run(&["summarize", "--method", "gbs", "--input", "desk.nt", "--query", "desk.rq", "--out", "o"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--query"));
}

#[test]
fn qbs_summarize_needs_a_query() {
    let desk = Desk::new();
    let out = desk.run(&["summarize", "--method", "qbs", "--input", "desk.nt", "--out", "o"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&bin().args(["query", "--bogus"]).output().unwrap()), 1);
}

#[test]
fn threshold_outside_the_unit_interval_is_a_usage_error() {
    let desk = Desk::new();
    let out = desk.run(&["verify", "--input", "desk.nt", "--query", "desk.rq", "--threshold", "1.5"]);
    assert_eq!(code(&out), 1);
    let out = bin()
        .current_dir(desk.dir.path())
        .env("GRAPH_SQUASH_THRESHOLD", "0")
        .args(["verify", "--input", "desk.nt", "--query", "desk.rq"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn missing_input_is_a_data_error() {
    let desk = Desk::new();
    let out = desk.run(&["query", "--input", "absent.nt", "--query", "desk.rq"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn direct_query_writes_four_rows() {
    let desk = Desk::new();
    let out = desk.run(&["query", "--input", "desk.nt", "--query", "desk.rq", "--engine", "direct", "--out", "r.tsv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(desk.path("r.tsv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "?p");
    assert_eq!(lines.len(), 5);
}

#[test]
fn gbs_query_loses_answers_on_the_desk() {
    let desk = Desk::new();
    let out = desk.run(&[
        "query",
        "--input",
        "desk.nt",
        "--query",
        "desk.rq",
        "--engine",
        "gbs",
        "--embedding",
        "word-vectors",
        "--vectors",
        "vectors.txt",
        "--keep-singletons",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 3);
}

#[test]
fn summarize_writes_artifacts() {
    let desk = Desk::new();
    let out = desk.run(&["summarize", "--method", "gbs", "--input", "desk.nt", "--out", "gbs", "--keep-singletons"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(desk.path("gbs/summary.nt")).unwrap().lines().count(), 7);
    assert!(desk.path("gbs/membership.tsv").exists());

    let out = desk.run(&["summarize", "--method", "qbs", "--input", "desk.nt", "--query", "desk.rq", "--out", "qbs"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["g.nt", "summary.nt", "query.rq", "similarity.tsv"] {
        assert!(desk.path("qbs").join(f).exists(), "{f}");
    }
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn commands_are_reproducible() {
    let desk = Desk::new();
    fs::write(
        desk.path("spec.toml"),
        "entities = 200\npredicates = 6\nclusters = [3]\ntriples_per_predicate = 40\nobject_pool = 8\n",
    )
    .unwrap();
    for run in ["a", "b"] {
        let gen = desk.run(&[
            "gen",
            "--spec",
            "spec.toml",
            "--seed",
            "9",
            "--out",
            &format!("{run}/g.nt"),
            "--clusters-out",
            &format!("{run}/clusters.tsv"),
            "--queries",
            "3",
            "--queries-dir",
            &format!("{run}/queries"),
        ]);
        assert_eq!(code(&gen), 0, "{}", String::from_utf8_lossy(&gen.stderr));
        let q = format!("{run}/queries/q000.rq");
        let out = desk.run(&[
            "summarize", "--method", "qbs", "--input", &format!("{run}/g.nt"), "--query", &q, "--out",
            &format!("{run}/qbs"), "--seed", "3",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let out = desk.run(&["summarize", "--method", "gbs", "--input", &format!("{run}/g.nt"), "--out", &format!("{run}/gbs")]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let out = desk.run(&["walks", "--input", &format!("{run}/g.nt"), "--out", &format!("{run}/walks.txt")]);
        assert_eq!(code(&out), 0);
    }
    for sub in ["", "queries", "qbs", "gbs"] {
        assert_eq!(read_all(&desk.path("a").join(sub)), read_all(&desk.path("b").join(sub)), "{sub}");
    }
}

#[test]
fn bench_writes_a_report() {
    let desk = Desk::new();
    fs::write(
        desk.path("bench.toml"),
        r#"
repetitions = 1
similarity = "word-vectors"
vectors = "vectors.txt"
keep_singletons = true

[[graphs]]
name = "desk"
path = "desk.nt"

[[queries]]
id = "desk"
path = "desk.rq"
"#,
    )
    .unwrap();
    let out = desk.run(&["bench", "--config", "bench.toml", "--out", "report", "--untimed"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let jsonl = fs::read_to_string(desk.path("report/report.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 3);
    assert!(desk.path("report/report.txt").exists());
}
