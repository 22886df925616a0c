use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_spatembed");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn spatembed")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn fixture_all(out: &Path) -> Output {
    let links = fixture("links_200.txt");
    let geo = fixture("geo_200.tsv");
    run(&[
        "all",
        "--links",
        links.to_str().unwrap(),
        "--geo",
        geo.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--sizes",
        "10,20,50,100",
        "--sets",
        "60",
        "--level",
        "both",
        "--seed",
        "7",
    ])
}

#[test]
fn fixture_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = fixture_all(dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "edges.tsv",
        "features.tsv",
        "model.txt",
        "null_samples.tsv",
        "null_model.tsv",
        "results.tsv",
        "summary.tsv",
        "manifest.tsv",
    ] {
        let p = dir.path().join(name);
        assert!(p.is_file(), "missing {name}");
        assert!(fs::metadata(&p).unwrap().len() > 0, "empty {name}");
    }
    let ingest = fs::read_to_string(dir.path().join("ingest.tsv")).unwrap();
    assert!(ingest.contains("nodes\t200\n"));
    assert!(ingest.contains("self_pairs_dropped\t2\n"));
    let manifest = fs::read_to_string(dir.path().join("manifest.tsv")).unwrap();
    let stages: Vec<&str> = manifest
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(stages, ["ingest", "features", "embed", "null", "test", "report"]);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&fixture_all(a.path())), 0);
    assert_eq!(code(&fixture_all(b.path())), 0);
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        if name == "manifest.tsv" {
            let strip = |s: &[u8]| -> Vec<String> {
                String::from_utf8_lossy(s)
                    .lines()
                    .map(|l| l.rsplit_once('\t').map_or(l, |(head, _)| head).to_string())
                    .collect()
            };
            assert_eq!(strip(&x), strip(&y));
        } else {
            assert!(x == y, "{name:?} differs between runs");
        }
    }
}

#[test]
fn test_before_null_is_missing_dependency() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["test", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(".tsv") || err.contains(".txt"), "{err}");
}

#[test]
fn all_without_geo_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let links = fixture("links_200.txt");
    let missing = dir.path().join("nope.tsv");
    let out = run(&[
        "all",
        "--links",
        links.to_str().unwrap(),
        "--geo",
        missing.to_str().unwrap(),
        "--level",
        "country",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.tsv"));
}

#[test]
fn missing_input_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "ingest",
        "--edges",
        dir.path().join("absent.tsv").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn strict_parse_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.links");
    fs::write(&bad, "link L1: N1 N2\nlink L2 N3 N4\n").unwrap();
    let out_dir = dir.path().join("out");
    let args = |strict: bool| {
        let mut v = vec![
            "ingest".to_string(),
            "--links".into(),
            bad.to_str().unwrap().into(),
            "--out".into(),
            out_dir.to_str().unwrap().into(),
        ];
        if strict {
            v.push("--strict".into());
        }
        v
    };
    let strict = Command::new(BIN).args(args(true)).output().unwrap();
    assert_eq!(code(&strict), 3);
    assert!(String::from_utf8_lossy(&strict.stderr).contains("line 2"));
    let lenient = Command::new(BIN).args(args(false)).output().unwrap();
    assert_eq!(code(&lenient), 0);
    let ingest = fs::read_to_string(out_dir.join("ingest.tsv")).unwrap();
    assert!(ingest.contains("malformed_lines\t1\n"));
}

#[test]
fn degenerate_features_exit_4() {
    // A ring: every node has identical features, so the covariance is singular everywhere.
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("ring.tsv");
    let body: String = (0..30)
        .map(|i| format!("R{i:02}\tR{:02}\n", (i + 1) % 30))
        .collect();
    fs::write(&edges, body).unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        code(&run(&["ingest", "--edges", edges.to_str().unwrap(), "--out", out])),
        0
    );
    assert_eq!(code(&run(&["features", "--out", out])), 0);
    assert_eq!(code(&run(&["embed", "--out", out])), 4);
}

#[test]
fn stages_do_not_touch_upstream_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fixture_all(dir.path())), 0);
    let before: Vec<(PathBuf, Vec<u8>)> = ["graph.bin", "edges.tsv", "features.tsv", "model.txt"]
        .iter()
        .map(|n| {
            let p = dir.path().join(n);
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    let out = dir.path().to_str().unwrap();
    for stage in ["null", "test", "report"] {
        let o = run(&[stage, "--out", out, "--sizes", "10,20,50,100", "--sets", "60", "--level", "both", "--seed", "7"]);
        assert_eq!(code(&o), 0, "{stage}");
    }
    for (p, bytes) in before {
        assert_eq!(fs::read(&p).unwrap(), bytes, "{}", p.display());
    }
}

#[test]
fn gravity_preset_reports_majority_significant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["synth", "--model", "gravity", "--out", out, "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let edges = dir.path().join("synth_edges.tsv");
    let geo = dir.path().join("synth_geo.tsv");
    let o = run(&[
        "all",
        "--edges",
        edges.to_str().unwrap(),
        "--geo",
        geo.to_str().unwrap(),
        "--out",
        out,
        "--seed",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.tsv")).unwrap();
    let header = summary
        .lines()
        .find(|l| l.starts_with("# country "))
        .unwrap_or_else(|| panic!("no country block in summary:\n{summary}"));
    let field = |key: &str| -> usize {
        header
            .split_whitespace()
            .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('=')?.parse().ok())
            .unwrap_or_else(|| panic!("no {key} in {header}"))
    };
    let groups = field("groups");
    let significant = field("significant");
    assert_eq!(groups, 20);
    assert!(2 * significant > groups, "{significant}/{groups} significant");
}
