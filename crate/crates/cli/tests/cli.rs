use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use glt_core::io::write_dataset;
use glt_core::synthetic::{complete, cycle, CitationLike};
use glt_core::{CsrMatrix, Graph64, Splits};

const HEADER: &str = "schema_version,scorer,p_g,p_theta,seed,val_acc,test_acc,mean_pruned_edge_degree,inference_macs,status,timestamp";

fn glt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glt"))
        .args(args)
        .env("GLT_THREADS", "2")
        .output()
        .expect("spawn glt")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_dataset(root: &Path) -> PathBuf {
    let dir = root.join("small");
    let g: Graph64 = CitationLike::small().generate(5).unwrap();
    write_dataset(&g, &dir).unwrap();
    dir
}

/// Structure-only graph with one feature per node and a few labelled nodes.
fn structure_dataset(root: &Path, name: &str, g: Graph64) -> PathBuf {
    let n = g.num_nodes();
    let feats = CsrMatrix::from_rows(1, (0..n).map(|_| vec![(0, 1.0)]).collect()).unwrap();
    let mut splits = Splits::empty(n);
    splits.train[0] = true;
    splits.val[1] = true;
    splits.test[2] = true;
    let g = g.with_node_data(feats, vec![0; n], 1, splits).unwrap();
    let dir = root.join(name);
    write_dataset(&g, &dir).unwrap();
    dir
}

fn write(path: &Path, body: &str) -> PathBuf {
    fs::write(path, body).unwrap();
    path.to_path_buf()
}

const QUICK: &str = "[train]\nepochs = 8\nhidden = 8\n";

fn strip_timestamp(line: &str) -> String {
    line.rsplit_once(',').unwrap().0.to_string()
}

#[test]
fn help_and_usage_errors() {
    let o = glt(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in ["convert", "run", "sweep", "analyze", "macs"] {
        assert!(stdout(&o).contains(sub), "help lacks {sub}");
    }
    assert_eq!(glt(&["run", "--help"]).status.code(), Some(0));
    assert_eq!(glt(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(glt(&["run", "--config"]).status.code(), Some(1));
}

#[test]
fn run_validation_and_runtime_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_dataset(tmp.path());
    let bad = write(&tmp.path().join("bad.toml"), "[train]\np_g = 1.5\n");
    let o = glt(&[
        "run",
        "--config",
        s(&bad),
        "--dataset",
        s(&data),
        "--out",
        s(&tmp.path().join("b")),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("p_g"), "{}", stderr(&o));

    let typo = write(
        &tmp.path().join("typo.toml"),
        "[train]\nlearning_rate = 0.1\n",
    );
    let o = glt(&[
        "run",
        "--config",
        s(&typo),
        "--dataset",
        s(&data),
        "--out",
        s(&tmp.path().join("b")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("learning_rate"), "{}", stderr(&o));

    let scorer = write(&tmp.path().join("scorer.toml"), "scorer = \"best\"\n");
    let o = glt(&[
        "run",
        "--config",
        s(&scorer),
        "--dataset",
        s(&data),
        "--out",
        s(&tmp.path().join("b")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scorer"));

    let good = write(&tmp.path().join("good.toml"), QUICK);
    let missing = tmp.path().join("nowhere");
    let o = glt(&[
        "run",
        "--config",
        s(&good),
        "--dataset",
        s(&missing),
        "--out",
        s(&tmp.path().join("b")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn run_writes_bundle_and_reproducible_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_dataset(tmp.path());
    let cfg = write(
        &tmp.path().join("run.toml"),
        "scorer = \"teddy\"\n[train]\nepochs = 8\nhidden = 8\np_g = 0.2\np_theta = 0.5\nseed = 3\n",
    );
    let metrics = tmp.path().join("metrics.csv");
    for bundle in ["b1", "b2"] {
        let out = tmp.path().join(bundle);
        let o = glt(&[
            "run",
            "--config",
            s(&cfg),
            "--dataset",
            s(&data),
            "--out",
            s(&out),
            "--metrics",
            s(&metrics),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        for f in [
            "checkpoint.bin",
            "checkpoint.json",
            "edge_mask.tsv",
            "param_mask.bin",
            "metrics.json",
        ] {
            assert!(out.join(f).is_file(), "missing {f}");
        }
    }
    let text = fs::read_to_string(&metrics).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], HEADER);
    assert!(lines[1].starts_with("1,teddy,0.2,0.5,3,"), "{}", lines[1]);
    assert!(lines[1].contains(",ok,"));
    assert_eq!(strip_timestamp(lines[1]), strip_timestamp(lines[2]));
    for f in [
        "checkpoint.bin",
        "edge_mask.tsv",
        "param_mask.bin",
        "metrics.json",
    ] {
        assert_eq!(
            fs::read(tmp.path().join("b1").join(f)).unwrap(),
            fs::read(tmp.path().join("b2").join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
    let pruned = fs::read_to_string(tmp.path().join("b1/edge_mask.tsv")).unwrap();
    assert_eq!(pruned.lines().count(), 180, "ceil(0.2 * 900) pruned edges");

    let macs_field: u64 = lines[1].split(',').nth(8).unwrap().parse().unwrap();
    let o = glt(&[
        "macs",
        "--dataset",
        s(&data),
        "--bundle",
        s(&tmp.path().join("b1")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(
        stdout(&o).contains(&format!("total={macs_field}")),
        "{}",
        stdout(&o)
    );
}

#[test]
fn sweep_matches_run_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_dataset(tmp.path());
    let cfg = write(
        &tmp.path().join("run.toml"),
        "scorer = \"random\"\n[train]\nepochs = 8\nhidden = 8\nseed = 4\n",
    );
    let run_csv = tmp.path().join("run.csv");
    let o = glt(&[
        "run",
        "--config",
        s(&cfg),
        "--dataset",
        s(&data),
        "--out",
        s(&tmp.path().join("b")),
        "--metrics",
        s(&run_csv),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let spec = write(
        &tmp.path().join("one.toml"),
        "dataset = \"small\"\nscorers = [\"random\"]\ngrid = [0]\nseeds = [4]\n[train]\nepochs = 8\nhidden = 8\n",
    );
    let sweep_csv = tmp.path().join("sweep.csv");
    let o = glt(&["sweep", "--spec", s(&spec), "--out", s(&sweep_csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = fs::read_to_string(&run_csv).unwrap();
    let b = fs::read_to_string(&sweep_csv).unwrap();
    assert_eq!(
        strip_timestamp(a.lines().nth(1).unwrap()),
        strip_timestamp(b.lines().nth(1).unwrap())
    );

    let spec = write(
        &tmp.path().join("grid.toml"),
        "dataset = \"small\"\nscorers = [\"teddy\", \"lowest_degree\", \"random\"]\ngrid = [0, 5, 10]\nseeds = [0, 1]\nprune_weights = false\n[train]\nepochs = 6\nhidden = 8\n",
    );
    let first = tmp.path().join("s1.csv");
    let second = tmp.path().join("s2.csv");
    for out in [&first, &second] {
        let o = glt(&["sweep", "--spec", s(&spec), "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (x, y) = (
        fs::read_to_string(&first).unwrap(),
        fs::read_to_string(&second).unwrap(),
    );
    let strip = |t: &str| t.lines().skip(1).map(strip_timestamp).collect::<Vec<_>>();
    assert_eq!(strip(&x), strip(&y));
    assert_eq!(x.lines().count(), 1 + 3 * 3 * 2);
    assert_eq!(x.lines().next().unwrap(), HEADER);
    for line in x.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(
            f[3], "0.0",
            "prune_weights = false keeps p_theta at 0: {line}"
        );
        assert_eq!(f[9], "ok");
    }
}

#[test]
fn sweep_records_failures_and_continues() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_dataset(tmp.path());
    // No training nodes: every teacher fails, every row is an error row.
    let split = data.join("split.tsv");
    let kept: String = fs::read_to_string(&split)
        .unwrap()
        .lines()
        .filter(|l| !l.ends_with("train"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&split, kept).unwrap();
    let spec = write(
        &tmp.path().join("s.toml"),
        "dataset = \"small\"\nscorers = [\"teddy\"]\ngrid = [1, 2]\nseeds = [0]\n[train]\nepochs = 2\nhidden = 4\n",
    );
    let out = tmp.path().join("s.csv");
    let o = glt(&["sweep", "--spec", s(&spec), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines().skip(1) {
        assert!(line.contains(",error: "), "{line}");
    }

    let empty = write(
        &tmp.path().join("e.toml"),
        "dataset = \"small\"\nscorers = [\"teddy\"]\ngrid = []\nseeds = [0]\n",
    );
    assert_eq!(
        glt(&["sweep", "--spec", s(&empty), "--out", s(&out)])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn analyze_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let k5 = structure_dataset(tmp.path(), "k5", complete(5));
    let o = glt(&["analyze", "--dataset", s(&k5), "--mode", "energy"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "2.0");

    let c4 = structure_dataset(tmp.path(), "c4", cycle(4));
    let report = tmp.path().join("delta.tsv");
    let o = glt(&[
        "analyze",
        "--dataset",
        s(&c4),
        "--mode",
        "delta",
        "--out",
        s(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&report).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let f: Vec<f64> = r.split('\t').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[2], 2.0);
        assert!((f[3] - 1.0).abs() < 1e-9, "{r}");
    }

    let o = glt(&[
        "analyze",
        "--dataset",
        s(&c4),
        "--mode",
        "energy",
        "--budget",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
    assert_eq!(
        glt(&["analyze", "--dataset", s(&c4), "--mode", "delta"])
            .status
            .code(),
        Some(1)
    );

    let data = small_dataset(tmp.path());
    let report = tmp.path().join("deg.tsv");
    let o = glt(&[
        "analyze",
        "--dataset",
        s(&data),
        "--mode",
        "degree-report",
        "--out",
        s(&report),
        "--grid",
        "0.2,0.5,0.8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "p_g\tpruned_edges\tmean_pruned_edge_degree"
    );
    let counts: Vec<usize> = text
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts, vec![180, 450, 720]);

    let scores = tmp.path().join("scores.tsv");
    let o = glt(&[
        "analyze",
        "--dataset",
        s(&c4),
        "--mode",
        "scores",
        "--out",
        s(&scores),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&scores).unwrap();
    assert_eq!(text.lines().count(), 4);
    for l in text.lines() {
        let score: f64 = l.split('\t').nth(2).unwrap().parse().unwrap();
        assert!((score - 0.125).abs() < 1e-12, "{l}");
    }
}

#[test]
fn macs_dense_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let data = small_dataset(tmp.path());
    let o = glt(&["macs", "--dataset", s(&data), "--hidden", "16"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (n, m, f, c, h) = (300u64, 900u64, 60u64, 4u64, 16u64);
    let want = (2 * m + n) * (h + c) + (f * h + h * c) * n;
    assert!(
        stdout(&o).contains(&format!("total={want}")),
        "{}",
        stdout(&o)
    );
}

fn linqs_fixture(dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    let mut content = String::new();
    for i in 0..12 {
        let words: Vec<&str> = (0..5)
            .map(|j| if (i + j) % 3 == 0 { "1" } else { "0" })
            .collect();
        let class = ["Theory", "Neural_Networks", "Rule_Learning"][i % 3];
        content.push_str(&format!("p{}\t{}\t{class}\n", 100 + i, words.join("\t")));
    }
    fs::write(dir.join("toy.content"), content).unwrap();
    let cites = "p100\tp101\np101\tp100\np101\tp102\np102\tp102\np103\tp999\np104\tp105\np105\tp106\np107\tp108\np109\tp110\np110\tp111\np100\tp111\n";
    fs::write(dir.join("toy.cites"), cites).unwrap();
}

#[test]
fn convert_linqs_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("src");
    linqs_fixture(&src);
    let out1 = tmp.path().join("out1");
    let o = glt(&["convert", "--input", s(&src), "--output", s(&out1)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // 11 cite lines: one reciprocal repeat, one self-citation, one dangling id.
    assert_eq!(stdout(&o).trim(), "N=12 M=8 C=3 F=5");

    let out2 = tmp.path().join("out2");
    let o = glt(&[
        "convert",
        "--format",
        "linqs",
        "--input",
        s(&src),
        "--output",
        s(&out2),
        "--name",
        "toy",
    ]);
    assert_eq!(o.status.code(), Some(0));
    for f in [
        "edges.tsv",
        "features.tsv",
        "labels.tsv",
        "split.tsv",
        "node_ids.tsv",
        "classes.tsv",
    ] {
        assert_eq!(
            fs::read(out1.join(f)).unwrap(),
            fs::read(out2.join(f)).unwrap(),
            "{f}"
        );
    }
    let classes = fs::read_to_string(out1.join("classes.tsv")).unwrap();
    assert_eq!(classes, "0\tNeural_Networks\n1\tRule_Learning\n2\tTheory\n");
    let g: Graph64 = glt_core::io::load_graph(&out1).unwrap();
    assert_eq!(g.num_edges(), 8);

    let o = glt(&[
        "convert",
        "--input",
        s(tmp.path()),
        "--output",
        s(&tmp.path().join("x")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unrecognized layout"), "{}", stderr(&o));
}
