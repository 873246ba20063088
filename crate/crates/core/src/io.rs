//! Text dataset directory: `edges.tsv`, `features.tsv`, `labels.tsv`, `split.tsv`.
//!
//! All node ids are 0-based. `features.tsv` fixes N (one row per node, ids
//! 0..N each exactly once). Features are row-normalized to unit ℓ1 on load.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{GltError, Result};
use crate::graph::{Edge, Graph, Splits};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

pub const EDGES_FILE: &str = "edges.tsv";
pub const FEATURES_FILE: &str = "features.tsv";
pub const LABELS_FILE: &str = "labels.tsv";
pub const SPLIT_FILE: &str = "split.tsv";

fn read(dir: &Path, name: &str) -> Result<(PathBuf, String)> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(GltError::MissingFile(path));
    }
    let text = fs::read_to_string(&path).map_err(|e| GltError::io(&path, e))?;
    Ok((path, text))
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((k + 1, line.split_whitespace().collect()))
        }
    })
}

fn parse_node(file: &Path, line: usize, tok: &str, n: usize) -> Result<usize> {
    let node: usize = tok.parse().map_err(|_| GltError::Parse {
        file: file.to_path_buf(),
        line,
        message: format!("bad node id `{tok}`"),
    })?;
    if node >= n {
        return Err(GltError::NodeOutOfRange {
            file: file.to_path_buf(),
            line,
            node,
            num_nodes: n,
        });
    }
    Ok(node)
}

pub fn load_graph<T: Scalar>(dir: impl AsRef<Path>) -> Result<Graph<T>> {
    let dir = dir.as_ref();
    let (fpath, ftext) = read(dir, FEATURES_FILE)?;
    let (epath, etext) = read(dir, EDGES_FILE)?;
    let (lpath, ltext) = read(dir, LABELS_FILE)?;
    let (spath, stext) = read(dir, SPLIT_FILE)?;

    let parse_err = |file: &Path, line: usize, message: String| GltError::Parse {
        file: file.to_path_buf(),
        line,
        message,
    };

    let feature_lines: Vec<(usize, Vec<&str>)> = records(&ftext).collect();
    let n = feature_lines.len();
    let width = feature_lines
        .first()
        .map_or(0, |(_, t)| t.len().saturating_sub(1));
    let mut feature_rows: Vec<Option<Vec<(usize, T)>>> = vec![None; n];
    for (line, toks) in &feature_lines {
        let node = parse_node(&fpath, *line, toks[0], n)?;
        if toks.len() - 1 != width {
            return Err(parse_err(
                &fpath,
                *line,
                format!("{} feature values, expected {width}", toks.len() - 1),
            ));
        }
        if feature_rows[node].is_some() {
            return Err(parse_err(
                &fpath,
                *line,
                format!("node {node} listed twice"),
            ));
        }
        let mut row = Vec::new();
        for (c, tok) in toks[1..].iter().enumerate() {
            let x: f64 = tok
                .parse()
                .map_err(|_| parse_err(&fpath, *line, format!("bad feature value `{tok}`")))?;
            if !x.is_finite() {
                return Err(parse_err(&fpath, *line, "non-finite feature value".into()));
            }
            if x != 0.0 {
                row.push((c, x));
            }
        }
        let l1: f64 = row.iter().map(|(_, x)| x.abs()).sum();
        feature_rows[node] = Some(
            row.into_iter()
                .map(|(c, x)| (c, T::lit(if l1 > 0.0 { x / l1 } else { x })))
                .collect(),
        );
    }
    let feature_rows: Vec<Vec<(usize, T)>> = feature_rows
        .into_iter()
        .map(|r| r.expect("n rows with distinct in-range ids cover 0..n"))
        .collect();
    let features = CsrMatrix::from_rows(width, feature_rows)?;

    let mut edges = Vec::new();
    for (line, toks) in records(&etext) {
        if toks.len() != 2 {
            return Err(parse_err(&epath, line, "expected two node ids".into()));
        }
        let a = parse_node(&epath, line, toks[0], n)?;
        let b = parse_node(&epath, line, toks[1], n)?;
        edges.push((Edge::new(a, b), format!("{}:{line}", epath.display())));
    }

    let mut labels: Vec<Option<usize>> = vec![None; n];
    for (line, toks) in records(&ltext) {
        if toks.len() != 2 {
            return Err(parse_err(
                &lpath,
                line,
                "expected node id and class id".into(),
            ));
        }
        let node = parse_node(&lpath, line, toks[0], n)?;
        let class: usize = toks[1]
            .parse()
            .map_err(|_| parse_err(&lpath, line, format!("bad class id `{}`", toks[1])))?;
        if labels[node].replace(class).is_some() {
            return Err(parse_err(
                &lpath,
                line,
                format!("node {node} labelled twice"),
            ));
        }
    }
    let labels: Vec<usize> = labels
        .into_iter()
        .enumerate()
        .map(|(v, y)| y.ok_or_else(|| parse_err(&lpath, 0, format!("node {v} has no label"))))
        .collect::<Result<_>>()?;
    let num_classes = labels.iter().max().map_or(0, |&m| m + 1);

    let mut splits = Splits::empty(n);
    let mut seen = vec![false; n];
    for (line, toks) in records(&stext) {
        if toks.len() != 2 {
            return Err(parse_err(
                &spath,
                line,
                "expected node id and split name".into(),
            ));
        }
        let node = parse_node(&spath, line, toks[0], n)?;
        if std::mem::replace(&mut seen[node], true) {
            return Err(parse_err(
                &spath,
                line,
                format!("node {node} assigned twice"),
            ));
        }
        match toks[1] {
            "train" => splits.train[node] = true,
            "val" => splits.val[node] = true,
            "test" => splits.test[node] = true,
            other => {
                return Err(parse_err(
                    &spath,
                    line,
                    format!("unknown split `{other}` (train|val|test)"),
                ))
            }
        }
    }

    Graph::from_located_edges(n, edges)?.with_node_data(features, labels, num_classes, splits)
}

/// Writes a dataset directory readable by [`load_graph`]. Output is deterministic.
pub fn write_dataset<T: Scalar>(g: &Graph<T>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| GltError::io(dir, e))?;
    let write = |name: &str, body: String| {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| GltError::io(&path, e))
    };

    let mut edges = String::new();
    for e in g.edges() {
        writeln!(edges, "{}\t{}", e.u, e.v).unwrap();
    }
    write(EDGES_FILE, edges)?;

    let f = g.num_features();
    let mut feats = String::new();
    let mut dense_row = vec![0.0f64; f];
    for v in 0..g.num_nodes() {
        dense_row.iter_mut().for_each(|x| *x = 0.0);
        let (cols, vals) = g.features().row(v);
        for (&c, &x) in cols.iter().zip(vals) {
            dense_row[c] = x.as_f64();
        }
        write!(feats, "{v}").unwrap();
        for x in &dense_row {
            if *x == 0.0 {
                feats.push_str(" 0");
            } else {
                write!(feats, " {x}").unwrap();
            }
        }
        feats.push('\n');
    }
    write(FEATURES_FILE, feats)?;

    let mut labels = String::new();
    for (v, y) in g.labels().iter().enumerate() {
        writeln!(labels, "{v}\t{y}").unwrap();
    }
    write(LABELS_FILE, labels)?;

    let s = g.splits();
    let mut split = String::new();
    for v in 0..g.num_nodes() {
        let name = if s.train[v] {
            "train"
        } else if s.val[v] {
            "val"
        } else if s.test[v] {
            "test"
        } else {
            continue;
        };
        writeln!(split, "{v}\t{name}").unwrap();
    }
    write(SPLIT_FILE, split)
}
