//! LINQS citation-network layout (`<name>.content`, `<name>.cites`) to the
//! dataset directory format.
//!
//! `.content` rows are `paper_id w_1 … w_F class_label`; `.cites` rows are
//! `cited_id citing_id`. Nodes keep `.content` order, classes are numbered in
//! sorted label order. Citations are made undirected; self-citations,
//! repeats and ids missing from `.content` are dropped and counted.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use glt_core::io::write_dataset;
use glt_core::synthetic::public_style_split;
use glt_core::{CsrMatrix, Edge, Graph64};

use crate::error::{io_error, CliError, CliResult};

pub const TRAIN_PER_CLASS: usize = 20;
pub const VAL_NODES: usize = 500;
pub const TEST_NODES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvertSummary {
    pub nodes: usize,
    pub edges: usize,
    pub classes: usize,
    pub features: usize,
    pub self_citations: usize,
    pub repeated_citations: usize,
    pub dangling_citations: usize,
}

impl std::fmt::Display for ConvertSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "N={} M={} C={} F={}",
            self.nodes, self.edges, self.classes, self.features
        )
    }
}

/// Finds the single `*.content` / `*.cites` pair in `dir`, or the pair named `name`.
fn locate(dir: &Path, name: Option<&str>) -> CliResult<(PathBuf, PathBuf)> {
    if let Some(name) = name {
        let content = dir.join(format!("{name}.content"));
        let cites = dir.join(format!("{name}.cites"));
        if content.is_file() && cites.is_file() {
            return Ok((content, cites));
        }
        return Err(CliError::Validation(format!(
            "unrecognized layout: {} needs {name}.content and {name}.cites",
            dir.display()
        )));
    }
    let entries = fs::read_dir(dir).map_err(|e| io_error(dir, e))?;
    let mut stems = BTreeSet::new();
    for entry in entries {
        let path = entry.map_err(|e| io_error(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "content") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                if dir.join(format!("{stem}.cites")).is_file() {
                    stems.insert(stem.to_string());
                }
            }
        }
    }
    match stems.len() {
        1 => {
            let stem = stems.into_iter().next().unwrap();
            Ok((
                dir.join(format!("{stem}.content")),
                dir.join(format!("{stem}.cites")),
            ))
        }
        0 => Err(CliError::Validation(format!(
            "unrecognized layout: no <name>.content / <name>.cites pair in {}",
            dir.display()
        ))),
        _ => Err(CliError::Validation(format!(
            "ambiguous layout: several datasets in {} ({}); pass --name",
            dir.display(),
            stems.into_iter().collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Validation(format!("{}:{line}: {}", path.display(), message.into()))
}

pub fn convert_linqs(
    input: &Path,
    output: &Path,
    name: Option<&str>,
    split_seed: u64,
) -> CliResult<ConvertSummary> {
    let (content_path, cites_path) = locate(input, name)?;
    let content = fs::read_to_string(&content_path).map_err(|e| io_error(&content_path, e))?;

    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut raw_labels = Vec::new();
    let mut rows = Vec::new();
    let mut width: Option<usize> = None;
    for (k, line) in content.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 2 {
            return Err(parse_error(
                &content_path,
                k + 1,
                "expected id, features, label",
            ));
        }
        let f = toks.len() - 2;
        if *width.get_or_insert(f) != f {
            return Err(parse_error(
                &content_path,
                k + 1,
                format!("{f} features, earlier rows have {}", width.unwrap()),
            ));
        }
        let v = ids.len();
        if ids.insert(toks[0].to_string(), v).is_some() {
            return Err(parse_error(
                &content_path,
                k + 1,
                format!("duplicate paper id {}", toks[0]),
            ));
        }
        let mut row = Vec::new();
        for (j, t) in toks[1..=f].iter().enumerate() {
            let x: f64 = t
                .parse()
                .map_err(|_| parse_error(&content_path, k + 1, format!("bad feature `{t}`")))?;
            if x != 0.0 {
                row.push((j, x));
            }
        }
        rows.push(row);
        raw_labels.push(toks[f + 1].to_string());
    }
    let n = ids.len();
    if n == 0 {
        return Err(parse_error(&content_path, 1, "no nodes"));
    }
    let f = width.unwrap_or(0);
    let classes: Vec<&String> = raw_labels
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let class_of: HashMap<&String, usize> =
        classes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let labels: Vec<usize> = raw_labels.iter().map(|l| class_of[l]).collect();
    let c = classes.len();

    let cites = fs::read_to_string(&cites_path).map_err(|e| io_error(&cites_path, e))?;
    let mut seen = BTreeSet::new();
    let (mut self_citations, mut repeated, mut dangling) = (0, 0, 0);
    for (k, line) in cites.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 2 {
            return Err(parse_error(&cites_path, k + 1, "expected `cited citing`"));
        }
        let (Some(&a), Some(&b)) = (ids.get(toks[0]), ids.get(toks[1])) else {
            dangling += 1;
            continue;
        };
        if a == b {
            self_citations += 1;
        } else if !seen.insert(Edge::new(a, b)) {
            repeated += 1;
        }
    }
    let edges: Vec<Edge> = seen.into_iter().collect();
    let m = edges.len();

    let features = CsrMatrix::from_rows(f, rows)?;
    let splits = public_style_split(
        &labels,
        c,
        TRAIN_PER_CLASS,
        VAL_NODES,
        TEST_NODES,
        split_seed,
    );
    let g = Graph64::from_edges(n, edges)?.with_node_data(features, labels, c, splits)?;
    write_dataset(&g, output)?;

    let mut id_map = vec![""; n];
    for (id, &v) in &ids {
        id_map[v] = id;
    }
    let mut node_ids = String::new();
    for (v, id) in id_map.iter().enumerate() {
        node_ids.push_str(&format!("{v}\t{id}\n"));
    }
    let path = output.join("node_ids.tsv");
    fs::write(&path, node_ids).map_err(|e| io_error(&path, e))?;
    let mut class_names = String::new();
    for (i, name) in classes.iter().enumerate() {
        class_names.push_str(&format!("{i}\t{name}\n"));
    }
    let path = output.join("classes.tsv");
    fs::write(&path, class_names).map_err(|e| io_error(&path, e))?;

    Ok(ConvertSummary {
        nodes: n,
        edges: m,
        classes: c,
        features: f,
        self_citations,
        repeated_citations: repeated,
        dangling_citations: dangling,
    })
}
