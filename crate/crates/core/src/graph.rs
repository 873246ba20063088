//! Canonical undirected graph with node data and degree statistics.
//!
//! Edges are stored once as `(u, v)` with `u < v`, sorted lexicographically.
//! Masks and score tables index this list. The CSR adjacency stores both
//! directions (2M entries) and records, for each entry, the canonical edge id.

use crate::error::{GltError, Result};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

/// Undirected edge in canonical orientation (`u < v`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    /// Canonicalizes the endpoint order. Self-loops are representable here but
    /// rejected by every graph constructor.
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }
}

impl From<(usize, usize)> for Edge {
    fn from((a, b): (usize, usize)) -> Self {
        Edge::new(a, b)
    }
}

/// Symmetric adjacency in CSR form; `edge_ids[k]` maps entry `k` to its canonical edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    edge_ids: Vec<usize>,
}

impl Adjacency {
    fn from_sorted_edges(num_nodes: usize, edges: &[Edge]) -> Self {
        let mut counts = vec![0usize; num_nodes + 1];
        for e in edges {
            counts[e.u + 1] += 1;
            counts[e.v + 1] += 1;
        }
        for k in 0..num_nodes {
            counts[k + 1] += counts[k];
        }
        let indptr = counts;
        let mut cursor = indptr.clone();
        let mut indices = vec![0usize; 2 * edges.len()];
        let mut edge_ids = vec![0usize; 2 * edges.len()];
        // Walking the sorted list fills every row in ascending neighbour order:
        // row w first receives its smaller neighbours (as `v`), then larger ones (as `u`).
        for (id, e) in edges.iter().enumerate() {
            indices[cursor[e.v]] = e.u;
            edge_ids[cursor[e.v]] = id;
            cursor[e.v] += 1;
        }
        for (id, e) in edges.iter().enumerate() {
            indices[cursor[e.u]] = e.v;
            edge_ids[cursor[e.u]] = id;
            cursor[e.u] += 1;
        }
        Self {
            indptr,
            indices,
            edge_ids,
        }
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn edge_ids(&self) -> &[usize] {
        &self.edge_ids
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.indices[self.indptr[v]..self.indptr[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.indptr[v + 1] - self.indptr[v]
    }

    /// Number of stored directed entries (2M).
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

/// Node degrees of the raw graph (self-loops are never stored).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector {
    pub deg: Vec<usize>,
}

impl DegreeVector {
    pub fn max(&self) -> usize {
        self.deg.iter().copied().max().unwrap_or(0)
    }

    pub fn min(&self) -> usize {
        self.deg.iter().copied().min().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.deg.iter().sum()
    }

    pub fn isolated_count(&self) -> usize {
        self.deg.iter().filter(|&&d| d == 0).count()
    }
}

/// Node partition used for semi-supervised training.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

impl Splits {
    pub fn empty(n: usize) -> Self {
        Self {
            train: vec![false; n],
            val: vec![false; n],
            test: vec![false; n],
        }
    }
}

/// Undirected graph with node features, labels and split masks.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T> {
    num_nodes: usize,
    edges: Vec<Edge>,
    adjacency: Adjacency,
    features: CsrMatrix<T>,
    labels: Vec<usize>,
    num_classes: usize,
    splits: Splits,
}

impl<T: Scalar> Graph<T> {
    /// Structure-only graph: zero-width features, all labels 0, empty masks.
    pub fn from_edges<E: Into<Edge>>(
        num_nodes: usize,
        edges: impl IntoIterator<Item = E>,
    ) -> Result<Self> {
        let located = edges
            .into_iter()
            .enumerate()
            .map(|(k, e)| (e.into(), format!("edge #{k}")));
        Self::from_located_edges(num_nodes, located)
    }

    /// Builds a graph from edges that carry a human-readable source location,
    /// so duplicate or malformed entries are reported where they came from.
    pub fn from_located_edges(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (Edge, String)>,
    ) -> Result<Self> {
        let edges = canonical_edges(num_nodes, edges)?;
        let adjacency = Adjacency::from_sorted_edges(num_nodes, &edges);
        Ok(Self {
            num_nodes,
            edges,
            adjacency,
            features: CsrMatrix::from_rows(0, vec![Vec::new(); num_nodes])?,
            labels: vec![0; num_nodes],
            num_classes: 1,
            splits: Splits::empty(num_nodes),
        })
    }

    /// Attaches node data, validating shapes, label range, finiteness and mask disjointness.
    pub fn with_node_data(
        mut self,
        features: CsrMatrix<T>,
        labels: Vec<usize>,
        num_classes: usize,
        splits: Splits,
    ) -> Result<Self> {
        let n = self.num_nodes;
        if features.nrows() != n {
            return Err(GltError::InvalidGraph(format!(
                "feature matrix has {} rows, expected {n}",
                features.nrows()
            )));
        }
        if labels.len() != n {
            return Err(GltError::InvalidGraph(format!(
                "{} labels for {n} nodes",
                labels.len()
            )));
        }
        if let Some((v, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= num_classes) {
            return Err(GltError::InvalidGraph(format!(
                "label {y} of node {v} outside [0,{num_classes})"
            )));
        }
        if features.values().iter().any(|x| !x.is_finite()) {
            return Err(GltError::InvalidGraph("non-finite feature value".into()));
        }
        for (name, mask) in [
            ("train", &splits.train),
            ("val", &splits.val),
            ("test", &splits.test),
        ] {
            if mask.len() != n {
                return Err(GltError::InvalidGraph(format!(
                    "{name} mask has length {}, expected {n}",
                    mask.len()
                )));
            }
        }
        for v in 0..n {
            let hits = splits.train[v] as u8 + splits.val[v] as u8 + splits.test[v] as u8;
            if hits > 1 {
                return Err(GltError::InvalidGraph(format!(
                    "node {v} belongs to more than one split"
                )));
            }
        }
        self.features = features;
        self.labels = labels;
        self.num_classes = num_classes;
        self.splits = splits;
        Ok(self)
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    pub fn features(&self) -> &CsrMatrix<T> {
        &self.features
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn splits(&self) -> &Splits {
        &self.splits
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.adjacency.neighbors(v)
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector {
            deg: (0..self.num_nodes)
                .map(|v| self.adjacency.degree(v))
                .collect(),
        }
    }

    /// Position of `e` in the canonical edge list.
    pub fn edge_index(&self, e: impl Into<Edge>) -> Option<usize> {
        self.edges.binary_search(&e.into()).ok()
    }

    /// Mean of the endpoint degrees, `(|N(u)| + |N(v)|) / 2`.
    pub fn edge_degree(&self, e: impl Into<Edge>) -> Result<f64> {
        let e = e.into();
        self.edge_index(e).ok_or(GltError::EdgeNotFound(e.u, e.v))?;
        Ok(self.edge_degree_unchecked(e))
    }

    #[inline]
    pub(crate) fn edge_degree_unchecked(&self, e: Edge) -> f64 {
        (self.adjacency.degree(e.u) + self.adjacency.degree(e.v)) as f64 / 2.0
    }

    /// Edge degree of every canonical edge, in edge-list order.
    pub fn edge_degrees(&self) -> Vec<f64> {
        self.edges
            .iter()
            .map(|&e| self.edge_degree_unchecked(e))
            .collect()
    }

    /// Endpoint-averaged mean neighbour degree:
    /// `(mean_{a∈N(u)} |N(a)| + mean_{b∈N(v)} |N(b)|) / 2`.
    pub fn edge_degree_2hop(&self, e: impl Into<Edge>) -> Result<f64> {
        let e = e.into();
        self.edge_index(e).ok_or(GltError::EdgeNotFound(e.u, e.v))?;
        let mean_nbr_degree = |w: usize| -> Result<f64> {
            let nbrs = self.neighbors(w);
            if nbrs.is_empty() {
                return Err(GltError::UndefinedDegree(w));
            }
            let total: usize = nbrs.iter().map(|&a| self.adjacency.degree(a)).sum();
            Ok(total as f64 / nbrs.len() as f64)
        };
        Ok((mean_nbr_degree(e.u)? + mean_nbr_degree(e.v)?) / 2.0)
    }

    /// `sqrt((deg_max + 1) / (deg_min + 1))`; isolated nodes pull `deg_min` to 0.
    pub fn degree_ratio_bound(&self) -> f64 {
        let d = self.degrees();
        ((d.max() + 1) as f64 / (d.min() + 1) as f64).sqrt()
    }

    /// Reconstructs the canonical edge list from the CSR adjacency.
    pub fn edges_from_csr(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edges.len());
        for u in 0..self.num_nodes {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push(Edge { u, v });
                }
            }
        }
        out
    }

    /// Same nodes and node data, keeping only edges with `keep[id] == true`.
    pub fn retain_edges(&self, keep: &[bool]) -> Result<Self> {
        if keep.len() != self.edges.len() {
            return Err(GltError::DimensionMismatch(format!(
                "edge mask of length {} for {} edges",
                keep.len(),
                self.edges.len()
            )));
        }
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(&e, _)| e)
            .collect();
        let adjacency = Adjacency::from_sorted_edges(self.num_nodes, &edges);
        Ok(Self {
            num_nodes: self.num_nodes,
            edges,
            adjacency,
            features: self.features.clone(),
            labels: self.labels.clone(),
            num_classes: self.num_classes,
            splits: self.splits.clone(),
        })
    }

    /// Graph without edge `e`; degrees are recomputed by construction.
    pub fn without_edge(&self, e: impl Into<Edge>) -> Result<Self> {
        let e = e.into();
        let id = self.edge_index(e).ok_or(GltError::EdgeNotFound(e.u, e.v))?;
        let mut keep = vec![true; self.edges.len()];
        keep[id] = false;
        self.retain_edges(&keep)
    }

    /// Two disjoint copies side by side: nodes of `other` are shifted by `self.num_nodes()`.
    pub fn disjoint_union(&self, other: &Graph<T>) -> Result<Self> {
        let shift = self.num_nodes;
        let n = shift + other.num_nodes;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|e| Edge {
                u: e.u + shift,
                v: e.v + shift,
            }));
        let base = Graph::from_edges(n, edges)?;
        if self.num_features() != other.num_features() {
            return Err(GltError::DimensionMismatch(
                "disjoint union of graphs with different feature widths".into(),
            ));
        }
        let mut rows = Vec::with_capacity(n);
        for g in [self, other] {
            for v in 0..g.num_nodes {
                let (cols, vals) = g.features.row(v);
                rows.push(cols.iter().copied().zip(vals.iter().copied()).collect());
            }
        }
        let features = CsrMatrix::from_rows(self.num_features(), rows)?;
        let cat = |a: &[bool], b: &[bool]| a.iter().chain(b).copied().collect::<Vec<_>>();
        let splits = Splits {
            train: cat(&self.splits.train, &other.splits.train),
            val: cat(&self.splits.val, &other.splits.val),
            test: cat(&self.splits.test, &other.splits.test),
        };
        let labels = self.labels.iter().chain(&other.labels).copied().collect();
        base.with_node_data(
            features,
            labels,
            self.num_classes.max(other.num_classes),
            splits,
        )
    }
}

fn canonical_edges(
    num_nodes: usize,
    edges: impl IntoIterator<Item = (Edge, String)>,
) -> Result<Vec<Edge>> {
    let mut tagged: Vec<(Edge, String)> = Vec::new();
    for (e, loc) in edges {
        if e.v >= num_nodes {
            return Err(GltError::InvalidGraph(format!(
                "{loc}: node index {} out of range (N={num_nodes})",
                e.v
            )));
        }
        if e.u == e.v {
            return Err(GltError::SelfLoop {
                location: loc,
                node: e.u,
            });
        }
        tagged.push((e, loc));
    }
    tagged.sort_by_key(|t| t.0);
    for w in tagged.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(GltError::DuplicateEdge {
                location: format!("{} (first seen at {})", w[1].1, w[0].1),
                i: w[0].0.u,
                j: w[0].0.v,
            });
        }
    }
    Ok(tagged.into_iter().map(|(e, _)| e).collect())
}
