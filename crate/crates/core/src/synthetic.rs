//! Seeded graph generators for tests, benchmarks and pipeline smoke runs.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{Edge, Graph, Splits};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

pub fn path<T: Scalar>(n: usize) -> Graph<T> {
    structure(n, (1..n).map(|v| Edge::new(v - 1, v)).collect())
}

pub fn cycle<T: Scalar>(n: usize) -> Graph<T> {
    assert!(n >= 3, "cycle needs at least 3 nodes");
    let mut edges: Vec<Edge> = (1..n).map(|v| Edge::new(v - 1, v)).collect();
    edges.push(Edge::new(0, n - 1));
    structure(n, edges)
}

pub fn complete<T: Scalar>(n: usize) -> Graph<T> {
    let edges = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| Edge::new(u, v)))
        .collect();
    structure(n, edges)
}

pub fn star<T: Scalar>(leaves: usize) -> Graph<T> {
    structure(leaves + 1, (1..=leaves).map(|v| Edge::new(0, v)).collect())
}

/// `G(n, p)`.
pub fn erdos_renyi<T: Scalar, R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph<T> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push(Edge::new(u, v));
            }
        }
    }
    structure(n, edges)
}

/// Preferential attachment: each new node links to `m` distinct earlier nodes.
pub fn barabasi_albert<T: Scalar, R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Graph<T> {
    let m = m.max(1);
    let mut edges = Vec::new();
    let mut ends: Vec<usize> = Vec::new();
    let seed = (m + 1).min(n);
    for u in 0..seed {
        for v in u + 1..seed {
            edges.push(Edge::new(u, v));
            ends.extend([u, v]);
        }
    }
    for v in seed..n {
        let mut picked = HashSet::new();
        while picked.len() < m.min(v) {
            let u = if ends.is_empty() {
                rng.random_range(0..v)
            } else {
                ends[rng.random_range(0..ends.len())]
            };
            picked.insert(u);
        }
        let mut picked: Vec<usize> = picked.into_iter().collect();
        picked.sort_unstable();
        for u in picked {
            edges.push(Edge::new(u, v));
            ends.extend([u, v]);
        }
    }
    structure(n, edges)
}

fn structure<T: Scalar>(n: usize, edges: Vec<Edge>) -> Graph<T> {
    Graph::from_edges(n, edges).expect("generator emits simple graphs")
}

/// Seeded split with `per_class` training nodes per class, then `val` and `test`
/// nodes drawn from the remainder. Counts shrink when the graph is too small.
pub fn public_style_split(
    labels: &[usize],
    num_classes: usize,
    per_class: usize,
    val: usize,
    test: usize,
    seed: u64,
) -> Splits {
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut splits = Splits::empty(n);
    let mut taken = vec![0usize; num_classes];
    let mut rest = Vec::with_capacity(n);
    for v in order {
        let y = labels[v];
        if taken[y] < per_class {
            taken[y] += 1;
            splits.train[v] = true;
        } else {
            rest.push(v);
        }
    }
    let val_end = val.min(rest.len());
    let test_end = (val_end + test).min(rest.len());
    for &v in &rest[..val_end] {
        splits.val[v] = true;
    }
    for &v in &rest[val_end..test_end] {
        splits.test[v] = true;
    }
    splits
}

/// Shape of a citation-like synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationLike {
    pub nodes: usize,
    pub edges: usize,
    pub classes: usize,
    pub features: usize,
    /// Share of edges drawn inside a class.
    pub homophily: f64,
    /// Nonzero words per node.
    pub words_per_node: usize,
    /// Share of a node's words drawn from its class vocabulary.
    pub topic_strength: f64,
    /// Pareto tail index of the degree propensities; smaller is heavier-tailed.
    pub degree_tail: f64,
    pub train_per_class: usize,
    pub val: usize,
    pub test: usize,
}

impl CitationLike {
    /// Roughly Cora-sized: 2708 nodes, 5278 edges, 7 classes, 1433 features.
    pub fn cora_sized() -> Self {
        Self {
            nodes: 2708,
            edges: 5278,
            classes: 7,
            features: 1433,
            homophily: 0.75,
            words_per_node: 18,
            topic_strength: 0.2,
            degree_tail: 2.0,
            train_per_class: 20,
            val: 500,
            test: 1000,
        }
    }

    pub fn small() -> Self {
        Self {
            nodes: 300,
            edges: 900,
            classes: 4,
            features: 60,
            homophily: 0.8,
            words_per_node: 8,
            topic_strength: 0.6,
            degree_tail: 2.0,
            train_per_class: 10,
            val: 60,
            test: 120,
        }
    }

    /// Degree-corrected block model with binary bag-of-words features (ℓ1
    /// row-normalized) and a seeded split of the configured sizes.
    pub fn generate<T: Scalar>(&self, seed: u64) -> Result<Graph<T>> {
        let n = self.nodes;
        let c = self.classes.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<usize> = (0..n).map(|v| v % c).collect();
        let propensity: Vec<f64> = (0..n)
            .map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / self.degree_tail))
            .collect();
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); c];
        for v in 0..n {
            by_class[labels[v]].push(v);
        }
        let all = Sampler::new((0..n).collect(), &propensity);
        let class_samplers: Vec<Sampler> = by_class
            .into_iter()
            .map(|members| Sampler::new(members, &propensity))
            .collect();

        let max_edges = n * n.saturating_sub(1) / 2;
        let target = self.edges.min(max_edges);
        let mut seen = HashSet::with_capacity(target);
        let mut edges = Vec::with_capacity(target);
        let mut attempts = 0usize;
        while edges.len() < target && attempts < 50 * target + 1000 {
            attempts += 1;
            let u = all.draw(&mut rng);
            let v = if rng.random::<f64>() < self.homophily {
                class_samplers[labels[u]].draw(&mut rng)
            } else {
                all.draw(&mut rng)
            };
            if u != v && seen.insert(Edge::new(u, v)) {
                edges.push(Edge::new(u, v));
            }
        }

        let f = self.features.max(1);
        let block = (f / c).max(1);
        let mut rows = Vec::with_capacity(n);
        for &label in &labels {
            let mut words = HashSet::new();
            let want = self.words_per_node.clamp(1, f);
            while words.len() < want {
                let w = if rng.random::<f64>() < self.topic_strength {
                    (label * block + rng.random_range(0..block)).min(f - 1)
                } else {
                    rng.random_range(0..f)
                };
                words.insert(w);
            }
            let mut words: Vec<usize> = words.into_iter().collect();
            words.sort_unstable();
            let weight = T::one() / T::from_count(words.len());
            rows.push(words.into_iter().map(|w| (w, weight)).collect::<Vec<_>>());
        }
        let features = CsrMatrix::from_rows(f, rows)?;
        let splits = public_style_split(
            &labels,
            c,
            self.train_per_class,
            self.val,
            self.test,
            seed ^ 0x5eed,
        );
        Graph::from_edges(n, edges)?.with_node_data(features, labels, c, splits)
    }
}

/// Weighted sampling over a fixed population by inverse CDF.
struct Sampler {
    members: Vec<usize>,
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(members: Vec<usize>, weight: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = members
            .iter()
            .map(|&v| {
                acc += weight[v];
                acc
            })
            .collect();
        Self {
            members,
            cumulative,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("nonempty population");
        let x = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= x);
        self.members[i.min(self.members.len() - 1)]
    }
}
