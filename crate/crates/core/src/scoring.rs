//! Degree-based edge scores and one-shot edge pruning.
//!
//! TEDDY scores every edge `(i, j)` by `g̃(i)·g̃(j)` where
//! `g(v) = 1/√deg(v)`, `ḡ = D⁻¹A g` and `g̃ = D⁻¹ ḡ`. Only existing edges are
//! evaluated, so the cost is O(N + M). Smaller scores are pruned first.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GltError, Result};
use crate::graph::Graph;
use crate::operator::{NormalizedOperator, OperatorKind};
use crate::scalar::{robust_ceil, Scalar};

/// Which scorer produced an [`EdgeScoreTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScorerKind {
    Teddy,
    /// i.i.d. uniform scores (DropEdge-style random pruning).
    Random {
        seed: u64,
    },
    /// Score = edge degree, so low-degree edges go first.
    LowestDegree,
    /// Score = −edge degree, so high-degree edges go first.
    HighestDegree,
    /// Score = 1 / edge degree; TEDDY's polarity with 1-hop information only.
    OneHopDegree,
}

impl ScorerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScorerKind::Teddy => "teddy",
            ScorerKind::Random { .. } => "random",
            ScorerKind::LowestDegree => "lowest_degree",
            ScorerKind::HighestDegree => "highest_degree",
            ScorerKind::OneHopDegree => "one_hop_degree",
        }
    }

    /// Same scorer with its random seed replaced; deterministic scorers are unchanged.
    pub fn reseeded(self, seed: u64) -> Self {
        match self {
            ScorerKind::Random { .. } => ScorerKind::Random { seed },
            other => other,
        }
    }
}

impl fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScorerKind {
    type Err = GltError;

    /// Accepts `teddy`, `random`, `random:<seed>`, `lowest_degree`, `highest_degree`, `one_hop_degree`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed
                .parse()
                .map_err(|_| GltError::config("scorer", format!("bad random seed in `{s}`")))?;
            return Ok(ScorerKind::Random { seed });
        }
        match s {
            "teddy" => Ok(ScorerKind::Teddy),
            "random" => Ok(ScorerKind::Random { seed: 0 }),
            "lowest_degree" => Ok(ScorerKind::LowestDegree),
            "highest_degree" => Ok(ScorerKind::HighestDegree),
            "one_hop_degree" => Ok(ScorerKind::OneHopDegree),
            other => Err(GltError::config(
                "scorer",
                format!(
                    "unknown scorer `{other}` (teddy|random|lowest_degree|highest_degree|one_hop_degree)"
                ),
            )),
        }
    }
}

/// Per-edge scores aligned with [`Graph::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeScoreTable<T> {
    scores: Vec<T>,
    scorer: ScorerKind,
}

impl<T: Scalar> EdgeScoreTable<T> {
    pub fn new(scores: Vec<T>, scorer: ScorerKind) -> Result<Self> {
        if let Some(k) = scores.iter().position(|s| !s.is_finite()) {
            return Err(GltError::InvalidGraph(format!(
                "non-finite score at edge {k}"
            )));
        }
        Ok(Self { scores, scorer })
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn scorer(&self) -> ScorerKind {
        self.scorer
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// TSV rows `u<TAB>v<TAB>score` in canonical edge order.
    pub fn write_tsv<U: Scalar>(&self, g: &Graph<U>, mut out: impl Write) -> std::io::Result<()> {
        for (e, s) in g.edges().iter().zip(&self.scores) {
            writeln!(out, "{}\t{}\t{}", e.u, e.v, s)?;
        }
        Ok(())
    }
}

/// Produces edge scores for a graph. Implemented by [`ScorerKind`]; the
/// pipeline is generic over it so callers can wrap or instrument scoring.
pub trait EdgeScorer {
    fn kind(&self) -> ScorerKind;
    fn score<T: Scalar>(&self, g: &Graph<T>) -> EdgeScoreTable<T>;
}

impl EdgeScorer for ScorerKind {
    fn kind(&self) -> ScorerKind {
        *self
    }

    fn score<T: Scalar>(&self, g: &Graph<T>) -> EdgeScoreTable<T> {
        match *self {
            ScorerKind::Teddy => teddy_scores(g),
            other => baseline_scores(g, other),
        }
    }
}

/// `g(v) = 1/√deg(v)`, and 0 for isolated nodes.
pub fn node_score_g<T: Scalar>(g: &Graph<T>) -> Vec<T> {
    g.degrees()
        .deg
        .into_iter()
        .map(|d| {
            if d == 0 {
                T::zero()
            } else {
                T::one() / T::from_count(d).sqrt()
            }
        })
        .collect()
}

/// Neighbour average `ḡ = D⁻¹A g`; 0 for isolated nodes.
pub fn neighbor_avg_gbar<T: Scalar>(g: &Graph<T>, gvec: &[T]) -> Result<Vec<T>> {
    NormalizedOperator::<T>::new(g, OperatorKind::RowNormalized)
        .matrix()
        .matvec(gvec)
}

/// `g̃(v) = ḡ(v) / deg(v)`; 0 for isolated nodes.
pub fn node_score_gtilde<T: Scalar>(g: &Graph<T>, gbar: &[T]) -> Result<Vec<T>> {
    if gbar.len() != g.num_nodes() {
        return Err(GltError::DimensionMismatch(format!(
            "ḡ has length {}, graph has {} nodes",
            gbar.len(),
            g.num_nodes()
        )));
    }
    Ok(g.degrees()
        .deg
        .iter()
        .zip(gbar)
        .map(|(&d, &b)| {
            if d == 0 {
                T::zero()
            } else {
                b / T::from_count(d)
            }
        })
        .collect())
}

/// Intermediate node vectors of the TEDDY score.
#[derive(Debug, Clone, PartialEq)]
pub struct TeddyVectors<T> {
    pub g: Vec<T>,
    pub gbar: Vec<T>,
    pub gtilde: Vec<T>,
}

pub fn teddy_vectors<T: Scalar>(g: &Graph<T>) -> TeddyVectors<T> {
    let gv = node_score_g(g);
    let gbar = neighbor_avg_gbar(g, &gv).expect("length N");
    let gtilde = node_score_gtilde(g, &gbar).expect("length N");
    TeddyVectors {
        g: gv,
        gbar,
        gtilde,
    }
}

/// `T_edge[(i,j)] = g̃(i)·g̃(j)` on existing edges only.
pub fn teddy_scores<T: Scalar>(g: &Graph<T>) -> EdgeScoreTable<T> {
    let gt = teddy_vectors(g).gtilde;
    let scores = g.edges().iter().map(|e| gt[e.u] * gt[e.v]).collect();
    EdgeScoreTable::new(scores, ScorerKind::Teddy).expect("finite degree scores")
}

/// Baseline scorers used for the degree-direction and random-pruning comparisons.
pub fn baseline_scores<T: Scalar>(g: &Graph<T>, kind: ScorerKind) -> EdgeScoreTable<T> {
    let scores: Vec<T> = match kind {
        ScorerKind::Teddy => return teddy_scores(g),
        ScorerKind::Random { seed } => {
            // Counter-based: edge k always reads the first word of stream k.
            let base = ChaCha8Rng::seed_from_u64(seed);
            (0..g.num_edges())
                .map(|k| {
                    let mut rng = base.clone();
                    rng.set_stream(k as u64);
                    T::lit(rng.random::<f64>())
                })
                .collect()
        }
        ScorerKind::LowestDegree => g.edge_degrees().into_iter().map(T::lit).collect(),
        ScorerKind::HighestDegree => g.edge_degrees().into_iter().map(|d| T::lit(-d)).collect(),
        ScorerKind::OneHopDegree => g
            .edge_degrees()
            .into_iter()
            .map(|d| T::lit(1.0 / d))
            .collect(),
    };
    EdgeScoreTable::new(scores, kind).expect("finite baseline scores")
}

/// Boolean keep-mask over the canonical edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMask {
    pub keep: Vec<bool>,
    pub graph_sparsity: f64,
}

impl EdgeMask {
    pub fn pruned_count(&self) -> usize {
        self.keep.iter().filter(|k| !**k).count()
    }

    pub fn pruned_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.keep
            .iter()
            .enumerate()
            .filter(|(_, k)| !**k)
            .map(|(i, _)| i)
    }

    /// Mean edge degree (in the original graph) of the pruned edges; 0 if none were pruned.
    pub fn mean_pruned_edge_degree<T: Scalar>(&self, original: &Graph<T>) -> f64 {
        let degs = original.edge_degrees();
        let (sum, count) = self
            .pruned_indices()
            .fold((0.0, 0usize), |(s, c), k| (s + degs[k], c + 1));
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

/// Number of edges removed at sparsity `p_g`: `⌈p_g · M⌉`.
pub fn pruned_edge_count(p_g: f64, num_edges: usize) -> usize {
    robust_ceil(p_g * num_edges as f64).min(num_edges)
}

/// Removes the `⌈p_g·M⌉` lowest-scoring edges (ties by ascending edge index).
pub fn prune_edges<T: Scalar>(
    g: &Graph<T>,
    table: &EdgeScoreTable<T>,
    p_g: f64,
) -> Result<(Graph<T>, EdgeMask)> {
    if !(0.0..1.0).contains(&p_g) {
        return Err(GltError::config("p_g", format!("{p_g} not in [0, 1)")));
    }
    let m = g.num_edges();
    if table.len() != m {
        return Err(GltError::DimensionMismatch(format!(
            "{} scores for {m} edges",
            table.len()
        )));
    }
    let k = pruned_edge_count(p_g, m);
    let scores = table.scores();
    let by_score = |a: &usize, b: &usize| {
        scores[*a]
            .partial_cmp(&scores[*b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    let mut order: Vec<usize> = (0..m).collect();
    if k > 0 && k < m {
        order.select_nth_unstable_by(k - 1, by_score);
    }
    let mut keep = vec![true; m];
    for &idx in &order[..k] {
        keep[idx] = false;
    }
    let mask = EdgeMask {
        keep,
        graph_sparsity: if m == 0 { 0.0 } else { k as f64 / m as f64 },
    };
    Ok((g.retain_edges(&mask.keep)?, mask))
}

/// One row of a pruned-degree profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrunedDegreeRow {
    pub p_g: f64,
    pub pruned_edges: usize,
    pub mean_pruned_edge_degree: f64,
}

/// Mean original edge degree of the edges `table` prunes at each `p_g` in `grid`.
pub fn pruned_degree_profile<T: Scalar>(
    g: &Graph<T>,
    table: &EdgeScoreTable<T>,
    grid: &[f64],
) -> Result<Vec<PrunedDegreeRow>> {
    grid.iter()
        .map(|&p_g| {
            let (_, mask) = prune_edges(g, table, p_g)?;
            Ok(PrunedDegreeRow {
                p_g,
                pruned_edges: mask.pruned_count(),
                mean_pruned_edge_degree: mask.mean_pruned_edge_degree(g),
            })
        })
        .collect()
}
