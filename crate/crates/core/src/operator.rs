//! Normalized sparse operators built from a graph's adjacency.

use crate::graph::Graph;
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// `D⁻¹A`; rows of isolated nodes are all zero.
    RowNormalized,
    /// `D̃^(-1/2) (A + I) D̃^(-1/2)` with `D̃ = D + I`, the GCN propagation matrix.
    SymmetricSelfLoop,
    /// `I − D^(-1/2) A D^(-1/2)`; isolated nodes get an all-zero row and column.
    NormalizedLaplacian,
}

impl OperatorKind {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, OperatorKind::RowNormalized)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedOperator<T> {
    kind: OperatorKind,
    matrix: CsrMatrix<T>,
}

impl<T: Scalar> NormalizedOperator<T> {
    pub fn new<U: Scalar>(g: &Graph<U>, kind: OperatorKind) -> Self {
        let n = g.num_nodes();
        let deg: Vec<T> = g.degrees().deg.into_iter().map(T::from_count).collect();
        let rows: Vec<Vec<(usize, T)>> = (0..n)
            .map(|i| {
                let nbrs = g.neighbors(i);
                match kind {
                    OperatorKind::RowNormalized => {
                        let w = if nbrs.is_empty() {
                            T::zero()
                        } else {
                            T::one() / deg[i]
                        };
                        nbrs.iter().map(|&j| (j, w)).collect()
                    }
                    OperatorKind::SymmetricSelfLoop => {
                        let di = deg[i] + T::one();
                        let mut row: Vec<(usize, T)> = nbrs
                            .iter()
                            .map(|&j| (j, T::one() / (di * (deg[j] + T::one())).sqrt()))
                            .collect();
                        row.push((i, T::one() / di));
                        row
                    }
                    OperatorKind::NormalizedLaplacian => {
                        if nbrs.is_empty() {
                            return Vec::new();
                        }
                        let mut row: Vec<(usize, T)> = nbrs
                            .iter()
                            .map(|&j| (j, -T::one() / (deg[i] * deg[j]).sqrt()))
                            .collect();
                        row.push((i, T::one()));
                        row
                    }
                }
            })
            .collect();
        Self {
            kind,
            matrix: CsrMatrix::from_rows(n, rows).expect("neighbour ids in range"),
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}
