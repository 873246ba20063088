#![allow(dead_code)]

use glt_core::synthetic::erdos_renyi;
use glt_core::{CsrMatrix, Graph64, Matrix, Splits};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph with dense Gaussian-ish features, random labels and a half-labelled train mask.
pub fn labelled_graph(seed: u64, n: usize, f: usize, c: usize, p: f64) -> Graph64 {
    let mut r = rng(seed);
    let g: Graph64 = erdos_renyi(n, p, &mut r);
    let rows = (0..n)
        .map(|_| (0..f).map(|j| (j, r.random_range(-1.0..1.0))).collect())
        .collect();
    let features = CsrMatrix::from_rows(f, rows).unwrap();
    let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..c)).collect();
    let mut splits = Splits::empty(n);
    for v in 0..n {
        match v % 4 {
            0 | 1 => splits.train[v] = true,
            2 => splits.val[v] = true,
            _ => splits.test[v] = true,
        }
    }
    g.with_node_data(features, labels, c, splits).unwrap()
}

pub fn random_matrix(seed: u64, rows: usize, cols: usize, scale: f64) -> Matrix<f64> {
    let mut r = rng(seed);
    Matrix::from_fn(rows, cols, |_, _| r.random_range(-scale..scale))
}

/// Dense `D̃^-½ (A + I) D̃^-½` built straight from the edge list.
pub fn dense_self_loop_operator(g: &Graph64) -> Matrix<f64> {
    let n = g.num_nodes();
    let mut a = Matrix::<f64>::identity(n);
    for e in g.edges() {
        a.set(e.u, e.v, 1.0);
        a.set(e.v, e.u, 1.0);
    }
    let d: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
    Matrix::from_fn(n, n, |i, j| a.get(i, j) / (d[i] * d[j]).sqrt())
}
