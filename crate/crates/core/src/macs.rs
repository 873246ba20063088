//! Inference multiply-accumulate count for the two-layer GCN.
//!
//! Per layer: aggregation costs `nnz(A' + I) · F_out` (2M directed entries plus
//! N self-loops) and the dense transform costs `nnz(W_layer) · N`. Activations
//! and softmax are not counted.

use serde::{Deserialize, Serialize};

use crate::error::{GltError, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacsBreakdown {
    pub aggregation: u64,
    pub transform: u64,
    pub total: u64,
}

/// `dims = (F, H, C)`; `param_mask` is in flattened `(W0, W1)` order.
pub fn compute_macs<T: Scalar>(
    g: &Graph<T>,
    param_mask: &[bool],
    dims: (usize, usize, usize),
) -> Result<MacsBreakdown> {
    let (f, h, c) = dims;
    let split = f * h;
    if param_mask.len() != split + h * c {
        return Err(GltError::DimensionMismatch(format!(
            "parameter mask of length {} for F={f} H={h} C={c}",
            param_mask.len()
        )));
    }
    let n = g.num_nodes() as u64;
    let propagation_nnz = 2 * g.num_edges() as u64 + n;
    let aggregation = propagation_nnz * (h + c) as u64;
    let kept = param_mask.iter().filter(|&&k| k).count() as u64;
    let transform = kept * n;
    Ok(MacsBreakdown {
        aggregation,
        transform,
        total: aggregation + transform,
    })
}
