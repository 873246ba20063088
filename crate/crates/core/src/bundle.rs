//! Ticket bundle directory: `checkpoint.bin` (+ `checkpoint.json` sidecar),
//! `edge_mask.tsv` listing the pruned edges, bit-packed `param_mask.bin`,
//! and `metrics.json`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
use crate::error::{GltError, Result};
use crate::gcn::GcnParams;
use crate::graph::{Edge, Graph};
use crate::pipeline::LotteryTicket;
use crate::scalar::Scalar;

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const EDGE_MASK_FILE: &str = "edge_mask.tsv";
pub const PARAM_MASK_FILE: &str = "param_mask.bin";
pub const METRICS_FILE: &str = "metrics.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TicketMetrics {
    pub scorer: String,
    pub seed: u64,
    pub graph_sparsity: f64,
    pub weight_sparsity: f64,
    pub val_acc: f64,
    pub test_acc: f64,
    pub best_epoch: usize,
    pub teacher_val_acc: f64,
    pub teacher_test_acc: f64,
    pub teacher_best_epoch: usize,
    pub pruned_edges: usize,
    pub kept_params: usize,
}

/// `u64` LE bit count, then bits packed LSB-first.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = (bits.len() as u64).to_le_bytes().to_vec();
    out.resize(8 + bits.len().div_ceil(8), 0);
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[8 + i / 8] |= 1 << (i % 8);
        }
    }
    out
}

pub fn unpack_bits(bytes: &[u8]) -> Result<Vec<bool>> {
    let Some((len, body)) = bytes.split_first_chunk::<8>() else {
        return Err(GltError::Checkpoint(
            "param mask shorter than its header".into(),
        ));
    };
    let n = u64::from_le_bytes(*len) as usize;
    if body.len() != n.div_ceil(8) {
        return Err(GltError::Checkpoint(format!(
            "param mask holds {} bytes for {n} bits",
            body.len()
        )));
    }
    Ok((0..n).map(|i| body[i / 8] >> (i % 8) & 1 == 1).collect())
}

pub fn write_bundle<T: Scalar, U: Scalar>(
    dir: impl AsRef<Path>,
    original: &Graph<U>,
    ticket: &LotteryTicket<T>,
    metrics: &TicketMetrics,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| GltError::io(dir, e))?;
    let meta = CheckpointMeta::new(&ticket.sparse_params, metrics.seed, ticket.best_epoch);
    save_checkpoint(dir.join(CHECKPOINT_FILE), &ticket.sparse_params, &meta)?;

    let mut tsv = String::new();
    for k in ticket.edge_mask.pruned_indices() {
        let e = original.edges()[k];
        tsv.push_str(&format!("{}\t{}\n", e.u, e.v));
    }
    let path = dir.join(EDGE_MASK_FILE);
    fs::write(&path, tsv).map_err(|e| GltError::io(&path, e))?;

    let path = dir.join(PARAM_MASK_FILE);
    fs::write(&path, pack_bits(&ticket.param_mask)).map_err(|e| GltError::io(&path, e))?;

    let path = dir.join(METRICS_FILE);
    let json = serde_json::to_string_pretty(metrics).expect("metrics serialize");
    fs::write(&path, json + "\n").map_err(|e| GltError::io(&path, e))
}

/// Contents of a bundle as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TicketBundle<T> {
    pub params: GcnParams<T>,
    pub meta: CheckpointMeta,
    pub pruned_edges: Vec<Edge>,
    pub param_mask: Vec<bool>,
    pub metrics: TicketMetrics,
}

pub fn read_bundle<T: Scalar>(dir: impl AsRef<Path>) -> Result<TicketBundle<T>> {
    let dir = dir.as_ref();
    let (params, meta) = load_checkpoint(dir.join(CHECKPOINT_FILE))?;

    let path = dir.join(EDGE_MASK_FILE);
    let text = fs::read_to_string(&path).map_err(|e| GltError::io(&path, e))?;
    let mut pruned_edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse = |s: Option<&str>| {
            s.and_then(|t| t.trim().parse::<usize>().ok())
                .ok_or_else(|| GltError::Parse {
                    file: path.clone(),
                    line: i + 1,
                    message: format!("expected `u<TAB>v`, got {line:?}"),
                })
        };
        let mut it = line.split('\t');
        let u = parse(it.next())?;
        let v = parse(it.next())?;
        pruned_edges.push(Edge::new(u, v));
    }

    let path = dir.join(PARAM_MASK_FILE);
    let bytes = fs::read(&path).map_err(|e| GltError::io(&path, e))?;
    let param_mask = unpack_bits(&bytes)?;
    if param_mask.len() != params.num_params() {
        return Err(GltError::Checkpoint(format!(
            "param mask has {} bits for {} weights",
            param_mask.len(),
            params.num_params()
        )));
    }

    let path = dir.join(METRICS_FILE);
    let text = fs::read_to_string(&path).map_err(|e| GltError::io(&path, e))?;
    let metrics = serde_json::from_str(&text)
        .map_err(|e| GltError::Checkpoint(format!("{}: {e}", path.display())))?;
    Ok(TicketBundle {
        params,
        meta,
        pruned_edges,
        param_mask,
        metrics,
    })
}
