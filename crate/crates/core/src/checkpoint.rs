//! Binary weight checkpoints.
//!
//! Layout, all little-endian: 8-byte magic `GLTCKPT\0`, `u32` version,
//! `u64` F, H, C, then `F·H + H·C` `f64` weights (W0 then W1, row-major).
//! A JSON sidecar next to it records the seed and epoch.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GltError, Result};
use crate::gcn::GcnParams;
use crate::scalar::Scalar;

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"GLTCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub epoch: usize,
    pub features: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl CheckpointMeta {
    pub fn new<T: Scalar>(params: &GcnParams<T>, seed: u64, epoch: usize) -> Self {
        let (features, hidden, classes) = params.dims();
        Self {
            format: "glt-checkpoint".into(),
            version: CHECKPOINT_VERSION,
            seed,
            epoch,
            features,
            hidden,
            classes,
        }
    }
}

/// Sidecar path: `ticket.bin` → `ticket.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn encode_checkpoint<T: Scalar>(params: &GcnParams<T>) -> Vec<u8> {
    let (f, h, c) = params.dims();
    let mut out = Vec::with_capacity(8 + 4 + 24 + 8 * params.num_params());
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for dim in [f, h, c] {
        out.extend_from_slice(&(dim as u64).to_le_bytes());
    }
    for x in params.flatten() {
        out.extend_from_slice(&x.as_f64().to_le_bytes());
    }
    out
}

pub fn decode_checkpoint<T: Scalar>(mut bytes: &[u8]) -> Result<GcnParams<T>> {
    let mut magic = [0u8; 8];
    read_exact(&mut bytes, &mut magic)?;
    if magic != CHECKPOINT_MAGIC {
        return Err(GltError::Checkpoint("bad magic".into()));
    }
    let mut word = [0u8; 4];
    read_exact(&mut bytes, &mut word)?;
    let version = u32::from_le_bytes(word);
    if version != CHECKPOINT_VERSION {
        return Err(GltError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let mut buf = [0u8; 8];
        read_exact(&mut bytes, &mut buf)?;
        *d = usize::try_from(u64::from_le_bytes(buf))
            .map_err(|_| GltError::Checkpoint("dimension overflows usize".into()))?;
    }
    let [f, h, c] = dims;
    let d = f
        .checked_mul(h)
        .and_then(|a| h.checked_mul(c).and_then(|b| a.checked_add(b)))
        .ok_or_else(|| GltError::Checkpoint("dimensions overflow".into()))?;
    if bytes.len() != d * 8 {
        return Err(GltError::Checkpoint(format!(
            "expected {} weight bytes for F={f} H={h} C={c}, found {}",
            d * 8,
            bytes.len()
        )));
    }
    let theta: Vec<T> = bytes
        .chunks_exact(8)
        .map(|b| T::lit(f64::from_le_bytes(b.try_into().expect("chunk of 8"))))
        .collect();
    GcnParams::from_flat(f, h, c, &theta)
}

fn read_exact(src: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    src.read_exact(buf)
        .map_err(|_| GltError::Checkpoint("truncated header".into()))
}

/// Writes `path` and its JSON sidecar.
pub fn save_checkpoint<T: Scalar>(
    path: impl AsRef<Path>,
    params: &GcnParams<T>,
    meta: &CheckpointMeta,
) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| GltError::io(path, e))?;
    file.write_all(&encode_checkpoint(params))
        .map_err(|e| GltError::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(meta).expect("metadata serializes");
    fs::write(&side, json + "\n").map_err(|e| GltError::io(&side, e))
}

/// Reads `path` and its sidecar, checking that the recorded dimensions agree.
pub fn load_checkpoint<T: Scalar>(
    path: impl AsRef<Path>,
) -> Result<(GcnParams<T>, CheckpointMeta)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| GltError::io(path, e))?;
    let params = decode_checkpoint(&bytes)?;
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| GltError::io(&side, e))?;
    let meta: CheckpointMeta = serde_json::from_str(&text)
        .map_err(|e| GltError::Checkpoint(format!("{}: {e}", side.display())))?;
    if (meta.features, meta.hidden, meta.classes) != params.dims() {
        return Err(GltError::Checkpoint(format!(
            "sidecar dims {:?} disagree with weights {:?}",
            (meta.features, meta.hidden, meta.classes),
            params.dims()
        )));
    }
    Ok((params, meta))
}
