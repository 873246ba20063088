//! Metrics CSV: one row per run, fixed and versioned column set.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const HEADER: &str = "schema_version,scorer,p_g,p_theta,seed,val_acc,test_acc,mean_pruned_edge_degree,inference_macs,status,timestamp";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub schema_version: u32,
    pub scorer: String,
    pub p_g: f64,
    pub p_theta: f64,
    pub seed: u64,
    pub val_acc: Option<f64>,
    pub test_acc: Option<f64>,
    pub mean_pruned_edge_degree: Option<f64>,
    pub inference_macs: Option<u64>,
    /// `ok`, or `error: <message>` for a failed run.
    pub status: String,
    /// Unix seconds.
    pub timestamp: u64,
}

impl MetricsRow {
    pub fn failed(scorer: &str, p_g: f64, p_theta: f64, seed: u64, message: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scorer: scorer.to_string(),
            p_g,
            p_theta,
            seed,
            val_acc: None,
            test_acc: None,
            mean_pruned_edge_degree: None,
            inference_macs: None,
            status: format!("error: {}", message.replace(['\n', '\r'], " ")),
            timestamp: now(),
        }
    }
}

pub fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn encode(rows: &[MetricsRow], header: bool) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(header)
        .from_writer(Vec::new());
    if header && rows.is_empty() {
        w.write_record(HEADER.split(','))
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
}

/// Writes a fresh CSV with header.
pub fn write_csv(path: &Path, rows: &[MetricsRow]) -> CliResult<()> {
    let bytes = encode(rows, true)?;
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

/// Appends rows, writing the header first if the file is new or empty.
/// Refuses to append to a file with a different header.
pub fn append_csv(path: &Path, rows: &[MetricsRow]) -> CliResult<()> {
    let existing = match fs::read_to_string(path) {
        Ok(text) => Some(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(io_error(path, e)),
    };
    let fresh = existing.as_deref().is_none_or(|t| t.trim().is_empty());
    if let Some(text) = existing.as_deref().filter(|_| !fresh) {
        let first = text.lines().next().unwrap_or("");
        if first != HEADER {
            return Err(CliError::Runtime(format!(
                "{}: existing header does not match metrics schema v{SCHEMA_VERSION}",
                path.display()
            )));
        }
    }
    let bytes = encode(rows, fresh)?;
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_error(path, e))?;
    f.write_all(&bytes).map_err(|e| io_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> MetricsRow {
        MetricsRow {
            schema_version: SCHEMA_VERSION,
            scorer: "teddy".into(),
            p_g: 0.05,
            p_theta: 0.05,
            seed: 1,
            val_acc: Some(0.75),
            test_acc: Some(0.5),
            mean_pruned_edge_degree: Some(3.25),
            inference_macs: Some(1234),
            status: "ok".into(),
            timestamp: 99,
        }
    }

    #[test]
    fn header_matches_serialized_fields() {
        let bytes = encode(&[row()], true).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "1,teddy,0.05,0.05,1,0.75,0.5,3.25,1234,ok,99"
        );
        let empty = String::from_utf8(encode(&[], true).unwrap()).unwrap();
        assert_eq!(empty.trim_end(), HEADER);
    }

    #[test]
    fn append_writes_header_once() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        append_csv(&path, &[row()]).unwrap();
        append_csv(&path, &[row()]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.matches("schema_version").count(), 1);
        fs::write(&path, "a,b\n").unwrap();
        assert!(append_csv(&path, &[row()]).is_err());
    }

    #[test]
    fn failed_rows_leave_metrics_blank() {
        let r = MetricsRow::failed("random", 0.1, 0.0, 3, "boom\nline");
        let text = String::from_utf8(encode(&[r], false).unwrap()).unwrap();
        assert!(
            text.starts_with("1,random,0.1,0.0,3,,,,,error: boom line,"),
            "{text}"
        );
    }
}
