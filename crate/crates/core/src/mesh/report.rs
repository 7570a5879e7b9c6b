use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::Vec3;

use super::mesh::MeshData;
use super::metrics::{chamfer, fscores};
use super::sample::sample_surface;

pub const METRICS_CSV_HEADER: &str = "sequence_id,cd_mm,f_5,f_10,empty";

/// Scores of one reconstruction; all `None` when the mesh was empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub sequence_id: String,
    pub cd_mm: Option<f64>,
    pub f_5: Option<f64>,
    pub f_10: Option<f64>,
}

impl EvalRecord {
    pub fn empty(sequence_id: impl Into<String>) -> Self {
        Self { sequence_id: sequence_id.into(), cd_mm: None, f_5: None, f_10: None }
    }

    pub fn is_empty(&self) -> bool {
        self.cd_mm.is_none()
    }
}

/// Samples `count` points on `mesh` and scores them against `truth`.
pub fn evaluate_mesh(
    sequence_id: impl Into<String>,
    mesh: &MeshData,
    truth: &[Vec3],
    count: usize,
    seed_value: u64,
) -> Result<EvalRecord> {
    let pts = sample_surface(mesh, count, seed_value)?;
    let f = fscores(&pts, truth, &[5.0, 10.0])?;
    Ok(EvalRecord {
        sequence_id: sequence_id.into(),
        cd_mm: Some(chamfer(&pts, truth)?),
        f_5: Some(f[0].f),
        f_10: Some(f[1].f),
    })
}

/// Means over non-empty reconstructions, with empties counted separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub evaluated: usize,
    pub empty: usize,
    pub mean_cd_mm: Option<f64>,
    pub mean_f_5: Option<f64>,
    pub mean_f_10: Option<f64>,
}

pub fn summarize(records: &[EvalRecord]) -> EvalSummary {
    let scored: Vec<&EvalRecord> = records.iter().filter(|r| !r.is_empty()).collect();
    let n = scored.len();
    let avg =
        |f: fn(&EvalRecord) -> Option<f64>| (n > 0).then(|| scored.iter().filter_map(|r| f(r)).sum::<f64>() / n as f64);
    EvalSummary {
        evaluated: n,
        empty: records.len() - n,
        mean_cd_mm: avg(|r| r.cd_mm),
        mean_f_5: avg(|r| r.f_5),
        mean_f_10: avg(|r| r.f_10),
    }
}

pub fn write_metrics_csv<W: Write>(records: &[EvalRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{METRICS_CSV_HEADER}")?;
    let f = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for r in records {
        writeln!(w, "{},{},{},{},{}", r.sequence_id, f(r.cd_mm), f(r.f_5), f(r.f_10), r.is_empty() as u8)?;
    }
    let s = summarize(records);
    writeln!(w, "# mean,{},{},{},{}", f(s.mean_cd_mm), f(s.mean_f_5), f(s.mean_f_10), s.empty)
}
