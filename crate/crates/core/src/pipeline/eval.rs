//! Scoring reconstructed meshes against their oracle shapes.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{evaluate_mesh, summarize, write_metrics_csv, EvalRecord, EvalSummary, MeshData};
use crate::seed;

use super::config::PipelineConfig;
use super::manifest::Manifest;
use super::reconstruct::ReconstructReport;
use super::synth::{create_dir, write_text};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub records: Vec<EvalRecord>,
    pub summary: EvalSummary,
}

/// Scores every frame listed in `<mesh_dir>/reconstruct.json` against the
/// oracle shape of its sequence in `shapes` (default: the manifest the
/// meshes were reconstructed from). Writes `<out>/metrics.csv` (rows
/// `sequence/frame`) and `<out>/summary.json`.
pub fn cmd_eval(mesh_dir: &Path, shapes: Option<&Path>, cfg: &PipelineConfig) -> Result<EvalReport> {
    let rec = ReconstructReport::load(&mesh_dir.join(super::reconstruct::RECONSTRUCT_REPORT_FILE))?;
    let m = Manifest::load(shapes.unwrap_or(&rec.manifest))?;
    let n = cfg.eval.surface_points;
    let stage = seed::stage(cfg.seed, "eval");
    let mut truths = HashMap::new();
    let mut records = Vec::with_capacity(rec.frames.len());
    for f in &rec.frames {
        let id = format!("{}/{}", f.sequence, f.frame);
        let Some(rel) = &f.mesh else {
            records.push(EvalRecord::empty(id));
            continue;
        };
        if !truths.contains_key(&f.sequence) {
            let seq = m
                .sequence(&f.sequence)
                .ok_or_else(|| Error::Precondition(format!("no oracle for sequence `{}`", f.sequence)))?;
            let shape = m.load_shape(seq)?;
            let pts = shape.sample_surface(n, &mut seed::rng(stage, seed::label(&f.sequence)));
            truths.insert(f.sequence.clone(), pts);
        }
        let p = mesh_dir.join(rel);
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let mesh = MeshData::read_obj(&text, &p)?;
        records.push(evaluate_mesh(id.clone(), &mesh, &truths[&f.sequence], n, seed::derive(stage, seed::label(&id)))?);
    }
    let summary = summarize(&records);
    create_dir(&cfg.out)?;
    let mut buf = Vec::new();
    write_metrics_csv(&records, &mut buf).expect("writing to memory");
    write_text(&cfg.out.join(METRICS_FILE), &String::from_utf8(buf).expect("csv is utf-8"))?;
    write_text(&cfg.out.join(SUMMARY_FILE), &serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    Ok(EvalReport { records, summary })
}
