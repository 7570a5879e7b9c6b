//! Frame filtering: single-hand track splitting, then per-frame hand-pose
//! uncertainty against a simulated estimator.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scene::surface_from_joints;
use crate::seed;
use crate::supervision::{curate_tracks, default_offsets, frame_uncertainty, ContactLabel, NoisyPoseProvider};

use super::config::PipelineConfig;
use super::manifest::{Manifest, SequenceEntry};
use super::synth::write_text;

pub const CURATED_FILE: &str = "curated.txt";
pub const CURATION_REPORT_FILE: &str = "curation.json";

/// Why a frame was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalRule {
    /// Outside every single-hand run of at least two frames.
    TrackSplit,
    /// Hand-pose prediction unstable under image translations.
    ReprojectionUncertainty,
    /// Its run kept fewer than two frames after filtering.
    ShortTrack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub sequence: String,
    pub frame: usize,
    pub rule: RemovalRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredFrame {
    pub sequence: String,
    pub frame: usize,
    pub reproj_std: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationReport {
    pub input_frames: usize,
    pub output_frames: usize,
    pub threshold_px: f64,
    pub removed: Vec<Removal>,
    pub scored: Vec<ScoredFrame>,
}

/// Filters `input` into `<out>/curated.txt` (paths still resolve against the
/// input's directory) and writes `<out>/curation.json`.
pub fn cmd_curate(input: &Path, cfg: &PipelineConfig) -> Result<CurationReport> {
    let m = Manifest::load(input)?;
    let (curated, report) = curate_manifest(&m, cfg)?;
    super::synth::create_dir(&cfg.out)?;
    let mut rebased = curated;
    rebased.root = m.root.clone();
    let text = rebase(&rebased, &cfg.out)?;
    write_text(&cfg.out.join(CURATED_FILE), &text)?;
    write_text(
        &cfg.out.join(CURATION_REPORT_FILE),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(report)
}

/// Manifest text whose relative paths resolve from `dir` instead of the
/// manifest's own root.
fn rebase(m: &Manifest, dir: &Path) -> Result<String> {
    let mut out = m.clone();
    let prefix = relative_prefix(dir, &m.root);
    for s in &mut out.sequences {
        if let Some(p) = &mut s.shape {
            *p = prefix.join(&*p);
        }
        for f in &mut s.frames {
            f.mask = prefix.join(&f.mask);
            if let Some(p) = &mut f.features {
                *p = prefix.join(&*p);
            }
        }
    }
    out.to_text()
}

/// Path from `from` to `to`, absolute when no relative route is obvious.
fn relative_prefix(from: &Path, to: &Path) -> std::path::PathBuf {
    let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    let (from, to) = (abs(from), abs(to));
    let common = from.components().zip(to.components()).take_while(|(a, b)| a == b).count();
    if common == 0 {
        return to;
    }
    let mut out = std::path::PathBuf::new();
    for _ in from.components().skip(common) {
        out.push("..");
    }
    for c in to.components().skip(common) {
        out.push(c);
    }
    out
}

/// The filtering itself, without I/O.
pub fn curate_manifest(m: &Manifest, cfg: &PipelineConfig) -> Result<(Manifest, CurationReport)> {
    let stage = seed::stage(cfg.seed, "curate");
    let mut out = Manifest::new(&m.root);
    let mut report = CurationReport {
        input_frames: m.num_frames(),
        output_frames: 0,
        threshold_px: cfg.curate.reproj_threshold,
        removed: Vec::new(),
        scored: Vec::new(),
    };
    let mut remove = |seq: &str, frame: usize, rule| {
        report.removed.push(Removal { sequence: seq.to_string(), frame, rule });
    };
    let mut scored = Vec::new();
    for seq in &m.sequences {
        let labels: Vec<ContactLabel> = seq.frames.iter().map(|f| f.contact).collect();
        let segments = curate_tracks(&labels);
        let mut kept_by_split = vec![false; seq.frames.len()];
        for s in &segments {
            kept_by_split[s.start..s.end].iter_mut().for_each(|k| *k = true);
        }
        for (f, keep) in seq.frames.iter().zip(&kept_by_split) {
            if !keep {
                remove(&seq.id, f.id, RemovalRule::TrackSplit);
            }
        }
        for (k, s) in segments.iter().enumerate() {
            let mut frames = Vec::with_capacity(s.len());
            for f in &seq.frames[s.start..s.end] {
                if cfg.curate.filter {
                    let provider = NoisyPoseProvider {
                        wrist: f.wrist,
                        camera: f.camera,
                        rotation_noise: f.predictor_noise,
                        translation_noise: cfg.curate.translation_noise,
                        seed: seed::derive(stage, seed::label(&format!("{}/{}", seq.id, f.id))),
                    };
                    let q = frame_uncertainty(
                        &provider,
                        &(),
                        f.id,
                        &surface_from_joints(&f.joints),
                        &default_offsets(f.camera.width),
                        cfg.curate.reproj_threshold,
                    )?;
                    scored.push(ScoredFrame {
                        sequence: seq.id.clone(),
                        frame: f.id,
                        reproj_std: q.reproj_std,
                        accepted: q.accepted,
                    });
                    if !q.accepted {
                        remove(&seq.id, f.id, RemovalRule::ReprojectionUncertainty);
                        continue;
                    }
                }
                frames.push(f.clone());
            }
            if frames.len() < 2 {
                for f in &frames {
                    remove(&seq.id, f.id, RemovalRule::ShortTrack);
                }
                continue;
            }
            let id = if segments.len() == 1 { seq.id.clone() } else { format!("{}-{k}", seq.id) };
            out.sequences.push(SequenceEntry { id, shape: seq.shape.clone(), frames });
        }
    }
    report.scored = scored;
    report.output_frames = out.num_frames();
    debug_assert_eq!(report.input_frames, report.output_frames + report.removed.len());
    Ok((out, report))
}
