//! Per-frame meshing from a checkpoint (or the oracle shapes).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{evaluate_grid, marching_cubes, OccupancyGrid};
use crate::occnet::{load_checkpoint, OccupancyMlp};

use super::config::PipelineConfig;
use super::manifest::Manifest;
use super::synth::{create_dir, write_text};

pub const MESH_DIR: &str = "meshes";
pub const RECONSTRUCT_REPORT_FILE: &str = "reconstruct.json";

/// Which frames of each sequence to reconstruct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameSelector {
    #[default]
    All,
    First,
    Last,
    /// A frame id; sequences without it are skipped.
    Id(usize),
}

impl FromStr for FrameSelector {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Self::All),
            "first" => Ok(Self::First),
            "last" => Ok(Self::Last),
            n => n
                .parse()
                .map(Self::Id)
                .map_err(|_| Error::Config(format!("frame selector `{s}`: expected all, first, last or a frame id"))),
        }
    }
}

impl fmt::Display for FrameSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::All => f.write_str("all"),
            Self::First => f.write_str("first"),
            Self::Last => f.write_str("last"),
            Self::Id(n) => write!(f, "{n}"),
        }
    }
}

/// Where occupancy comes from.
#[derive(Debug, Clone, Copy)]
pub enum FieldSource<'a> {
    Checkpoint(&'a Path),
    /// Bypass the network and mesh each sequence's oracle shape.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedFrame {
    pub sequence: String,
    pub frame: usize,
    /// Relative to the output directory; `None` when the field had no surface.
    pub mesh: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructReport {
    /// Manifest the frames came from; evaluation reads its oracle shapes.
    pub manifest: PathBuf,
    pub frames: Vec<ReconstructedFrame>,
}

impl ReconstructReport {
    pub fn empty_count(&self) -> usize {
        self.frames.iter().filter(|f| f.mesh.is_none()).count()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}

pub fn mesh_name(sequence: &str, frame: usize) -> String {
    format!("{sequence}_f{frame:03}.obj")
}

/// Meshes the selected frames of `manifest` into `<out>/meshes/` and writes
/// `<out>/reconstruct.json`. Empty fields are recorded and produce no file.
pub fn cmd_reconstruct(
    source: FieldSource<'_>,
    manifest: &Path,
    selector: FrameSelector,
    cfg: &PipelineConfig,
) -> Result<ReconstructReport> {
    let m = Manifest::load(manifest)?;
    let net: Option<OccupancyMlp> = match source {
        FieldSource::Checkpoint(p) => Some(load_checkpoint(p)?.net),
        FieldSource::Oracle => None,
    };
    let (channels, global) = match &net {
        Some(n) => (n.config.feature_channels, n.config.global_dim),
        None => (cfg.train.network.feature_channels, cfg.train.network.global_dim),
    };
    let res = cfg.reconstruct.resolution;
    create_dir(&cfg.out.join(MESH_DIR))?;
    let mut report = ReconstructReport {
        manifest: std::path::absolute(manifest).map_err(|e| Error::io(manifest, e))?,
        frames: Vec::new(),
    };
    for seq in &m.sequences {
        let frames: Vec<_> = match selector {
            FrameSelector::All => seq.frames.iter().collect(),
            FrameSelector::First => seq.frames.first().into_iter().collect(),
            FrameSelector::Last => seq.frames.last().into_iter().collect(),
            FrameSelector::Id(n) => seq.frames.iter().filter(|f| f.id == n).collect(),
        };
        if frames.is_empty() {
            continue;
        }
        let oracle = if net.is_none() { Some(m.load_shape(seq)?) } else { None };
        for f in frames {
            let grid = match (&net, &oracle) {
                (Some(n), _) => evaluate_grid(n, &m.load_view(f, channels, global)?, res)?,
                (None, Some(shape)) => OccupancyGrid::from_sdf(shape, res),
                (None, None) => unreachable!(),
            };
            let mesh = match marching_cubes(&grid, cfg.reconstruct.iso) {
                Ok(mesh) => Some(mesh),
                Err(Error::EmptyField) => None,
                Err(e) => return Err(e),
            };
            let rel = match mesh {
                Some(mesh) => {
                    let rel = PathBuf::from(MESH_DIR).join(mesh_name(&seq.id, f.id));
                    let mut buf = Vec::new();
                    mesh.write_obj(&mut buf).map_err(|e| Error::io(&rel, e))?;
                    let p = cfg.out.join(&rel);
                    std::fs::write(&p, buf).map_err(|e| Error::io(&p, e))?;
                    Some(rel)
                }
                None => None,
            };
            report.frames.push(ReconstructedFrame { sequence: seq.id.clone(), frame: f.id, mesh: rel });
        }
    }
    write_text(
        &cfg.out.join(RECONSTRUCT_REPORT_FILE),
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(report)
}
