//! Declarative pipeline configuration (TOML).
//!
//! Every section is optional and falls back to its defaults; unknown keys are
//! rejected. `key.path=value` overrides are applied to the parsed table
//! before validation, so they obey the same rules as the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::DEFAULT_RESOLUTION;
use crate::occnet::TrainConfig;
use crate::scene::CameraRig;
use crate::supervision::{SamplingConfig, DEFAULT_REPROJ_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    /// Multiview sequences.
    pub sequences: usize,
    /// Training frames per multiview sequence.
    pub views: usize,
    /// Extra frames per sequence written to the held-out manifest.
    pub held_out_views: usize,
    /// Oracle-labeled synthetic-3D sequences (written separately).
    pub synthetic_sequences: usize,
    pub synthetic_views: usize,
    pub occlusion_fraction: f64,
    /// Fraction of training frames whose stored wrist pose is corrupted.
    pub noisy_fraction: f64,
    /// Rotation noise std (radians) of corrupted poses; also the simulated
    /// estimator's instability on those frames.
    pub pose_noise: f64,
    /// Simulated estimator instability on clean frames (radians).
    pub clean_predictor_noise: f64,
    pub rig: CameraRig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sequences: 4,
            views: 8,
            held_out_views: 1,
            synthetic_sequences: 4,
            synthetic_views: 4,
            occlusion_fraction: 0.0,
            noisy_fraction: 0.0,
            pose_noise: 0.5,
            clean_predictor_noise: 0.005,
            rig: CameraRig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurateConfig {
    /// Apply the reprojection-uncertainty filter (track splitting always runs).
    pub filter: bool,
    /// Acceptance threshold on the mean reprojection spread, pixels.
    pub reproj_threshold: f64,
    /// Translation noise std (meters) of the simulated estimator.
    pub translation_noise: f64,
}

impl Default for CurateConfig {
    fn default() -> Self {
        Self { filter: true, reproj_threshold: DEFAULT_REPROJ_THRESHOLD, translation_noise: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconstructConfig {
    pub resolution: usize,
    pub iso: f64,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        Self { resolution: DEFAULT_RESOLUTION, iso: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Points sampled on each mesh and each oracle surface.
    pub surface_points: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { surface_points: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Global seed; every stage derives its own stream from it. It also
    /// replaces `train.seed`.
    pub seed: u64,
    pub out: PathBuf,
    /// Write an intermediate checkpoint every this many steps (0: final only).
    pub checkpoint_every: usize,
    pub synth: SynthConfig,
    pub sampling: SamplingConfig,
    pub curate: CurateConfig,
    pub train: TrainConfig,
    pub reconstruct: ReconstructConfig,
    pub eval: EvalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            checkpoint_every: 0,
            synth: SynthConfig::default(),
            sampling: SamplingConfig::default(),
            curate: CurateConfig::default(),
            train: TrainConfig::default(),
            reconstruct: ReconstructConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.synth;
        if !(0.0..1.0).contains(&s.occlusion_fraction) {
            return Err(Error::Config(format!("synth.occlusion_fraction {} not in [0, 1)", s.occlusion_fraction)));
        }
        if !(0.0..=1.0).contains(&s.noisy_fraction) {
            return Err(Error::Config(format!("synth.noisy_fraction {} not in [0, 1]", s.noisy_fraction)));
        }
        if !(s.pose_noise >= 0.0 && s.clean_predictor_noise >= 0.0) {
            return Err(Error::Config("synth noise levels must be >= 0".into()));
        }
        if s.sequences > 0 && s.views < 2 {
            return Err(Error::Config("synth.views must be at least 2".into()));
        }
        if s.synthetic_sequences > 0 && s.synthetic_views < 1 {
            return Err(Error::Config("synth.synthetic_views must be positive".into()));
        }
        if !(self.curate.reproj_threshold > 0.0) {
            return Err(Error::Config("curate.reproj_threshold must be positive".into()));
        }
        if self.reconstruct.resolution < 2 || !(0.0..1.0).contains(&self.reconstruct.iso) || self.reconstruct.iso == 0.0
        {
            return Err(Error::Config("reconstruct needs resolution >= 2 and iso in (0, 1)".into()));
        }
        if self.eval.surface_points == 0 {
            return Err(Error::Config("eval.surface_points must be positive".into()));
        }
        self.train.validate()
    }

    /// Parses TOML text, applies `overrides` (`dotted.key=value`) and validates.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: PipelineConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the file at `path` (or starts from defaults) and applies overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Sets `a.b.c=value` in `table`, creating intermediate tables. The value is
/// read as a TOML literal, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) =
        spec.split_once('=').ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let mut cur = table;
    for part in &path[..path.len() - 1] {
        let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur =
            entry.as_table_mut().ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not a table")))?;
    }
    cur.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(PipelineConfig::from_toml("", &[]).unwrap(), PipelineConfig::default());
    }

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = PipelineConfig::default();
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml(), &[]).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in ["colour = 1", "[train]\nlearning_rat = 0.1", "[synth.rig]\nzoom = 2"] {
            assert!(matches!(PipelineConfig::from_toml(text, &[]), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let cfg = PipelineConfig::from_toml(
            "[train]\nsteps = 5\n",
            &[
                "train.steps=7".into(),
                "train.network.width=32".into(),
                "train.optimizer=adam".into(),
                "out=results/run1".into(),
                "seed=9".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.train.steps, 7);
        assert_eq!(cfg.train.network.width, 32);
        assert_eq!(cfg.out, PathBuf::from("results/run1"));
        assert_eq!(cfg.seed, 9);
        assert!(PipelineConfig::from_toml("", &["train.nope=1".into()]).is_err());
        assert!(PipelineConfig::from_toml("", &["seed".into()]).is_err());
        assert!(PipelineConfig::from_toml("", &["seed.x=1".into()]).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        for o in ["synth.occlusion_fraction=1.0", "train.learning_rate=0", "reconstruct.iso=1.5"] {
            assert!(PipelineConfig::from_toml("", &[o.into()]).is_err(), "{o}");
        }
    }
}
