//! Dataset generation: analytic objects in a synthetic hand, orbit renders,
//! optional occlusion and corrupted wrist poses.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Mat3, RigidTransform, Vec3};
use crate::scene::{generate_sequence, random_primitive, AnalyticShape, HandTemplate};
use crate::seed;
use crate::supervision::ContactLabel;
use crate::view::ViewObservation;

use super::config::PipelineConfig;
use super::manifest::{FrameEntry, Manifest, SequenceEntry};
use super::pgm::write_pgm;

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const HELDOUT_FILE: &str = "heldout.txt";
pub const SYNTHETIC_FILE: &str = "synthetic.txt";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthReport {
    pub sequences: usize,
    pub frames: usize,
    pub held_out_frames: usize,
    pub synthetic_sequences: usize,
    /// `sequence/frame` ids whose stored wrist pose was corrupted.
    pub noisy_frames: Vec<String>,
}

pub(crate) fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

pub(crate) fn write_text(p: &Path, text: &str) -> Result<()> {
    std::fs::write(p, text).map_err(|e| Error::io(p, e))
}

fn write_shape(shape: &AnalyticShape, root: &Path, id: &str) -> Result<PathBuf> {
    let rel = PathBuf::from("shapes").join(format!("{id}.json"));
    let text = serde_json::to_string_pretty(shape).expect("shape serializes");
    write_text(&root.join(&rel), &text)?;
    Ok(rel)
}

fn frame_entry(view: &ViewObservation, root: &Path, seq: &str, predictor_noise: f64) -> Result<FrameEntry> {
    let mask = PathBuf::from("masks").join(format!("{seq}_{:03}.pgm", view.frame_id));
    write_pgm(&view.mask, &root.join(&mask))?;
    Ok(FrameEntry {
        id: view.frame_id,
        mask,
        camera: view.camera,
        wrist: view.hand.wrist,
        joints: view.hand.joints.clone(),
        contact: ContactLabel::Right,
        features: None,
        predictor_noise,
    })
}

/// Renders `count` frames of a fresh random object. Returns the shape and
/// the views.
fn render<R: rand::Rng>(
    rng: &mut R,
    cfg: &PipelineConfig,
    count: usize,
    occlusion: f64,
    occlusion_seed: u64,
) -> Result<(AnalyticShape, Vec<ViewObservation>)> {
    let shape = random_primitive(rng);
    let hand = HandTemplate::random(rng);
    let traj = cfg.synth.rig.orbit(count, rng)?;
    let views = generate_sequence(&shape, &traj, &hand, occlusion, occlusion_seed)?;
    Ok((shape, views))
}

/// Writes `<out>/data/{manifest,heldout,synthetic}.txt` with masks and oracle
/// shapes. The last `held_out_views` frames of each multiview sequence go to
/// the held-out manifest; noisy frames are drawn only from training frames.
pub fn cmd_synth(cfg: &PipelineConfig) -> Result<SynthReport> {
    let s = &cfg.synth;
    let root = cfg.out.join("data");
    for d in ["masks", "shapes"] {
        create_dir(&root.join(d))?;
    }
    let stage = seed::stage(cfg.seed, "synth");

    let mut train = Manifest::new(&root);
    let mut held = Manifest::new(&root);
    let mut all_views = Vec::with_capacity(s.sequences);
    for i in 0..s.sequences {
        let id = format!("s{i:03}");
        let mut rng = seed::rng(stage, i as u64);
        let (shape, views) = render(
            &mut rng,
            cfg,
            s.views + s.held_out_views,
            s.occlusion_fraction,
            seed::derive(stage, 1 << 32 | i as u64),
        )?;
        let rel = write_shape(&shape, &root, &id)?;
        all_views.push((id, rel, views));
    }

    // corrupt an exact share of the training frames
    let slots: Vec<(usize, usize)> = (0..s.sequences).flat_map(|i| (0..s.views).map(move |f| (i, f))).collect();
    let n_noisy = (s.noisy_fraction * slots.len() as f64).round() as usize;
    let mut noise_rng = seed::rng(seed::stage(cfg.seed, "noise"), 0);
    let mut order = slots.clone();
    order.shuffle(&mut noise_rng);
    let mut noisy: Vec<(usize, usize)> = order[..n_noisy].to_vec();
    noisy.sort_unstable();
    let normal = Normal::new(0.0, s.pose_noise.max(f64::MIN_POSITIVE)).unwrap();

    let mut report = SynthReport {
        sequences: s.sequences,
        frames: 0,
        held_out_frames: 0,
        synthetic_sequences: s.synthetic_sequences,
        noisy_frames: Vec::new(),
    };
    for (i, (id, rel, views)) in all_views.iter_mut().enumerate() {
        let mut train_frames = Vec::new();
        let mut held_frames = Vec::new();
        for (f, view) in views.iter_mut().enumerate() {
            if f >= s.views {
                held_frames.push(frame_entry(view, &root, id, s.clean_predictor_noise)?);
                continue;
            }
            let mut predictor_noise = s.clean_predictor_noise;
            if noisy.binary_search(&(i, f)).is_ok() {
                let mut rng = seed::rng(seed::stage(cfg.seed, "noise"), 1 + (i * s.views + f) as u64);
                let rv = Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng));
                view.hand.wrist =
                    view.hand.wrist.compose(&RigidTransform::from_rotation(Mat3::from_rotation_vector(rv)));
                predictor_noise = s.pose_noise;
                report.noisy_frames.push(format!("{id}/{f}"));
            }
            train_frames.push(frame_entry(view, &root, id, predictor_noise)?);
        }
        report.frames += train_frames.len();
        report.held_out_frames += held_frames.len();
        train.sequences.push(SequenceEntry { id: id.clone(), shape: Some(rel.clone()), frames: train_frames });
        if !held_frames.is_empty() {
            held.sequences.push(SequenceEntry { id: id.clone(), shape: Some(rel.clone()), frames: held_frames });
        }
    }

    let mut synthetic = Manifest::new(&root);
    let ystage = seed::stage(cfg.seed, "synthetic");
    for i in 0..s.synthetic_sequences {
        let id = format!("y{i:03}");
        let mut rng = seed::rng(ystage, i as u64);
        let (shape, views) = render(&mut rng, cfg, s.synthetic_views, 0.0, 0)?;
        let rel = write_shape(&shape, &root, &id)?;
        let frames =
            views.iter().map(|v| frame_entry(v, &root, &id, s.clean_predictor_noise)).collect::<Result<Vec<_>>>()?;
        synthetic.sequences.push(SequenceEntry { id, shape: Some(rel), frames });
    }

    train.save(&root.join(MANIFEST_FILE))?;
    held.save(&root.join(HELDOUT_FILE))?;
    synthetic.save(&root.join(SYNTHETIC_FILE))?;
    Ok(report)
}
