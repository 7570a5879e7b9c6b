//! Mixed-dataset training loop with explicit gradients.
//!
//! Steps alternate between synthetic-3D batches (cross-entropy against oracle
//! occupancy) and multiview batches (weighted visual-hull, cross-view
//! consistency and slice shape-prior losses). Every random draw comes from a
//! per-step stream, so a run resumed from a checkpoint continues exactly.

use std::io::Write;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::seed;
use crate::supervision::{consistency_pairs, random_slice_plane_with, SlicePlane};
use crate::view::ViewObservation;

use super::data::TrainingSequence;
use super::discriminator::SliceDiscriminator;
use super::loss::{bce_with_logits, consistency_with_logits, lsgan_discriminator, lsgan_generator, sigmoid};
use super::mlp::Mlp;
use super::network::{occupancy, NetworkConfig, OccupancyMlp};
use super::optim::{round_f32, OptimSettings, OptimState, OptimizerKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Weight of the synthetic-3D cross-entropy; 0 disables those steps.
    pub lambda_synthetic: f64,
    pub lambda_visual_hull: f64,
    pub lambda_consistency: f64,
    pub lambda_shape_prior: f64,
    /// Synthetic-3D to multiview step ratio.
    pub ratio_synthetic: usize,
    pub ratio_multiview: usize,
    /// Views drawn per step.
    pub batch_size: usize,
    /// Labeled points drawn per view.
    pub points_per_view: usize,
    /// Cross-view pairs per step, spread over the batch's sequences.
    pub consistency_points: usize,
    pub slices_per_step: usize,
    pub slice_grid: usize,
    pub slice_extent: f64,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub momentum: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub steps: usize,
    pub seed: u64,
    pub network: NetworkConfig,
    pub discriminator_hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda_synthetic: 1.0,
            lambda_visual_hull: 1.0,
            lambda_consistency: 1.0,
            lambda_shape_prior: 0.25,
            ratio_synthetic: 1,
            ratio_multiview: 2,
            batch_size: 64,
            points_per_view: 2048,
            consistency_points: 1024,
            slices_per_step: 4,
            slice_grid: 32,
            slice_extent: 1.0,
            learning_rate: 1e-5,
            optimizer: OptimizerKind::Sgd,
            momentum: 0.0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            steps: 1000,
            seed: 0,
            network: NetworkConfig::default(),
            discriminator_hidden: vec![512, 256],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let lambdas =
            [self.lambda_synthetic, self.lambda_visual_hull, self.lambda_consistency, self.lambda_shape_prior];
        if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::Config(format!("loss weights must be finite and >= 0: {lambdas:?}")));
        }
        if self.ratio_synthetic == 0 || self.ratio_multiview == 0 {
            return Err(Error::Config("dataset ratio components must be positive".into()));
        }
        if self.batch_size == 0 || self.points_per_view == 0 {
            return Err(Error::Config("batch_size and points_per_view must be positive".into()));
        }
        if self.lambda_shape_prior > 0.0 && (self.slices_per_step == 0 || self.slice_grid < 2) {
            return Err(Error::Config("shape prior needs slices_per_step > 0 and slice_grid >= 2".into()));
        }
        if self.lambda_consistency > 0.0 && self.consistency_points == 0 {
            return Err(Error::Config("consistency loss needs consistency_points > 0".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum {} must be in [0, 1)", self.momentum)));
        }
        self.network.validate()
    }

    pub fn optim_settings(&self) -> OptimSettings {
        OptimSettings {
            kind: self.optimizer,
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }

    fn multiview_active(&self) -> bool {
        self.lambda_visual_hull > 0.0 || self.lambda_consistency > 0.0 || self.lambda_shape_prior > 0.0
    }
}

/// Losses computed at one step; `None` marks a term the step did not touch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub l_obman: Option<f64>,
    pub l_occ: Option<f64>,
    pub l_consis: Option<f64>,
    pub l_shape: Option<f64>,
    pub l_disc: Option<f64>,
}

impl LossRecord {
    /// Weighted multiview objective of this step.
    pub fn multiview_total(&self, config: &TrainConfig) -> f64 {
        config.lambda_visual_hull * self.l_occ.unwrap_or(0.0)
            + config.lambda_consistency * self.l_consis.unwrap_or(0.0)
            + config.lambda_shape_prior * self.l_shape.unwrap_or(0.0)
    }
}

pub const LOSS_CSV_HEADER: &str = "step,l_obman,l_occ,l_consis,l_shape,l_disc";

pub fn write_loss_csv<W: Write>(records: &[LossRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{LOSS_CSV_HEADER}")?;
    let f = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for r in records {
        writeln!(w, "{},{},{},{},{},{}", r.step, f(r.l_obman), f(r.l_occ), f(r.l_consis), f(r.l_shape), f(r.l_disc))?;
    }
    Ok(())
}

/// A wrist-frame point, the view conditioning it, and its target occupancy.
#[derive(Debug, Clone, Copy)]
pub struct LabeledQuery<'a> {
    pub point: Vec3,
    pub view: &'a ViewObservation,
    pub label: f64,
}

/// One point seen from two views; `target` supplies the soft label.
#[derive(Debug, Clone, Copy)]
pub struct PairQuery<'a> {
    pub point: Vec3,
    pub target: &'a ViewObservation,
    pub other: &'a ViewObservation,
}

#[derive(Debug, Clone, Copy)]
pub struct SliceQuery<'a> {
    pub plane: SlicePlane,
    pub view: &'a ViewObservation,
}

fn column(d: &[f64], weight: f64) -> Array2<f64> {
    Array2::from_shape_fn((d.len(), 1), |(i, _)| weight * d[i])
}

/// Mean cross-entropy of the network against `queries`. With `grads`, adds
/// `weight ×` its parameter gradient.
pub fn occupancy_objective(
    net: &OccupancyMlp,
    queries: &[LabeledQuery],
    grads: Option<&mut Mlp>,
    weight: f64,
) -> Result<f64> {
    let points: Vec<Vec3> = queries.iter().map(|q| q.point).collect();
    let views: Vec<&ViewObservation> = queries.iter().map(|q| q.view).collect();
    let labels: Vec<f64> = queries.iter().map(|q| q.label).collect();
    let input = net.encode(&points, &views)?;
    let (z, tape) = net.logits_tape(input.view());
    let (loss, dz) = bce_with_logits(&z, &labels);
    if let Some(g) = grads {
        net.mlp.backward(&tape, column(&dz, weight).view(), g);
    }
    Ok(loss)
}

/// Mean cross-entropy between the two views' predictions at each point;
/// gradients reach both branches.
pub fn consistency_objective(
    net: &OccupancyMlp,
    pairs: &[PairQuery],
    grads: Option<&mut Mlp>,
    weight: f64,
) -> Result<f64> {
    let n = pairs.len();
    let points: Vec<Vec3> = pairs.iter().chain(pairs).map(|p| p.point).collect();
    let views: Vec<&ViewObservation> = pairs.iter().map(|p| p.target).chain(pairs.iter().map(|p| p.other)).collect();
    let input = net.encode(&points, &views)?;
    let (z, tape) = net.logits_tape(input.view());
    let (loss, ga, gb) = consistency_with_logits(&z[..n], &z[n..]);
    if let Some(g) = grads {
        let d: Vec<f64> = ga.into_iter().chain(gb).collect();
        net.mlp.backward(&tape, column(&d, weight).view(), g);
    }
    Ok(loss)
}

/// Occupancy slices (one row per query) predicted by the network.
pub fn slice_values(net: &OccupancyMlp, slices: &[SliceQuery]) -> Result<Array2<f64>> {
    let (points, views) = slice_rows(slices);
    let input = net.encode(&points, &views)?;
    let z = net.logits(input.view());
    let cols = slices.first().map_or(0, |s| s.plane.grid_size.pow(2));
    Ok(Array2::from_shape_vec((slices.len(), cols), z.into_iter().map(occupancy).collect()).unwrap())
}

fn slice_rows<'a>(slices: &[SliceQuery<'a>]) -> (Vec<Vec3>, Vec<&'a ViewObservation>) {
    let mut points = Vec::new();
    let mut views = Vec::new();
    for s in slices {
        let p = s.plane.points();
        views.extend(std::iter::repeat_n(s.view, p.len()));
        points.extend(p);
    }
    (points, views)
}

/// Generator-side shape prior: mean squared discriminator score of the
/// network's slices. Returns the loss and the (detached) slices.
pub fn shape_objective(
    net: &OccupancyMlp,
    disc: &SliceDiscriminator,
    slices: &[SliceQuery],
    grads: Option<&mut Mlp>,
    weight: f64,
) -> Result<(f64, Array2<f64>)> {
    if slices.iter().any(|s| s.plane.grid_size != disc.grid_size) {
        return Err(Error::Precondition("slice grid size differs from the discriminator's".into()));
    }
    let (points, views) = slice_rows(slices);
    let input = net.encode(&points, &views)?;
    let (z, tape) = net.logits_tape(input.view());
    let cols = disc.grid_size * disc.grid_size;
    let fake = Array2::from_shape_vec((slices.len(), cols), z.iter().map(|&v| occupancy(v)).collect()).unwrap();
    let (scores, dtape) = disc.scores_tape(fake.view());
    let (loss, dg) = lsgan_generator(&scores);
    if let Some(g) = grads {
        let mut scratch = disc.mlp.zeros_like();
        let d_fake = disc.backward(&dtape, &dg, &mut scratch);
        let dz: Vec<f64> = d_fake
            .iter()
            .zip(&z)
            .map(|(d, &v)| {
                // the clamp in `occupancy` is flat
                let s = sigmoid(v);
                if occupancy(v) == s {
                    d * s * (1.0 - s)
                } else {
                    0.0
                }
            })
            .collect();
        net.mlp.backward(&tape, column(&dz, weight).view(), g);
    }
    Ok((loss, fake))
}

/// Least-squares discriminator loss: real slices towards 0, generated towards 1.
pub fn discriminator_objective(
    disc: &SliceDiscriminator,
    real: ArrayView2<f64>,
    fake: ArrayView2<f64>,
    grads: Option<&mut Mlp>,
) -> f64 {
    let (sr, tr) = disc.scores_tape(real);
    let (sf, tf) = disc.scores_tape(fake);
    let (loss, dr, df) = lsgan_discriminator(&sr, &sf);
    if let Some(g) = grads {
        disc.backward(&tr, &dr, g);
        disc.backward(&tf, &df, g);
    }
    loss
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Synthetic,
    Multiview,
}

/// Mutable training state: models, optimizer buffers and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct Trainer {
    pub config: TrainConfig,
    pub net: OccupancyMlp,
    pub disc: SliceDiscriminator,
    pub net_opt: OptimState,
    pub disc_opt: OptimState,
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: OccupancyMlp,
    pub disc: SliceDiscriminator,
    pub losses: Vec<LossRecord>,
}

impl Trainer {
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = seed::rng(seed::stage(config.seed, "init"), 0);
        let mut net = OccupancyMlp::new(config.network, &mut rng)?;
        let mut disc = SliceDiscriminator::new(config.slice_grid, &config.discriminator_hidden, &mut rng)?;
        net.mlp.params_mut().for_each(|p| *p = round_f32(*p));
        disc.mlp.params_mut().for_each(|p| *p = round_f32(*p));
        let net_opt = OptimState::new(&net.mlp);
        let disc_opt = OptimState::new(&disc.mlp);
        Ok(Self { config, net, disc, net_opt, disc_opt, step: 0 })
    }

    fn check_data(&self, synthetic: &[TrainingSequence], multiview: &[TrainingSequence]) -> Result<()> {
        let cfg = &self.config;
        let synth_on = cfg.lambda_synthetic > 0.0 && !synthetic.is_empty();
        let multi_on = cfg.multiview_active() && !multiview.is_empty();
        if !synth_on && !multi_on {
            return Err(Error::Precondition("no dataset has an active loss".into()));
        }
        if cfg.lambda_shape_prior > 0.0 && multi_on && synthetic.is_empty() {
            return Err(Error::Precondition("shape prior needs synthetic-3D sequences for real slices".into()));
        }
        for s in synthetic.iter().chain(multiview) {
            if s.views.is_empty() || s.samples.is_empty() {
                return Err(Error::Precondition(format!("sequence {} has no views or samples", s.id)));
            }
        }
        if cfg.lambda_consistency > 0.0 && multi_on {
            if let Some(s) = multiview.iter().find(|s| s.views.len() < 2) {
                return Err(Error::Precondition(format!("sequence {} has one view; consistency needs two", s.id)));
            }
        }
        Ok(())
    }

    fn source(&self, step: usize, synthetic: &[TrainingSequence], multiview: &[TrainingSequence]) -> Source {
        let cfg = &self.config;
        let synth_on = cfg.lambda_synthetic > 0.0 && !synthetic.is_empty();
        let multi_on = cfg.multiview_active() && !multiview.is_empty();
        match (synth_on, multi_on) {
            (true, false) => Source::Synthetic,
            (false, true) => Source::Multiview,
            _ => {
                let cycle = cfg.ratio_synthetic + cfg.ratio_multiview;
                if step % cycle < cfg.ratio_synthetic {
                    Source::Synthetic
                } else {
                    Source::Multiview
                }
            }
        }
    }

    /// Runs one optimization step.
    pub fn step(&mut self, synthetic: &[TrainingSequence], multiview: &[TrainingSequence]) -> Result<LossRecord> {
        self.check_data(synthetic, multiview)?;
        let step = self.step;
        let cfg = self.config.clone();
        let mut rng = seed::rng(seed::stage(cfg.seed, "train"), step as u64);
        let mut rec = LossRecord { step, ..LossRecord::default() };
        let mut grads = self.net.mlp.zeros_like();
        let diverged = |loss: &'static str| Error::Diverged { step, loss };

        match self.source(step, synthetic, multiview) {
            Source::Synthetic => {
                let q = draw_labeled(synthetic, cfg.batch_size, cfg.points_per_view, &mut rng);
                let l = occupancy_objective(&self.net, &q, Some(&mut grads), cfg.lambda_synthetic)?;
                if !l.is_finite() {
                    return Err(diverged("l_obman"));
                }
                rec.l_obman = Some(l);
            }
            Source::Multiview => {
                if cfg.lambda_visual_hull > 0.0 {
                    let q = draw_labeled(multiview, cfg.batch_size, cfg.points_per_view, &mut rng);
                    let l = occupancy_objective(&self.net, &q, Some(&mut grads), cfg.lambda_visual_hull)?;
                    if !l.is_finite() {
                        return Err(diverged("l_occ"));
                    }
                    rec.l_occ = Some(l);
                }
                if cfg.lambda_consistency > 0.0 {
                    let pairs = draw_pairs(multiview, cfg.batch_size, cfg.consistency_points, &mut rng)?;
                    let l = consistency_objective(&self.net, &pairs, Some(&mut grads), cfg.lambda_consistency)?;
                    if !l.is_finite() {
                        return Err(diverged("l_consis"));
                    }
                    rec.l_consis = Some(l);
                }
                if cfg.lambda_shape_prior > 0.0 {
                    let fakes = draw_slices(multiview, &cfg, &mut rng);
                    let reals = draw_slices(synthetic, &cfg, &mut rng);
                    let (l, fake) =
                        shape_objective(&self.net, &self.disc, &fakes, Some(&mut grads), cfg.lambda_shape_prior)?;
                    if !l.is_finite() {
                        return Err(diverged("l_shape"));
                    }
                    let real = slice_values(&self.net, &reals)?;
                    let mut dgrads = self.disc.mlp.zeros_like();
                    let ld = discriminator_objective(&self.disc, real.view(), fake.view(), Some(&mut dgrads));
                    if !ld.is_finite() {
                        return Err(diverged("l_disc"));
                    }
                    rec.l_shape = Some(l);
                    rec.l_disc = Some(ld);
                    self.disc_opt.step(&mut self.disc.mlp, &dgrads, &cfg.optim_settings());
                }
            }
        }
        if !grads.all_finite() {
            return Err(diverged("gradient"));
        }
        self.net_opt.step(&mut self.net.mlp, &grads, &cfg.optim_settings());
        if !self.net.mlp.all_finite() || !self.disc.mlp.all_finite() {
            return Err(diverged("parameters"));
        }
        self.step += 1;
        Ok(rec)
    }

    /// Steps until `config.steps` have been taken in total.
    pub fn run(&mut self, synthetic: &[TrainingSequence], multiview: &[TrainingSequence]) -> Result<Vec<LossRecord>> {
        self.run_until(self.config.steps, synthetic, multiview)
    }

    pub fn run_until(
        &mut self,
        until: usize,
        synthetic: &[TrainingSequence],
        multiview: &[TrainingSequence],
    ) -> Result<Vec<LossRecord>> {
        let mut out = Vec::with_capacity(until.saturating_sub(self.step));
        while self.step < until {
            out.push(self.step(synthetic, multiview)?);
        }
        Ok(out)
    }
}

/// Trains from scratch for `config.steps` steps.
pub fn train(
    config: &TrainConfig,
    synthetic: &[TrainingSequence],
    multiview: &[TrainingSequence],
) -> Result<TrainOutcome> {
    let mut t = Trainer::new(config.clone())?;
    let losses = t.run(synthetic, multiview)?;
    Ok(TrainOutcome { net: t.net, disc: t.disc, losses })
}

fn draw_labeled<'a, R: Rng>(
    data: &'a [TrainingSequence],
    views: usize,
    points: usize,
    rng: &mut R,
) -> Vec<LabeledQuery<'a>> {
    let mut out = Vec::with_capacity(views * points);
    for _ in 0..views {
        let seq = &data[rng.random_range(0..data.len())];
        let view = &seq.views[rng.random_range(0..seq.views.len())];
        for _ in 0..points {
            let i = rng.random_range(0..seq.samples.len());
            out.push(LabeledQuery { point: seq.samples.points[i], view, label: seq.samples.labels[i] as f64 });
        }
    }
    out
}

fn draw_pairs<'a, R: Rng>(
    data: &'a [TrainingSequence],
    groups: usize,
    total: usize,
    rng: &mut R,
) -> Result<Vec<PairQuery<'a>>> {
    let per = total.div_ceil(groups);
    let mut out = Vec::with_capacity(per * groups);
    for _ in 0..groups {
        let seq = &data[rng.random_range(0..data.len())];
        for p in consistency_pairs(seq.views.len(), per, rng.random())? {
            let i = rng.random_range(0..seq.samples.len());
            out.push(PairQuery {
                point: seq.samples.points[i],
                target: &seq.views[p.view_i],
                other: &seq.views[p.view_j],
            });
        }
    }
    out.truncate(total);
    Ok(out)
}

fn draw_slices<'a, R: Rng>(data: &'a [TrainingSequence], cfg: &TrainConfig, rng: &mut R) -> Vec<SliceQuery<'a>> {
    (0..cfg.slices_per_step)
        .map(|_| {
            let seq = &data[rng.random_range(0..data.len())];
            let view = &seq.views[rng.random_range(0..seq.views.len())];
            SliceQuery { plane: random_slice_plane_with(rng, cfg.slice_grid, cfg.slice_extent), view }
        })
        .collect()
}
