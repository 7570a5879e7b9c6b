//! Line-oriented dataset manifest.
//!
//! ```text
//! #hocc-manifest 1
//! sequence id=s000 shape=shapes/s000.json
//! frame seq=s000 id=0 mask=masks/s000_000.pgm camera=fx,fy,cx,cy,w,h wrist=<12> joints=<180> contact=right
//! ```
//!
//! Poses are 9 row-major rotation entries followed by the translation; the
//! 15 joint poses are concatenated. Optional frame keys: `features=<path>`
//! (pixel-aligned grid) and `predictor_noise=<radians>` (instability of the
//! simulated hand-pose estimator on that frame). Paths are relative to the
//! manifest's directory.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::{CameraIntrinsics, HandFrame, RigidTransform, NUM_JOINTS};
use crate::occnet::attach_silhouette_features;
use crate::scene::{surface_from_joints, AnalyticShape};
use crate::supervision::ContactLabel;
use crate::view::ViewObservation;

use super::grid_io::read_grid;
use super::pgm::read_pgm;

pub const MANIFEST_HEADER: &str = "#hocc-manifest 1";

/// Rotation tolerance for poses read from disk.
const POSE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameEntry {
    pub id: usize,
    pub mask: PathBuf,
    pub camera: CameraIntrinsics,
    pub wrist: RigidTransform,
    pub joints: Vec<RigidTransform>,
    pub contact: ContactLabel,
    pub features: Option<PathBuf>,
    pub predictor_noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceEntry {
    pub id: String,
    /// Oracle shape descriptor (JSON), when ground truth exists.
    pub shape: Option<PathBuf>,
    pub frames: Vec<FrameEntry>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    /// Directory that relative paths resolve against.
    pub root: PathBuf,
    pub sequences: Vec<SequenceEntry>,
}

fn join_values(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

fn path_text(p: &Path) -> Result<String> {
    let s = p.to_str().ok_or_else(|| Error::Precondition(format!("non-UTF-8 path {}", p.display())))?;
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(Error::Precondition(format!("manifest paths must be nonempty without whitespace: `{s}`")));
    }
    Ok(s.to_string())
}

impl Manifest {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into(), sequences: Vec::new() }
    }

    pub fn resolve(&self, rel: &Path) -> PathBuf {
        self.root.join(rel)
    }

    pub fn num_frames(&self) -> usize {
        self.sequences.iter().map(|s| s.frames.len()).sum()
    }

    pub fn sequence(&self, id: &str) -> Option<&SequenceEntry> {
        self.sequences.iter().find(|s| s.id == id)
    }

    pub fn to_text(&self) -> Result<String> {
        let mut out = String::from(MANIFEST_HEADER);
        out.push('\n');
        for s in &self.sequences {
            path_text(Path::new(&s.id))?;
            write!(out, "sequence id={}", s.id).unwrap();
            if let Some(p) = &s.shape {
                write!(out, " shape={}", path_text(p)?).unwrap();
            }
            out.push('\n');
            for f in &s.frames {
                let k = &f.camera;
                let joints: Vec<f64> = f.joints.iter().flat_map(|j| j.to_values()).collect();
                write!(
                    out,
                    "frame seq={} id={} mask={} camera={},{},{},{},{},{} wrist={} joints={} contact={}",
                    s.id,
                    f.id,
                    path_text(&f.mask)?,
                    k.fx,
                    k.fy,
                    k.cx,
                    k.cy,
                    k.width,
                    k.height,
                    join_values(&f.wrist.to_values()),
                    join_values(&joints),
                    f.contact
                )
                .unwrap();
                if let Some(p) = &f.features {
                    write!(out, " features={}", path_text(p)?).unwrap();
                }
                if f.predictor_noise != 0.0 {
                    write!(out, " predictor_noise={}", f.predictor_noise).unwrap();
                }
                out.push('\n');
            }
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()?).map_err(|e| Error::io(path, e))
    }

    /// Parses manifest text; `root` is where relative paths resolve. Checks
    /// syntax and pose invariants but not file existence.
    pub fn parse(text: &str, path: &Path, root: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim_end() == MANIFEST_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 1,
                    message: format!("missing `{MANIFEST_HEADER}` header"),
                })
            }
        }
        let mut m = Manifest::new(root);
        let mut index: HashMap<String, usize> = HashMap::new();
        for (n, line) in lines {
            let bad = |message: String| Error::Parse { path: path.to_path_buf(), line: n + 1, message };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let kind = tokens.next().unwrap();
            let mut fields: HashMap<&str, &str> = HashMap::new();
            for t in tokens {
                let (k, v) = t.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{t}`")))?;
                if fields.insert(k, v).is_some() {
                    return Err(bad(format!("duplicate key `{k}`")));
                }
            }
            let mut take = |k: &str| fields.remove(k);
            match kind {
                "sequence" => {
                    let id = take("id").ok_or_else(|| bad("sequence without id".into()))?.to_string();
                    let shape = take("shape").map(PathBuf::from);
                    if let Some(k) = fields.keys().next() {
                        return Err(bad(format!("unknown sequence key `{k}`")));
                    }
                    if index.insert(id.clone(), m.sequences.len()).is_some() {
                        return Err(bad(format!("duplicate sequence `{id}`")));
                    }
                    m.sequences.push(SequenceEntry { id, shape, frames: Vec::new() });
                }
                "frame" => {
                    let f = parse_frame(&mut take).map_err(&bad)?;
                    let seq = take("seq").ok_or_else(|| bad("frame without seq".into()))?;
                    if let Some(k) = fields.keys().next() {
                        return Err(bad(format!("unknown frame key `{k}`")));
                    }
                    let &i = index.get(seq).ok_or_else(|| bad(format!("frame of undeclared sequence `{seq}`")))?;
                    if m.sequences[i].frames.iter().any(|g| g.id == f.id) {
                        return Err(bad(format!("duplicate frame {} in `{seq}`", f.id)));
                    }
                    m.sequences[i].frames.push(f);
                }
                other => return Err(bad(format!("unknown record `{other}`"))),
            }
        }
        Ok(m)
    }

    /// Reads and validates a manifest: syntax, pose invariants and that every
    /// referenced file exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let m = Self::parse(&text, path, &root)?;
        for s in &m.sequences {
            let files = s
                .shape
                .iter()
                .chain(s.frames.iter().map(|f| &f.mask))
                .chain(s.frames.iter().filter_map(|f| f.features.as_ref()));
            for rel in files {
                let p = m.resolve(rel);
                if !p.is_file() {
                    return Err(Error::io(
                        p,
                        std::io::Error::new(std::io::ErrorKind::NotFound, "referenced file missing"),
                    ));
                }
            }
        }
        Ok(m)
    }

    pub fn load_shape(&self, seq: &SequenceEntry) -> Result<AnalyticShape> {
        let rel = seq
            .shape
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("sequence `{}` has no oracle shape", seq.id)))?;
        let p = self.resolve(rel);
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let shape: AnalyticShape = serde_json::from_str(&text).map_err(|e| Error::format(&p, e.to_string()))?;
        shape.validate().map_err(|e| Error::format(&p, e.to_string()))?;
        Ok(shape)
    }

    /// Loads one frame as a view. Feature files are used when present,
    /// otherwise silhouette features are computed; `channels`/`global_dim`
    /// are what the network expects.
    pub fn load_view(&self, frame: &FrameEntry, channels: usize, global_dim: usize) -> Result<ViewObservation> {
        let mask_path = self.resolve(&frame.mask);
        let mask = read_pgm(&mask_path)?;
        let hand = HandFrame::new(frame.wrist, frame.joints.clone(), surface_from_joints(&frame.joints))?;
        let mut view = ViewObservation::new(frame.id, mask, frame.camera, hand)
            .map_err(|e| Error::format(&mask_path, e.to_string()))?;
        attach_silhouette_features(&mut view, channels, global_dim)?;
        if let Some(rel) = &frame.features {
            let p = self.resolve(rel);
            let grid = read_grid(&p)?;
            if grid.channels != channels {
                return Err(Error::format(&p, format!("{} channels, network expects {channels}", grid.channels)));
            }
            view.feature_grid = Some(grid);
        }
        Ok(view)
    }

    pub fn load_views(&self, seq: &SequenceEntry, channels: usize, global_dim: usize) -> Result<Vec<ViewObservation>> {
        seq.frames.iter().map(|f| self.load_view(f, channels, global_dim)).collect()
    }
}

fn numbers(v: &str, what: &str) -> std::result::Result<Vec<f64>, String> {
    v.split(',')
        .map(|s| s.parse::<f64>().map_err(|_| format!("bad number `{s}` in {what}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .and_then(
            |xs| {
                if xs.iter().all(|x| x.is_finite()) {
                    Ok(xs)
                } else {
                    Err(format!("non-finite value in {what}"))
                }
            },
        )
}

fn pose(vals: &[f64], what: &str) -> std::result::Result<RigidTransform, String> {
    let t = RigidTransform::from_values(vals.try_into().unwrap());
    if !t.is_valid(POSE_TOL) {
        return Err(format!("{what} is not a rigid transform"));
    }
    Ok(t)
}

fn parse_frame<'a>(take: &mut impl FnMut(&str) -> Option<&'a str>) -> std::result::Result<FrameEntry, String> {
    let mut req = |k: &str| take(k).ok_or_else(|| format!("frame without `{k}`"));
    let id = req("id")?;
    let id = id.parse::<usize>().map_err(|_| format!("bad frame id `{id}`"))?;
    let mask = PathBuf::from(req("mask")?);
    let cam = numbers(req("camera")?, "camera")?;
    if cam.len() != 6 {
        return Err(format!("camera needs 6 values, got {}", cam.len()));
    }
    let dim = |x: f64| if x >= 1.0 && x.fract() == 0.0 { Ok(x as usize) } else { Err(format!("bad image size {x}")) };
    let camera =
        CameraIntrinsics::new(cam[0], cam[1], cam[2], cam[3], dim(cam[4])?, dim(cam[5])?).map_err(|e| e.to_string())?;
    let w = numbers(req("wrist")?, "wrist")?;
    if w.len() != 12 {
        return Err(format!("wrist needs 12 values, got {}", w.len()));
    }
    let wrist = pose(&w, "wrist pose")?;
    let j = numbers(req("joints")?, "joints")?;
    if j.len() != 12 * NUM_JOINTS {
        return Err(format!("joints need {} values, got {}", 12 * NUM_JOINTS, j.len()));
    }
    let joints = j
        .chunks_exact(12)
        .enumerate()
        .map(|(i, c)| pose(c, &format!("joint {i}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let contact = req("contact")?.parse::<ContactLabel>()?;
    let features = take("features").map(PathBuf::from);
    let predictor_noise = match take("predictor_noise") {
        None => 0.0,
        Some(v) => match v.parse::<f64>() {
            Ok(x) if x >= 0.0 && x.is_finite() => x,
            _ => return Err(format!("bad predictor_noise `{v}`")),
        },
    };
    Ok(FrameEntry { id, mask, camera, wrist, joints, contact, features, predictor_noise })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Mat3, Vec3};
    use crate::scene::HandTemplate;

    fn sample() -> Manifest {
        let k = CameraIntrinsics::new(110.0, 110.0, 64.0, 64.0, 128, 128).unwrap();
        let wrist = RigidTransform::new(
            Mat3::rotation_axis_angle(Vec3::new(0.3, 1.0, -0.2), 0.77),
            Vec3::new(0.01, -0.02, 3.0),
        );
        let frame = |id| FrameEntry {
            id,
            mask: PathBuf::from(format!("masks/a_{id}.pgm")),
            camera: k,
            wrist,
            joints: HandTemplate::default().joints(),
            contact: ContactLabel::Right,
            features: None,
            predictor_noise: if id == 1 { 0.3 } else { 0.0 },
        };
        Manifest {
            root: PathBuf::from("data"),
            sequences: vec![SequenceEntry {
                id: "a".into(),
                shape: Some(PathBuf::from("shapes/a.json")),
                frames: vec![frame(0), frame(1)],
            }],
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = sample();
        let text = m.to_text().unwrap();
        assert!(text.starts_with("#hocc-manifest 1\nsequence id=a shape=shapes/a.json\nframe seq=a id=0 "));
        let back = Manifest::parse(&text, Path::new("m.txt"), Path::new("data")).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text().unwrap(), text);
    }

    #[test]
    fn empty_manifest_is_valid() {
        let m = Manifest::parse("#hocc-manifest 1\n", Path::new("m.txt"), Path::new(".")).unwrap();
        assert!(m.sequences.is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = sample().to_text().unwrap();
        let cases = [
            (text.replace("#hocc-manifest 1", "#manifest"), 1),
            (text.replace("contact=right", "contact=elbow"), 3),
            (text.replace(" id=1 ", " id=0 "), 4),
            (text.replace("sequence id=a", "sequence id=a color=red"), 2),
            (text.replacen("wrist=", "wrist=2,", 1), 3),
            (text.replace("seq=a", "seq=b"), 3),
        ];
        for (t, line) in cases {
            match Manifest::parse(&t, Path::new("m.txt"), Path::new(".")) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{t}"),
                other => panic!("expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn non_rotation_pose_is_rejected() {
        let text = sample().to_text().unwrap();
        // scale the first rotation entry of the wrist
        let start = text.find("wrist=").unwrap() + 6;
        let end = start + text[start..].find(',').unwrap();
        let broken = format!("{}5{}", &text[..start], &text[end..]);
        let err = Manifest::parse(&broken, Path::new("m.txt"), Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("rigid transform"), "{err}");
    }

    #[test]
    fn missing_files_fail_at_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        std::fs::write(&p, sample().to_text().unwrap()).unwrap();
        assert!(matches!(Manifest::load(&p), Err(Error::Io { .. })));
    }
}
