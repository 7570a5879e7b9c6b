use std::path::Path;
use std::process::{Command, Output};

fn hocc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hocc")).current_dir(dir).args(args).output().expect("spawn hocc")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &[&str] = &[
    "--set",
    "synth.sequences=2",
    "--set",
    "synth.views=3",
    "--set",
    "synth.synthetic_sequences=1",
    "--set",
    "synth.synthetic_views=2",
    "--set",
    "sampling.total=2048",
    "--set",
    "sampling.hull_positive_target=512",
    "--set",
    "train.network.width=16",
    "--set",
    "train.network.hidden_layers=3",
    "--set",
    "train.network.skip_layer=2",
    "--set",
    "train.discriminator_hidden=[8]",
    "--set",
    "train.slice_grid=8",
    "--set",
    "train.batch_size=2",
    "--set",
    "train.points_per_view=32",
    "--set",
    "train.consistency_points=32",
    "--set",
    "train.optimizer=adam",
    "--set",
    "train.learning_rate=1e-3",
    "--set",
    "train.steps=10",
    "--set",
    "reconstruct.resolution=24",
    "--set",
    "eval.surface_points=500",
];

fn small(extra: &[&str]) -> Vec<String> {
    extra.iter().chain(SMALL).map(|s| s.to_string()).collect()
}

fn run(dir: &Path, args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = hocc(dir, &refs);
    assert!(o.status.success(), "hocc {args:?}: {}", stderr(&o));
    o
}

#[test]
fn stages_chain_through_the_filesystem() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &small(&["synth", "--out", "o", "--seed", "3"]));
    assert!(d.join("o/data/manifest.txt").is_file());
    run(d, &small(&["curate", "--out", "o", "--manifest", "o/data/manifest.txt"]));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("o/curation.json")).unwrap()).unwrap();
    assert_eq!(report["removed"].as_array().unwrap().len(), 0);
    run(d, &small(&["train", "--out", "o", "--multiview", "o/curated.txt", "--synthetic", "o/data/synthetic.txt"]));
    assert!(d.join("o/checkpoint.bin").is_file());
    let losses = std::fs::read_to_string(d.join("o/losses.csv")).unwrap();
    assert_eq!(losses.lines().count(), 11);
    run(
        d,
        &small(&["reconstruct", "--out", "o", "--manifest", "o/data/heldout.txt", "--checkpoint", "o/checkpoint.bin"]),
    );
    let o = run(d, &small(&["eval", "--out", "o", "--meshes", "o"]));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["evaluated"].as_u64().unwrap() + summary["empty"].as_u64().unwrap(), 2);
    assert!(std::fs::read_to_string(d.join("o/metrics.csv"))
        .unwrap()
        .starts_with("sequence_id,cd_mm,f_5,f_10,empty\n"));
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &small(&["run", "--out", "a", "--seed", "5"]));
    run(d, &small(&["run", "--out", "b", "--seed", "5"]));
    for f in ["metrics.csv", "summary.json", "checkpoint.bin", "losses.csv", "curation.json"] {
        assert_eq!(std::fs::read(d.join("a").join(f)).unwrap(), std::fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.toml"), "seed = 4\n[train]\nsteps = 77\n").unwrap();
    let o = run(d, &["--config".into(), "c.toml".into(), "--set".into(), "train.batch_size=3".into(), "config".into()]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("seed = 4"), "{text}");
    assert!(text.contains("steps = 77"), "{text}");
    assert!(text.contains("batch_size = 3"), "{text}");
    let o = run(d, &["--config".into(), "c.toml".into(), "--seed".into(), "9".into(), "config".into()]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("seed = 9"));
}

#[test]
fn failures_print_one_categorized_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases: &[(&[&str], &str)] = &[
        (&["--set", "train.bogus=1", "config"], "config"),
        (&["--set", "synth.occlusion_fraction=2", "config"], "config"),
        (&["--config", "missing.toml", "config"], "io"),
        (&["train", "--multiview", "missing.txt"], "io"),
        (&["train"], "precondition"),
        (&["reconstruct", "--manifest", "m.txt", "--oracle", "--frames", "middle"], "config"),
    ];
    for (args, category) in cases {
        let o = hocc(d, args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with(&format!("error: {category}: ")), "{args:?}: {err}");
    }
    std::fs::write(d.join("bad.txt"), "#hocc-manifest 1\nframe seq=x\n").unwrap();
    let o = hocc(d, &["curate", "--manifest", "bad.txt"]);
    assert!(stderr(&o).starts_with("error: parse: "), "{}", stderr(&o));
    assert!(stderr(&o).contains("bad.txt:2"), "{}", stderr(&o));
}
