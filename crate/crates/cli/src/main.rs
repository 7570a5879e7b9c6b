//! `hocc`: runs the occupancy pipeline stage by stage over on-disk datasets.
//!
//! Every command prints its report as JSON on stdout. Failures print one
//! line `error: <category>: <message>` on stderr and exit with status 1.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hocc_core::pipeline::{
    cmd_curate, cmd_eval, cmd_reconstruct, cmd_synth, cmd_train, run_pipeline, FieldSource, FrameSelector,
    PipelineConfig,
};
use hocc_core::{Error, Result};

#[derive(Parser)]
#[command(name = "hocc", version, about = "Occupancy learning for hand-held objects from multiview silhouettes")]
struct Cli {
    /// TOML pipeline config; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Global seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override any config key, e.g. `--set train.steps=500`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset under `<out>/data`.
    Synth,
    /// Split tracks by contacting hand and drop frames with unstable hand pose.
    Curate {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Train the occupancy network; writes a checkpoint and loss curves.
    Train {
        /// Multiview (mask-supervised) manifest.
        #[arg(long)]
        multiview: Option<PathBuf>,
        /// Synthetic-3D (oracle-supervised) manifest.
        #[arg(long)]
        synthetic: Option<PathBuf>,
        /// Continue from this checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Mesh selected frames with marching cubes.
    Reconstruct {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, required_unless_present = "oracle", conflicts_with = "oracle")]
        checkpoint: Option<PathBuf>,
        /// Mesh the oracle shapes instead of a trained network.
        #[arg(long)]
        oracle: bool,
        /// all, first, last or a frame id.
        #[arg(long, default_value = "all")]
        frames: String,
    },
    /// Score meshes from a reconstruct run against oracle shapes.
    Eval {
        /// Directory holding `reconstruct.json` and `meshes/`.
        #[arg(long)]
        meshes: PathBuf,
        /// Manifest with the oracle shapes (default: the reconstructed one).
        #[arg(long)]
        shapes: Option<PathBuf>,
    },
    /// synth → curate → train → reconstruct → eval in one go.
    Run,
    /// Print the effective config as TOML.
    Config,
}

fn config(cli: &Cli) -> Result<PipelineConfig> {
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(o) = &cli.out {
        let text = o.to_str().ok_or_else(|| Error::Config(format!("non-UTF-8 output path {}", o.display())))?;
        overrides.push(format!("out={}", toml_string(text)));
    }
    PipelineConfig::load(cli.config.as_deref(), &overrides)
}

fn toml_string(s: &str) -> String {
    let escaped: String = s
        .chars()
        .flat_map(|c| match c {
            '"' | '\\' => vec!['\\', c],
            c => vec![c],
        })
        .collect();
    format!("\"{escaped}\"")
}

fn print<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Synth => print(&cmd_synth(&cfg)?),
        Command::Curate { manifest } => print(&cmd_curate(manifest, &cfg)?),
        Command::Train { multiview, synthetic, resume } => {
            print(&cmd_train(multiview.as_deref(), synthetic.as_deref(), resume.as_deref(), &cfg)?)
        }
        Command::Reconstruct { manifest, checkpoint, oracle, frames } => {
            let selector: FrameSelector = frames.parse()?;
            let source = match (checkpoint, oracle) {
                (Some(c), false) => FieldSource::Checkpoint(c),
                _ => FieldSource::Oracle,
            };
            print(&cmd_reconstruct(source, manifest, selector, &cfg)?)
        }
        Command::Eval { meshes, shapes } => print(&cmd_eval(meshes, shapes.as_deref(), &cfg)?.summary),
        Command::Run => print(&run_pipeline(&cfg)?.eval.summary),
        Command::Config => print!("{}", cfg.to_toml()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {msg}", e.category());
            ExitCode::FAILURE
        }
    }
}
