//! `meshseg`: render, segment, evaluate.
//!
//! Exit codes: 0 success, 2 renders written but masks still missing, 1 error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use meshseg_core::eval::{mode_part_count, run_eval, Annotations, DatasetManifest};
use meshseg_core::io::{load_labels, load_mesh, save_labels_json};
use meshseg_core::pipeline::{missing_masks, render_stage, renders_current, write_oracle_masks};
use meshseg_core::{run_baseline, run_segment, FaceLabeling, MaskSource, PipelineConfig, RunDir, SegmentOutcome, TriMesh};

const AWAITING_MASKS: u8 = 2;

#[derive(Parser)]
#[command(name = "meshseg", version, about = "Zero-shot mesh part segmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render views and write the mask request, then stop.
    Render(RenderArgs),
    /// Run the full pipeline; exits 2 while masks are missing.
    Segment(SegmentArgs),
    /// Write ground-truth masks into a rendered run directory.
    OracleMasks(OracleArgs),
    /// Shape-diameter baseline segmentation.
    Baseline(BaselineArgs),
    /// Benchmark metrics over a dataset manifest.
    Eval(EvalArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML or JSON configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// general, coseg or princeton.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    views: Option<usize>,
    #[arg(long)]
    resolution: Option<u32>,
    /// Comma-separated subset of normal, sdf, matte.
    #[arg(long)]
    modalities: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Any config key as `key=value` (TOML value); repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut sets = Vec::new();
        if let Some(p) = &self.preset {
            sets.push(format!("preset={p:?}"));
        }
        if let Some(v) = self.views {
            sets.push(format!("n_views={v}"));
        }
        if let Some(r) = self.resolution {
            sets.push(format!("resolution={r}"));
        }
        if let Some(m) = &self.modalities {
            let names: Vec<String> = m.split(',').map(|s| format!("{:?}", s.trim())).collect();
            sets.push(format!("modalities=[{}]", names.join(",")));
        }
        if let Some(l) = self.lambda {
            sets.push(format!("lambda={l:?}"));
        }
        if let Some(s) = self.seed {
            sets.push(format!("seed={s}"));
        }
        sets.extend(self.sets.iter().cloned());
        Ok(PipelineConfig::resolve(self.config.as_deref(), &sets)?)
    }
}

#[derive(Args)]
struct RunArgs {
    mesh: PathBuf,
    /// Defaults to `$MESHSEG_RUN_ROOT/<mesh stem>`, or `runs/<mesh stem>`.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    #[arg(long, env = "MESHSEG_RUN_ROOT", hide_env_values = true)]
    run_root: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

impl RunArgs {
    fn run_dir(&self) -> RunDir {
        if let Some(d) = &self.run_dir {
            return RunDir::new(d);
        }
        let stem = self.mesh.file_stem().map_or_else(|| "mesh".into(), |s| s.to_os_string());
        RunDir::new(self.run_root.clone().unwrap_or_else(|| "runs".into()).join(stem))
    }
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Render even if current renders exist.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SegmentArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Derive masks from these ground-truth labels instead of waiting for an
    /// external generator.
    #[arg(long, value_name = "LABELS")]
    oracle: Option<PathBuf>,
    /// Target part count for the lambda search.
    #[arg(long)]
    target_parts: Option<usize>,
    /// Annotations whose most common part count becomes the target.
    #[arg(long, value_name = "LABELS", num_args = 1..)]
    target_from: Vec<PathBuf>,
    /// Keep polling for masks instead of exiting with code 2.
    #[arg(long)]
    watch: bool,
    /// Seconds between polls with --watch.
    #[arg(long, default_value_t = 5.0)]
    poll_secs: f64,
    /// Give up watching after this many seconds.
    #[arg(long)]
    watch_timeout: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Ground-truth labels (JSON or .seg).
    #[arg(long)]
    gt: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    mesh: PathBuf,
    /// Directory for labels.json, labels.glb and sdf.json.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Mixture components (defaults to the config's baseline_k).
    #[arg(long)]
    k: Option<usize>,
    /// Also write the labels to this file.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvalArgs {
    manifest: PathBuf,
    /// Directory with `<name>.json` or `<name>.seg` per mesh.
    #[arg(long)]
    outputs: PathBuf,
    #[arg(long, default_value = "report.csv")]
    report: PathBuf,
    /// Score against the first annotation only instead of averaging.
    #[arg(long)]
    first_annotation: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Render(a) => render(a),
        Command::Segment(a) => segment(a),
        Command::OracleMasks(a) => oracle(a),
        Command::Baseline(a) => baseline(a),
        Command::Eval(a) => eval(a),
    }
}

fn mesh_at(path: &Path) -> Result<TriMesh> {
    load_mesh(path, None).with_context(|| format!("loading {}", path.display()))
}

fn labels_for(mesh: &TriMesh, path: &Path) -> Result<FaceLabeling> {
    let raw = load_labels(path).with_context(|| format!("loading {}", path.display()))?;
    Ok(mesh.labels_from_source(raw.labels())?)
}

fn render(a: RenderArgs) -> Result<u8> {
    let cfg = a.run.config.resolve()?;
    let mesh = mesh_at(&a.run.mesh)?;
    let run = a.run.run_dir();
    std::fs::create_dir_all(run.root()).with_context(|| format!("creating {}", run.root().display()))?;
    if !a.force && renders_current(&mesh, &cfg, &run) {
        log::info!("renders in {} are current", run.renders().display());
    } else {
        render_stage(&mesh, &cfg, &run).map_err(|e| e.in_stage("render"))?;
    }
    std::fs::write(run.config(), cfg.to_toml_string()?)?;
    println!("{}", run.request().display());
    Ok(0)
}

fn segment(a: SegmentArgs) -> Result<u8> {
    let cfg = a.run.config.resolve()?;
    let mesh = mesh_at(&a.run.mesh)?;
    let run = a.run.run_dir();
    let oracle = a.oracle.as_deref().map(|p| labels_for(&mesh, p)).transpose()?;
    let target = match (a.target_parts, a.target_from.is_empty()) {
        (Some(t), _) => Some(t),
        (None, false) => {
            let gts = a.target_from.iter().map(|p| labels_for(&mesh, p)).collect::<Result<Vec<_>>>()?;
            mode_part_count(&gts)
        }
        (None, true) => None,
    };
    let source = oracle.as_ref().map_or(MaskSource::External, MaskSource::Oracle);
    let started = Instant::now();
    loop {
        match run_segment(&mesh, &cfg, &run, source, target)? {
            SegmentOutcome::Done { summary, .. } => {
                log::info!("{} parts (lambda {}) in {:.1?}", summary.parts, summary.lambda, started.elapsed());
                println!("{}", run.labels().display());
                return Ok(0);
            }
            SegmentOutcome::AwaitingMasks { missing } => {
                let timed_out = a.watch_timeout.is_some_and(|t| started.elapsed().as_secs_f64() > t);
                if !a.watch || timed_out {
                    eprintln!(
                        "awaiting masks: {} manifest(s) missing, first {}; see {}",
                        missing.len(),
                        missing[0].display(),
                        run.request().display()
                    );
                    return Ok(AWAITING_MASKS);
                }
                log::info!("waiting for {} mask manifest(s)", missing.len());
                std::thread::sleep(Duration::from_secs_f64(a.poll_secs.max(0.01)));
            }
        }
    }
}

fn oracle(a: OracleArgs) -> Result<u8> {
    let run = a.run.run_dir();
    // Prefer the configuration the run was rendered with.
    let cfg = if a.run.config.config.is_none() && run.config().is_file() {
        PipelineConfig::load(&run.config())?
    } else {
        a.run.config.resolve()?
    };
    let mesh = mesh_at(&a.run.mesh)?;
    if !renders_current(&mesh, &cfg, &run) {
        bail!("{} has no current renders; run `meshseg render` first", run.root().display());
    }
    let gt = labels_for(&mesh, &a.gt)?;
    write_oracle_masks(&cfg, &run, &gt)?;
    let missing = missing_masks(&cfg, &run);
    if !missing.is_empty() {
        bail!("{} manifests still missing", missing.len());
    }
    println!("{}", run.masks().display());
    Ok(0)
}

fn baseline(a: BaselineArgs) -> Result<u8> {
    let cfg = a.config.resolve()?;
    let mesh = mesh_at(&a.mesh)?;
    let labels = run_baseline(&mesh, &cfg, a.k, a.out.as_deref())?;
    if let Some(p) = &a.labels {
        save_labels_json(&labels, p)?;
    }
    log::info!("{} parts", labels.num_labels());
    Ok(0)
}

fn eval(a: EvalArgs) -> Result<u8> {
    let manifest = DatasetManifest::load(&a.manifest)?;
    let mode = if a.first_annotation {
        Annotations::First
    } else {
        Annotations::Average
    };
    let report = run_eval(&manifest, &a.outputs, mode)?;
    report.write_csv(&a.report)?;
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    let vals = report.aggregate.values();
    println!(
        "mean over {} meshes: CD {} H {} Rm {} Rf {} RI {} GCE {} LCE {}",
        report.rows.len(),
        fmt(vals[0]),
        fmt(vals[1]),
        fmt(vals[2]),
        fmt(vals[3]),
        fmt(vals[4]),
        fmt(vals[5]),
        fmt(vals[6])
    );
    Ok(0)
}
