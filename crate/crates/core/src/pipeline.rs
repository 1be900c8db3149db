//! Stage-by-stage segmentation driver over a run directory.
//!
//! Every stage reads its inputs from files written by earlier stages, so a
//! run can stop after rendering, wait for an external mask generator to fill
//! `masks/`, and resume later from the same directory:
//!
//! ```text
//! run_dir/
//!   config.toml          resolved configuration
//!   sdf.json             thickness field (when the sdf modality is used)
//!   renders/             view_XXX_{normal,scalar,matte}.png, _faceid.bin, _pose.json
//!   request.json         what the mask generator should segment
//!   masks/               exchange layout, one manifest per (view, modality)
//!   fused/               view_XXX.bin (u32 region IDs) and a preview PNG
//!   matchgraph.json
//!   communities.json
//!   labels_raw.json      lifted votes, unlabeled faces as -1
//!   labels_filled.json   holes filled, split into connected parts
//!   labels.json          final labels
//!   labels.glb           colored preview
//!   run.json             stage summary
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::sdf_segment;
use crate::config::PipelineConfig;
use crate::error::{Error, IoContext, Result};
use crate::fusion::{fuse_masks, InstanceMask};
use crate::io::{load_labels, save_colored_glb, save_labels_json};
use crate::lifting::{build_match_graph, communities_to_face_labels, leiden_communities, project_regions, LeidenParams, MatchGraph};
use crate::masks::{load_masks, mask_dir, oracle_masks, save_masks, Modality};
use crate::mesh::{connected_components, FaceLabeling, TriMesh};
use crate::postprocess::{edge_weights, fill_unlabeled, lambda_search, segment_count, smooth_labels_with};
use crate::render::{icosahedral_poses, read_face_ids, view_file, write_view, Bvh, FaceIdBuffer, Renderer};
use crate::sdf::{shape_diameter, SdfField};

/// File locations inside a run directory.
#[derive(Clone, Debug)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.toml")
    }

    pub fn sdf(&self) -> PathBuf {
        self.root.join("sdf.json")
    }

    pub fn renders(&self) -> PathBuf {
        self.root.join("renders")
    }

    pub fn request(&self) -> PathBuf {
        self.root.join("request.json")
    }

    pub fn masks(&self) -> PathBuf {
        self.root.join("masks")
    }

    pub fn fused(&self) -> PathBuf {
        self.root.join("fused")
    }

    pub fn fused_view(&self, view: usize) -> PathBuf {
        self.fused().join(format!("view_{view:03}.bin"))
    }

    pub fn match_graph(&self) -> PathBuf {
        self.root.join("matchgraph.json")
    }

    pub fn communities(&self) -> PathBuf {
        self.root.join("communities.json")
    }

    pub fn labels_raw(&self) -> PathBuf {
        self.root.join("labels_raw.json")
    }

    pub fn labels_filled(&self) -> PathBuf {
        self.root.join("labels_filled.json")
    }

    pub fn labels(&self) -> PathBuf {
        self.root.join("labels.json")
    }

    pub fn labels_glb(&self) -> PathBuf {
        self.root.join("labels.glb")
    }

    pub fn summary(&self) -> PathBuf {
        self.root.join("run.json")
    }
}

/// Image the mask generator should segment for one (view, modality).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequestImage {
    pub view_index: usize,
    pub modality: Modality,
    /// Relative to the run directory.
    pub image: String,
    /// Where the manifest and masks go, relative to the run directory.
    pub output_dir: String,
}

/// Contents of `request.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskRequest {
    pub n_views: usize,
    pub width: u32,
    pub height: u32,
    pub modalities: Vec<Modality>,
    pub pred_iou_thresh: f64,
    pub images: Vec<RequestImage>,
    /// Coarse identity of the rendered mesh, to detect stale renders.
    pub mesh: MeshFingerprint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshFingerprint {
    pub num_vertices: usize,
    pub num_faces: usize,
    pub centroid: [f64; 3],
    pub bounding_radius: f64,
}

impl MeshFingerprint {
    pub fn of(mesh: &TriMesh) -> Self {
        let c = mesh.centroid();
        MeshFingerprint {
            num_vertices: mesh.vertices().len(),
            num_faces: mesh.num_faces(),
            centroid: [c.x, c.y, c.z],
            bounding_radius: mesh.bounding_radius(),
        }
    }
}

fn render_suffix(m: Modality) -> &'static str {
    match m {
        Modality::Normal => "normal.png",
        Modality::SdfScalar => "scalar.png",
        Modality::Matte => "matte.png",
    }
}

impl MaskRequest {
    pub fn new(mesh: &TriMesh, cfg: &PipelineConfig) -> Self {
        let images = (0..cfg.n_views)
            .flat_map(|v| {
                cfg.modalities.iter().map(move |&m| RequestImage {
                    view_index: v,
                    modality: m,
                    image: format!("renders/view_{v:03}_{}", render_suffix(m)),
                    output_dir: format!("masks/view_{v:03}/{}", m.name()),
                })
            })
            .collect();
        MaskRequest {
            n_views: cfg.n_views,
            width: cfg.resolution,
            height: cfg.resolution,
            modalities: cfg.modalities.clone(),
            pred_iou_thresh: cfg.sam_iou_threshold,
            images,
            mesh: MeshFingerprint::of(mesh),
        }
    }
}

/// Where per-view masks come from.
#[derive(Clone, Copy, Debug)]
pub enum MaskSource<'a> {
    /// An outside process fills `masks/` from `request.json`.
    External,
    /// Perfect masks derived from ground-truth face labels.
    Oracle(&'a FaceLabeling),
}

/// Contents of `run.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub num_faces: usize,
    pub regions_per_view: Vec<u32>,
    pub graph_nodes: usize,
    pub graph_candidates: usize,
    pub graph_edges: usize,
    pub ratio_threshold: Option<f64>,
    pub communities: usize,
    pub unlabeled_after_lifting: usize,
    pub parts_before_smoothing: usize,
    pub lambda: f64,
    /// `(λ, part count)` for each searched weight.
    pub lambda_trials: Vec<(f64, usize)>,
    pub parts: usize,
}

/// Result of [`run_segment`].
#[derive(Clone, Debug)]
pub enum SegmentOutcome {
    Done { labels: FaceLabeling, summary: RunSummary },
    /// Rendering is done but these manifests do not exist yet.
    AwaitingMasks { missing: Vec<PathBuf> },
}

/// Full pipeline: render (reusing current renders), obtain masks, then fuse,
/// lift and post-process. `target_parts` is required when the config
/// searches the smoothing weight.
pub fn run_segment(
    mesh: &TriMesh,
    cfg: &PipelineConfig,
    run: &RunDir,
    source: MaskSource<'_>,
    target_parts: Option<usize>,
) -> Result<SegmentOutcome> {
    cfg.validate()?;
    if cfg.lambda_search.is_some() && target_parts.is_none() {
        return Err(Error::InvalidConfig("the lambda search needs a target part count".into()));
    }
    fs::create_dir_all(run.root()).at(run.root())?;
    let cfg_path = run.config();
    fs::write(&cfg_path, cfg.to_toml_string()?).at(&cfg_path)?;

    if renders_current(mesh, cfg, run) {
        log::info!("reusing renders in {}", run.renders().display());
    } else {
        render_stage(mesh, cfg, run).map_err(|e| e.in_stage("render"))?;
    }
    if let MaskSource::Oracle(gt) = source {
        write_oracle_masks(cfg, run, gt).map_err(|e| e.in_stage("oracle masks"))?;
    }
    let missing = missing_masks(cfg, run);
    if !missing.is_empty() {
        return Ok(SegmentOutcome::AwaitingMasks { missing });
    }
    let regions = fuse_stage(cfg, run).map_err(|e| e.in_stage("fuse"))?;
    let lifted = lift_stage(mesh, cfg, run).map_err(|e| e.in_stage("lift"))?;
    let (labels, mut summary) = postprocess_stage(mesh, cfg, run, target_parts).map_err(|e| e.in_stage("postprocess"))?;
    summary.regions_per_view = regions;
    summary.graph_nodes = lifted.nodes.len();
    summary.graph_candidates = lifted.candidates;
    summary.graph_edges = lifted.edges.len();
    summary.ratio_threshold = lifted.ratio_threshold;
    summary.communities = read_json::<Vec<Vec<usize>>>(&run.communities())?.len();
    write_json(&run.summary(), &summary)?;
    Ok(SegmentOutcome::Done { labels, summary })
}

/// True when `request.json` matches what this mesh and config would render
/// and every render file is present.
pub fn renders_current(mesh: &TriMesh, cfg: &PipelineConfig, run: &RunDir) -> bool {
    let Ok(existing) = read_json::<MaskRequest>(&run.request()) else {
        return false;
    };
    if existing != MaskRequest::new(mesh, cfg) {
        return false;
    }
    (0..cfg.n_views).all(|v| {
        ["faceid.bin", "pose.json"]
            .into_iter()
            .chain(cfg.modalities.iter().map(|&m| render_suffix(m)))
            .all(|s| view_file(&run.renders(), v, s).is_file())
    })
}

/// Computes the thickness field when needed, renders every view and writes
/// the mask request.
pub fn render_stage(mesh: &TriMesh, cfg: &PipelineConfig, run: &RunDir) -> Result<()> {
    let renderer = Renderer::new(mesh);
    let scalars = if cfg.modalities.contains(&Modality::SdfScalar) {
        let field = shape_diameter(mesh, renderer.bvh(), &cfg.sdf).map_err(|e| e.in_stage("sdf"))?;
        field.save_json(&run.sdf())?;
        field.normalized
    } else {
        None
    };
    let res = (cfg.resolution, cfg.resolution);
    let poses = icosahedral_poses(mesh, cfg.n_views, cfg.fov_radians(), res)?;
    let with_matte = cfg.modalities.contains(&Modality::Matte);
    for (v, pose) in poses.iter().enumerate() {
        let view = renderer.render_view(pose, scalars.as_deref(), with_matte)?;
        write_view(&run.renders(), v, &view)?;
    }
    write_json(&run.request(), &MaskRequest::new(mesh, cfg))
}

/// Manifests that the current config needs but that do not exist yet.
pub fn missing_masks(cfg: &PipelineConfig, run: &RunDir) -> Vec<PathBuf> {
    (0..cfg.n_views)
        .flat_map(|v| cfg.modalities.iter().map(move |&m| mask_dir(&run.masks(), v, m).join("manifest.json")))
        .filter(|p| !p.is_file())
        .collect()
}

/// Fills `masks/` from ground truth, the same set for every modality.
pub fn write_oracle_masks(cfg: &PipelineConfig, run: &RunDir, gt: &FaceLabeling) -> Result<()> {
    (0..cfg.n_views).into_par_iter().try_for_each(|v| {
        let ids = read_face_ids(&run.renders(), v)?;
        let mut set = oracle_masks(v, &ids, gt)?;
        for &m in &cfg.modalities {
            set.modality = m;
            save_masks(&run.masks(), &set)?;
        }
        Ok(())
    })
}

fn read_view_ids(run: &RunDir, cfg: &PipelineConfig) -> Result<Vec<FaceIdBuffer>> {
    (0..cfg.n_views).into_par_iter().map(|v| read_face_ids(&run.renders(), v)).collect()
}

/// Fuses each view's masks into `fused/`; returns the region count per view.
pub fn fuse_stage(cfg: &PipelineConfig, run: &RunDir) -> Result<Vec<u32>> {
    fs::create_dir_all(run.fused()).at(&run.fused())?;
    (0..cfg.n_views)
        .into_par_iter()
        .map(|v| {
            let ids = read_face_ids(&run.renders(), v)?;
            let sets = cfg
                .modalities
                .iter()
                .map(|&m| load_masks(&run.masks(), v, m, ids.resolution()))
                .collect::<Result<Vec<_>>>()?;
            let fused = fuse_masks(&sets, &ids, cfg.min_mask_area)?;
            fused.save_bin(&run.fused_view(v))?;
            fused.save_png(&run.fused().join(format!("view_{v:03}.png")))?;
            Ok(fused.num_regions())
        })
        .collect()
}

/// Builds the match graph from the fused views, groups regions into
/// communities and votes them onto faces (`labels_raw.json`).
pub fn lift_stage(mesh: &TriMesh, cfg: &PipelineConfig, run: &RunDir) -> Result<MatchGraph> {
    let ids = read_view_ids(run, cfg)?;
    let fused = ids
        .iter()
        .enumerate()
        .map(|(v, b)| InstanceMask::load_bin(&run.fused_view(v), b.resolution()))
        .collect::<Result<Vec<_>>>()?;
    let views: Vec<(usize, &InstanceMask, &FaceIdBuffer)> =
        fused.iter().zip(&ids).enumerate().map(|(v, (m, b))| (v, m, b)).collect();
    let projections = project_regions(&views)?;
    let graph = build_match_graph(&projections, cfg.min_shared_faces, cfg.threshold)?;
    graph.save_json(&run.match_graph())?;
    let params = LeidenParams {
        resolution: cfg.leiden_resolution,
        seed: cfg.seed,
        ..Default::default()
    };
    let communities = leiden_communities(&graph, &params);
    write_json(&run.communities(), &communities)?;
    let labels = communities_to_face_labels(mesh.num_faces(), &communities, &projections)?;
    save_labels_json(&labels, &run.labels_raw())?;
    Ok(graph)
}

/// Fills holes, splits parts and smooths them (searching the weight when
/// configured); writes `labels_filled.json`, `labels.json` and `labels.glb`.
pub fn postprocess_stage(
    mesh: &TriMesh,
    cfg: &PipelineConfig,
    run: &RunDir,
    target_parts: Option<usize>,
) -> Result<(FaceLabeling, RunSummary)> {
    let raw = load_labels(&run.labels_raw())?;
    mesh.check_labels(&raw)?;
    let unlabeled = raw.labels().iter().filter(|&&l| l == FaceLabeling::UNLABELED).count();
    let filled = fill_unlabeled(mesh, &raw, cfg.hole_fraction, cfg.fill_iterations, cfg.hole_mode)?;
    let filled = connected_components(mesh, &filled)?;
    save_labels_json(&filled, &run.labels_filled())?;

    let weights = edge_weights(mesh);
    let mut trials = Vec::new();
    let (lambda, labels) = match (&cfg.lambda_search, target_parts) {
        (Some(search), Some(target)) => lambda_search(&search.grid, target, search.margin, |lambda| {
            let out = smooth_labels_with(mesh, &filled, lambda, &weights)?;
            trials.push((lambda, segment_count(&out)));
            Ok((segment_count(&out), out))
        })?,
        (Some(_), None) => return Err(Error::InvalidConfig("the lambda search needs a target part count".into())),
        (None, _) => (cfg.lambda, smooth_labels_with(mesh, &filled, cfg.lambda, &weights)?),
    };
    save_labels_json(&labels, &run.labels())?;
    save_colored_glb(mesh, &labels, &run.labels_glb())?;
    let summary = RunSummary {
        num_faces: mesh.num_faces(),
        regions_per_view: Vec::new(),
        graph_nodes: 0,
        graph_candidates: 0,
        graph_edges: 0,
        ratio_threshold: None,
        communities: 0,
        unlabeled_after_lifting: unlabeled,
        parts_before_smoothing: filled.num_labels(),
        lambda,
        lambda_trials: trials,
        parts: segment_count(&labels),
    };
    Ok((labels, summary))
}

/// Shape-diameter baseline with the config's `baseline_k` (or `k` when
/// given) and `baseline_lambda`. Writes `labels.json`, `labels.glb` and
/// `sdf.json` into `out_dir` when one is given.
pub fn run_baseline(mesh: &TriMesh, cfg: &PipelineConfig, k: Option<usize>, out_dir: Option<&Path>) -> Result<FaceLabeling> {
    cfg.validate()?;
    let bvh = Bvh::build(mesh);
    let field: SdfField = shape_diameter(mesh, &bvh, &cfg.sdf).map_err(|e| e.in_stage("sdf"))?;
    let k = k.unwrap_or(cfg.baseline_k);
    let labels = sdf_segment(mesh, &field, k, cfg.baseline_lambda, cfg.seed).map_err(|e| e.in_stage("baseline"))?;
    if let Some(dir) = out_dir {
        let run = RunDir::new(dir);
        fs::create_dir_all(dir).at(dir)?;
        field.save_json(&run.sdf())?;
        save_labels_json(&labels, &run.labels())?;
        save_colored_glb(mesh, &labels, &run.labels_glb())?;
    }
    Ok(labels)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(value)?).at(path)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).at(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::parse(path, e.to_string()))
}
