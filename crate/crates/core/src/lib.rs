//! Zero-shot mesh part segmentation.
//!
//! Multiview renders of a mesh (surface normals, a per-face thickness field
//! and a face-ID buffer) are segmented in 2D by an external model; the
//! resulting masks are fused per view, associated across views through a
//! match graph, and lifted to a per-face part labeling which is then cleaned
//! up with frontier filling and an alpha-expansion graph cut.
//!
//! The crate also contains the shape-diameter baseline segmenter and the
//! Princeton benchmark metrics used to compare the two.

pub mod baseline;
pub mod config;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod io;
pub mod lifting;
pub mod masks;
pub mod mesh;
pub mod metrics;
pub mod pipeline;
pub mod postprocess;
pub mod render;
pub mod sdf;
pub mod shapes;

pub use error::{Error, Result};
pub use mesh::{connected_components, dihedral_angle, Dihedral, FaceLabeling, Point, TriMesh, Vector};
pub use render::{CameraPose, FaceIdBuffer, Renderer, ViewRender, BACKGROUND};
pub use sdf::{compute_sdf, normalize_sdf, SdfField, SdfParams};
pub use fusion::{clean_instance_mask, fuse_masks, InstanceMask};
pub use masks::{load_masks, oracle_masks, save_masks, BinaryMask, BinaryMaskSet, Modality};
pub use lifting::{build_match_graph, communities_to_face_labels, leiden_communities, project_regions, MatchGraph, RegionProjection, ThresholdMode};
pub use postprocess::{alpha_expansion, fill_unlabeled, smooth_labels, CutEnergy, HoleMode};
pub use baseline::{fit_gmm_1d, sdf_segment, Gmm1D};
pub use metrics::{evaluate, MetricReport};
pub use config::{PipelineConfig, Preset};
pub use pipeline::{run_baseline, run_segment, MaskSource, RunDir, SegmentOutcome};
