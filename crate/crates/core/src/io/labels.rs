use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::mesh::{FaceLabeling, TriMesh};

/// On-disk labeling: `{"num_faces": N, "labels": [..]}`. Unlabeled faces are
/// written as `-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelsDocument {
    pub num_faces: usize,
    pub labels: Vec<i64>,
}

impl From<&FaceLabeling> for LabelsDocument {
    fn from(l: &FaceLabeling) -> Self {
        LabelsDocument {
            num_faces: l.len(),
            labels: l
                .labels()
                .iter()
                .map(|&x| if x == FaceLabeling::UNLABELED { -1 } else { x as i64 })
                .collect(),
        }
    }
}

impl LabelsDocument {
    pub fn to_labeling(&self) -> Result<FaceLabeling> {
        if self.labels.len() != self.num_faces {
            return Err(Error::LengthMismatch {
                expected: self.num_faces,
                got: self.labels.len(),
            });
        }
        Ok(FaceLabeling::new(
            self.labels
                .iter()
                .map(|&x| if x < 0 { FaceLabeling::UNLABELED } else { x as u32 })
                .collect(),
        ))
    }
}

pub fn save_labels_json(labels: &FaceLabeling, path: &Path) -> Result<()> {
    let doc = LabelsDocument::from(labels);
    fs::write(path, serde_json::to_vec(&doc)?).at(path)
}

/// Reads a labeling from JSON, or from a `.seg` file (one integer per line,
/// as distributed with the Princeton benchmark).
pub fn load_labels(path: &Path) -> Result<FaceLabeling> {
    let text = fs::read_to_string(path).at(path)?;
    let is_seg = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("seg") || e.eq_ignore_ascii_case("txt"));
    if is_seg {
        read_seg(&text).map_err(|m| Error::parse(path, m))
    } else {
        let doc: LabelsDocument = serde_json::from_str(&text)?;
        doc.to_labeling()
    }
}

pub fn read_seg(text: &str) -> std::result::Result<FaceLabeling, String> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<i64>()
                .map(|x| if x < 0 { FaceLabeling::UNLABELED } else { x as u32 })
                .map_err(|_| format!("bad label {t:?}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(FaceLabeling::new)
}

/// Visually distinct colors, handed out largest region first.
const PALETTE: [[u8; 3]; 22] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [255, 250, 200],
    [128, 0, 0],
    [170, 255, 195],
    [128, 128, 0],
    [255, 215, 180],
    [0, 0, 128],
    [128, 128, 128],
    [255, 255, 255],
    [0, 0, 0],
];

const UNLABELED_COLOR: [u8; 3] = [64, 64, 64];

/// Color for the `rank`-th largest region. Past the fixed palette, hues step
/// by the golden angle.
pub fn palette_color(rank: usize) -> [u8; 3] {
    if rank < PALETTE.len() {
        return PALETTE[rank];
    }
    let h = (rank as f64 * 0.618_033_988_749_895).fract() * 6.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [(r * 220.0) as u8 + 20, (g * 220.0) as u8 + 20, (b * 220.0) as u8 + 20]
}

/// Per-face colors with regions ranked by total area (ties by label).
pub fn label_colors(mesh: &TriMesh, labels: &FaceLabeling) -> Vec<[u8; 3]> {
    let bound = labels.label_bound() as usize;
    let mut area = vec![0.0; bound];
    for (f, &l) in labels.labels().iter().enumerate() {
        if l != FaceLabeling::UNLABELED {
            area[l as usize] += mesh.face_areas()[f];
        }
    }
    let mut order: Vec<usize> = (0..bound).filter(|&l| area[l] > 0.0).collect();
    order.sort_by(|&a, &b| area[b].total_cmp(&area[a]).then(a.cmp(&b)));
    let mut rank = vec![0; bound];
    for (r, &l) in order.iter().enumerate() {
        rank[l] = r;
    }
    labels
        .labels()
        .iter()
        .map(|&l| {
            if l == FaceLabeling::UNLABELED {
                UNLABELED_COLOR
            } else {
                palette_color(rank[l as usize])
            }
        })
        .collect()
}

pub fn save_colored_glb(mesh: &TriMesh, labels: &FaceLabeling, path: &Path) -> Result<()> {
    mesh.check_labels(labels)?;
    let colors = label_colors(mesh, labels);
    fs::write(path, super::glb::write(mesh, Some(&colors))).at(path)
}

pub fn save_colored_ply(mesh: &TriMesh, labels: &FaceLabeling, path: &Path) -> Result<()> {
    mesh.check_labels(labels)?;
    let colors = label_colors(mesh, labels);
    fs::write(path, super::ply::write_ascii(mesh, Some(&colors))).at(path)
}
