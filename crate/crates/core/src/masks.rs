//! Per-view binary masks: the on-disk exchange layout shared with the
//! external segmenter, and an oracle segmenter driven by ground truth.

use std::fs;
use std::path::{Path, PathBuf};

use image::{GenericImageView, GrayImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::mesh::FaceLabeling;
use crate::render::{FaceIdBuffer, BACKGROUND};

/// Labels visible in fewer pixels than this get no oracle mask.
pub const ORACLE_MIN_PIXELS: usize = 8;

/// Source rendering of a mask. The derived order is the fusion tie-break.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "normal")]
    Normal,
    #[serde(rename = "sdf")]
    SdfScalar,
    #[serde(rename = "matte")]
    Matte,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Normal, Modality::SdfScalar, Modality::Matte];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Normal => "normal",
            Modality::SdfScalar => "sdf",
            Modality::Matte => "matte",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Modality::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Modality::from_name(s).ok_or_else(|| format!("unknown modality `{s}` (expected normal, sdf or matte)"))
    }
}

/// Row-major boolean raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, pixels: Vec<bool>) -> Self {
        assert_eq!(pixels.len(), width as usize * height as usize, "mask size");
        BinaryMask { width, height, pixels }
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let pixels = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        BinaryMask { width, height, pixels }
    }

    pub fn resolution(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn area(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    fn to_image(&self) -> GrayImage {
        let raw = self.pixels.iter().map(|&p| if p { 255 } else { 0 }).collect();
        GrayImage::from_raw(self.width, self.height, raw).expect("mask matches its resolution")
    }
}

/// All masks one segmenter run produced for a single (view, modality).
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMaskSet {
    pub view_index: usize,
    pub modality: Modality,
    pub width: u32,
    pub height: u32,
    pub masks: Vec<BinaryMask>,
    /// Parallel to `masks`.
    pub predicted_iou: Vec<Option<f32>>,
}

impl BinaryMaskSet {
    pub fn empty(view_index: usize, modality: Modality, (width, height): (u32, u32)) -> Self {
        BinaryMaskSet {
            view_index,
            modality,
            width,
            height,
            masks: Vec::new(),
            predicted_iou: Vec::new(),
        }
    }

    pub fn resolution(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn push(&mut self, mask: BinaryMask, predicted_iou: Option<f32>) {
        self.masks.push(mask);
        self.predicted_iou.push(predicted_iou);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskManifest {
    pub view_index: usize,
    pub modality: Modality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    pub masks: Vec<ManifestEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    #[serde(default)]
    pub predicted_iou: Option<f32>,
}

/// `{masks_root}/view_{i:03}/{modality}`.
pub fn mask_dir(masks_root: &Path, view_index: usize, modality: Modality) -> PathBuf {
    masks_root.join(format!("view_{view_index:03}")).join(modality.name())
}

/// Reads one (view, modality) directory of the exchange layout. Masks are
/// thresholded at 128; all-zero masks are dropped with a warning.
pub fn load_masks(masks_root: &Path, view_index: usize, modality: Modality, resolution: (u32, u32)) -> Result<BinaryMaskSet> {
    let dir = mask_dir(masks_root, view_index, modality);
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.is_file() {
        return Err(Error::MissingManifest(manifest_path));
    }
    let bytes = fs::read(&manifest_path).at(&manifest_path)?;
    let manifest: MaskManifest =
        serde_json::from_slice(&bytes).map_err(|e| Error::parse(&manifest_path, e.to_string()))?;
    if let (Some(w), Some(h)) = (manifest.width, manifest.height) {
        if (w, h) != resolution {
            return Err(Error::ResolutionMismatch {
                expected: resolution,
                got: (w, h),
            });
        }
    }
    let mut set = BinaryMaskSet::empty(view_index, modality, resolution);
    for entry in &manifest.masks {
        let path = dir.join(&entry.file);
        let img = image::open(&path).map_err(|e| Error::CorruptMask {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if img.dimensions() != resolution {
            return Err(Error::ResolutionMismatch {
                expected: resolution,
                got: img.dimensions(),
            });
        }
        let gray = img.into_luma8();
        let mask = BinaryMask::new(resolution.0, resolution.1, gray.as_raw().iter().map(|&v| v >= 128).collect());
        if mask.is_empty() {
            log::warn!("dropping empty mask {}", path.display());
            continue;
        }
        set.push(mask, entry.predicted_iou);
    }
    Ok(set)
}

/// Writes a mask set in the exchange layout, replacing any previous
/// manifest for the same (view, modality).
pub fn save_masks(masks_root: &Path, set: &BinaryMaskSet) -> Result<()> {
    let dir = mask_dir(masks_root, set.view_index, set.modality);
    fs::create_dir_all(&dir).at(&dir)?;
    let mut entries = Vec::with_capacity(set.masks.len());
    for (k, mask) in set.masks.iter().enumerate() {
        let file = format!("mask_{k:04}.png");
        mask.to_image().save(dir.join(&file))?;
        entries.push(ManifestEntry {
            file,
            predicted_iou: set.predicted_iou.get(k).copied().flatten(),
        });
    }
    let manifest = MaskManifest {
        view_index: set.view_index,
        modality: set.modality,
        width: Some(set.width),
        height: Some(set.height),
        masks: entries,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_vec_pretty(&manifest)?).at(&path)
}

/// One mask per ground-truth label visible in the face-ID buffer, in
/// ascending label order. Labels covering fewer than
/// [`ORACLE_MIN_PIXELS`] pixels are skipped, as are unlabeled faces.
pub fn oracle_masks(view_index: usize, face_ids: &FaceIdBuffer, gt: &FaceLabeling) -> Result<BinaryMaskSet> {
    let pixel_label = |id: u32| -> Option<u32> {
        if id == BACKGROUND {
            return None;
        }
        let l = *gt.labels().get(id as usize)?;
        (l != FaceLabeling::UNLABELED).then_some(l)
    };
    if let Some(&bad) = face_ids.ids.iter().find(|&&id| id != BACKGROUND && id as usize >= gt.len()) {
        return Err(Error::LengthMismatch {
            expected: bad as usize + 1,
            got: gt.len(),
        });
    }
    let mut counts = std::collections::BTreeMap::<u32, usize>::new();
    for &id in &face_ids.ids {
        if let Some(l) = pixel_label(id) {
            *counts.entry(l).or_default() += 1;
        }
    }
    let mut set = BinaryMaskSet::empty(view_index, Modality::Normal, face_ids.resolution());
    for (&label, &count) in &counts {
        if count < ORACLE_MIN_PIXELS {
            continue;
        }
        let pixels = face_ids.ids.iter().map(|&id| pixel_label(id) == Some(label)).collect();
        set.push(BinaryMask::new(face_ids.width, face_ids.height, pixels), Some(1.0));
    }
    Ok(set)
}
