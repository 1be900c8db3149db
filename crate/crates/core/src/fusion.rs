//! Per-view fusion of overlapping binary masks into one instance mask.

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::Path;

use image::RgbImage;

use crate::error::{Error, IoContext, Result};
use crate::io::palette_color;
use crate::masks::BinaryMaskSet;
use crate::render::FaceIdBuffer;

/// Default minimum island and hole size in pixels.
pub const DEFAULT_MIN_AREA: usize = 1024;

/// Region raster for one view: 0 is unlabeled, regions are `1..=K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceMask {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
}

impl InstanceMask {
    pub fn new(width: u32, height: u32, labels: Vec<u32>) -> Self {
        assert_eq!(labels.len(), width as usize * height as usize, "instance mask size");
        InstanceMask { width, height, labels }
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        Self::new(width, height, vec![0; width as usize * height as usize])
    }

    pub fn resolution(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Largest region ID present (0 for an empty mask).
    pub fn num_regions(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Pixel count per region; entry `k - 1` belongs to region `k`.
    pub fn region_areas(&self) -> Vec<usize> {
        let mut areas = vec![0; self.num_regions() as usize];
        for &l in &self.labels {
            if l > 0 {
                areas[l as usize - 1] += 1;
            }
        }
        areas
    }

    /// Renumbers regions to `1..=K`, keeping their relative order.
    pub fn densified(&self) -> InstanceMask {
        let mut present: Vec<u32> = self.labels.iter().copied().filter(|&l| l > 0).collect();
        present.sort_unstable();
        present.dedup();
        let map: HashMap<u32, u32> = present.iter().enumerate().map(|(i, &l)| (l, i as u32 + 1)).collect();
        let labels = self.labels.iter().map(|&l| if l == 0 { 0 } else { map[&l] }).collect();
        InstanceMask::new(self.width, self.height, labels)
    }

    /// Little-endian u32 per pixel.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.labels.iter().flat_map(|l| l.to_le_bytes()).collect()
    }

    pub fn from_bytes(width: u32, height: u32, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != 4 * width as usize * height as usize {
            return None;
        }
        let labels = bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Some(InstanceMask::new(width, height, labels))
    }

    /// Color-mapped debug image; region 0 is black.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let raw = self
            .labels
            .iter()
            .flat_map(|&l| if l == 0 { [0; 3] } else { palette_color(l as usize - 1) })
            .collect();
        RgbImage::from_raw(self.width, self.height, raw)
            .expect("instance mask matches its resolution")
            .save(path)?;
        Ok(())
    }

    pub fn save_bin(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).at(path)
    }

    pub fn load_bin(path: &Path, (width, height): (u32, u32)) -> Result<Self> {
        let bytes = fs::read(path).at(path)?;
        Self::from_bytes(width, height, &bytes)
            .ok_or_else(|| Error::parse(path, "instance mask size does not match the view resolution"))
    }
}

/// Fuses every mask of one view.
///
/// Masks are painted largest first with fresh region IDs so smaller masks
/// win contested pixels; area ties go to modality order, then to the order
/// within each set. Regions with more than half their pixels on background
/// are deleted and remaining background pixels cleared; islands and holes
/// below `min_area` are then absorbed and IDs densified.
pub fn fuse_masks(mask_sets: &[BinaryMaskSet], face_ids: &FaceIdBuffer, min_area: usize) -> Result<InstanceMask> {
    let (w, h) = face_ids.resolution();
    for set in mask_sets {
        if set.resolution() != (w, h) {
            return Err(Error::ResolutionMismatch {
                expected: (w, h),
                got: set.resolution(),
            });
        }
        if let Some(m) = set.masks.iter().find(|m| m.resolution() != (w, h)) {
            return Err(Error::ResolutionMismatch {
                expected: (w, h),
                got: m.resolution(),
            });
        }
    }
    let mut order: Vec<(usize, _, usize, usize)> = mask_sets
        .iter()
        .enumerate()
        .flat_map(|(s, set)| set.masks.iter().enumerate().map(move |(k, m)| (m.area(), set.modality, s, k)))
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3)));

    let mut labels = vec![0u32; w as usize * h as usize];
    for (id, &(_, _, s, k)) in order.iter().enumerate() {
        let region = id as u32 + 1;
        for (px, &on) in mask_sets[s].masks[k].pixels.iter().enumerate() {
            if on {
                labels[px] = region;
            }
        }
    }

    let fg = face_ids.foreground();
    let mut on_bg: HashMap<u32, (usize, usize)> = HashMap::new();
    for (px, &l) in labels.iter().enumerate() {
        if l > 0 {
            let e = on_bg.entry(l).or_default();
            e.0 += !fg[px] as usize;
            e.1 += 1;
        }
    }
    for (px, l) in labels.iter_mut().enumerate() {
        if *l > 0 {
            let (bg, total) = on_bg[l];
            if 2 * bg > total || !fg[px] {
                *l = 0;
            }
        }
    }
    let mask = InstanceMask::new(w, h, labels);
    Ok(clean_with_silhouette(&mask, min_area, Some(&fg)))
}

/// Absorbs islands and holes smaller than `min_area`. Holes are label-0
/// components that do not touch the raster border.
pub fn clean_instance_mask(mask: &InstanceMask, min_area: usize) -> InstanceMask {
    clean_with_silhouette(mask, min_area, None)
}

/// Like [`clean_instance_mask`], but a hole is a label-0 component lying
/// entirely inside `silhouette`.
///
/// Small components are processed smallest first. Each takes the most common
/// nonzero label among its outside 4-neighbours (ties to the lower label); an
/// island with only unlabeled neighbours is cleared. Repeats until nothing
/// changes, then densifies.
pub fn clean_with_silhouette(mask: &InstanceMask, min_area: usize, silhouette: Option<&[bool]>) -> InstanceMask {
    let (w, h) = (mask.width as usize, mask.height as usize);
    let mut labels = mask.labels.clone();
    loop {
        let comps = components(&labels, w, h);
        let mut small: Vec<&Vec<usize>> = comps
            .iter()
            .filter(|c| c.len() < min_area)
            .filter(|c| {
                labels[c[0]] != 0
                    || match silhouette {
                        Some(s) => c.iter().all(|&p| s[p]),
                        None => !c.iter().any(|&p| on_border(p, w, h)),
                    }
            })
            .collect();
        small.sort_by_key(|c| (c.len(), c[0]));
        let snapshot = labels.clone();
        let mut changed = false;
        let mut in_comp = vec![false; labels.len()];
        for comp in small {
            let own = snapshot[comp[0]];
            // An earlier absorption may already have merged this component.
            if comp.iter().any(|&p| labels[p] != own) {
                continue;
            }
            for &p in comp {
                in_comp[p] = true;
            }
            let mut votes: HashMap<u32, usize> = HashMap::new();
            let mut touches_zero = false;
            let mut grew = false;
            for &p in comp {
                for q in neighbors4(p, w, h) {
                    let l = labels[q];
                    if l == own {
                        // Same label outside the recorded pixels: the component
                        // absorbed a neighbour this pass; revisit it next pass.
                        grew |= !in_comp[q];
                        continue;
                    }
                    if l == 0 {
                        touches_zero = true;
                    } else {
                        *votes.entry(l).or_default() += 1;
                    }
                }
            }
            for &p in comp {
                in_comp[p] = false;
            }
            if grew {
                changed = true;
                continue;
            }
            let target = votes
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .map(|(l, _)| l)
                .or_else(|| (own != 0 && touches_zero).then_some(0));
            if let Some(t) = target {
                for &p in comp {
                    labels[p] = t;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    InstanceMask::new(mask.width, mask.height, labels).densified()
}

fn on_border(p: usize, w: usize, h: usize) -> bool {
    let (x, y) = (p % w, p / w);
    x == 0 || y == 0 || x + 1 == w || y + 1 == h
}

fn neighbors4(p: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (p % w, p / w);
    [
        (x > 0).then(|| p - 1),
        (x + 1 < w).then(|| p + 1),
        (y > 0).then(|| p - w),
        (y + 1 < h).then(|| p + w),
    ]
    .into_iter()
    .flatten()
}

/// 4-connected same-label components (label 0 included), each listed in
/// BFS order starting from its lowest pixel.
fn components(labels: &[u32], w: usize, h: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; labels.len()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..labels.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(p) = queue.pop_front() {
            comp.push(p);
            for q in neighbors4(p, w, h) {
                if !seen[q] && labels[q] == labels[start] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masks::{BinaryMask, Modality};
    use crate::render::BACKGROUND;

    fn all_fg(w: u32, h: u32) -> FaceIdBuffer {
        FaceIdBuffer { width: w, height: h, ids: vec![0; (w * h) as usize] }
    }

    fn rect(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| x >= x0 && x < x1 && y >= y0 && y < y1)
    }

    fn set(modality: Modality, masks: Vec<BinaryMask>) -> BinaryMaskSet {
        let mut s = BinaryMaskSet::empty(0, modality, masks[0].resolution());
        for m in masks {
            s.push(m, None);
        }
        s
    }

    #[test]
    fn single_mask_covers_silhouette() {
        let ids = FaceIdBuffer {
            width: 8,
            height: 8,
            ids: (0..64).map(|p| if p % 8 < 5 { 1 } else { BACKGROUND }).collect(),
        };
        let sil = BinaryMask::new(8, 8, ids.foreground());
        let m = fuse_masks(&[set(Modality::Normal, vec![sil.clone()])], &ids, 0).unwrap();
        let expect: Vec<u32> = sil.pixels.iter().map(|&p| p as u32).collect();
        assert_eq!(m.labels, expect);
    }

    #[test]
    fn smaller_mask_is_painted_on_top() {
        let (w, h) = (125, 80);
        let a = rect(w, h, 0, 0, 125, 80);
        let b = rect(w, h, 10, 10, 60, 50);
        assert_eq!((a.area(), b.area()), (10_000, 2_000));
        let m = fuse_masks(&[set(Modality::Normal, vec![b.clone(), a.clone()])], &all_fg(w, h), 0).unwrap();
        assert_eq!(m.region_areas(), vec![8_000, 2_000]);
        for p in 0..m.labels.len() {
            assert_eq!(m.labels[p], if b.pixels[p] { 2 } else { 1 });
        }
    }

    #[test]
    fn background_masks_are_removed() {
        let ids = FaceIdBuffer {
            width: 10,
            height: 10,
            ids: (0..100).map(|p| if p < 50 { 0 } else { BACKGROUND }).collect(),
        };
        let m = fuse_masks(&[set(Modality::Normal, vec![rect(10, 10, 0, 6, 10, 10)])], &ids, 0).unwrap();
        assert_eq!(m, InstanceMask::zeros(10, 10));
        // A mostly-foreground mask keeps only its foreground pixels.
        let m = fuse_masks(&[set(Modality::Normal, vec![rect(10, 10, 0, 0, 10, 6)])], &ids, 0).unwrap();
        assert_eq!(m.region_areas(), vec![50]);
    }

    #[test]
    fn area_ties_follow_modality_order() {
        let (w, h) = (6, 2);
        let left = rect(w, h, 0, 0, 3, 2);
        let over = rect(w, h, 1, 0, 4, 2);
        let sets = [set(Modality::SdfScalar, vec![over.clone()]), set(Modality::Normal, vec![left.clone()])];
        let m = fuse_masks(&sets, &all_fg(w, h), 0).unwrap();
        // Normal is painted first, so the sdf mask wins the overlap.
        assert_eq!(m.labels, vec![1, 2, 2, 2, 0, 0, 1, 2, 2, 2, 0, 0]);
    }

    #[test]
    fn resolution_is_checked() {
        let s = set(Modality::Normal, vec![rect(4, 4, 0, 0, 2, 2)]);
        assert!(matches!(fuse_masks(&[s], &all_fg(5, 4), 0), Err(Error::ResolutionMismatch { .. })));
    }

    #[test]
    fn island_is_absorbed() {
        let (w, h) = (40, 40);
        let labels = (0..w * h)
            .map(|p| {
                let (x, y) = (p % w, p / w);
                if (10..12).contains(&x) && (10..15).contains(&y) { 2 } else { 1 }
            })
            .collect();
        let mask = InstanceMask::new(w as u32, h as u32, labels);
        assert_eq!(clean_instance_mask(&mask, 1024), InstanceMask::new(40, 40, vec![1; 1600]));
        assert_eq!(clean_instance_mask(&mask, 0), mask);
    }

    #[test]
    fn holes_inside_the_silhouette_are_filled() {
        let (w, h) = (20u32, 20u32);
        let labels: Vec<u32> = (0..w * h)
            .map(|p| {
                let (x, y) = (p % w, p / w);
                if x == 0 || (x == 5 && y == 5) { 0 } else { 1 }
            })
            .collect();
        let mask = InstanceMask::new(w, h, labels);
        let out = clean_instance_mask(&mask, 10);
        // The border column is background-connected, the interior pixel is a hole.
        assert_eq!(out.labels[5 * 20 + 5], 1);
        assert_eq!(out.labels[0], 0);
        let sil: Vec<bool> = (0..w * h).map(|p| p % w != 0).collect();
        let out = clean_with_silhouette(&mask, 10, Some(&sil));
        assert_eq!(out.labels[5 * 20 + 5], 1);
        assert_eq!(out.labels[0], 0);
    }

    #[test]
    fn instance_bin_roundtrip() {
        let m = InstanceMask::new(3, 2, vec![0, 1, 2, 2, 1, 0]);
        assert_eq!(InstanceMask::from_bytes(3, 2, &m.to_bytes()).unwrap(), m);
        assert!(InstanceMask::from_bytes(3, 3, &m.to_bytes()).is_none());
    }
}
