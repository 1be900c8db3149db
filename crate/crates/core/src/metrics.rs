//! Princeton segmentation benchmark metrics. Every value is a dissimilarity:
//! zero for identical partitions, larger is worse.
//!
//! Areas are face-area sums. Labels are compared as partitions, so any label
//! permutation scores the same; `UNLABELED` faces form one more region.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{FaceLabeling, Point, TriMesh};

/// The seven reported columns. `cut_discrepancy` is `None` when either
/// segmentation has no cut edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub cut_discrepancy: Option<f64>,
    pub hamming: f64,
    pub hamming_rm: f64,
    pub hamming_rf: f64,
    pub rand_index: f64,
    pub global_ce: f64,
    pub local_ce: f64,
}

impl MetricReport {
    pub const COLUMNS: [&'static str; 7] = [
        "cut_discrepancy",
        "hamming",
        "hamming_rm",
        "hamming_rf",
        "rand_index",
        "global_ce",
        "local_ce",
    ];

    /// Column values in [`MetricReport::COLUMNS`] order.
    pub fn values(&self) -> [Option<f64>; 7] {
        [
            self.cut_discrepancy,
            Some(self.hamming),
            Some(self.hamming_rm),
            Some(self.hamming_rf),
            Some(self.rand_index),
            Some(self.global_ce),
            Some(self.local_ce),
        ]
    }

    /// Unweighted mean; cut discrepancy averages only the defined entries.
    pub fn mean(reports: &[MetricReport]) -> MetricReport {
        if reports.is_empty() {
            return MetricReport::default();
        }
        let n = reports.len() as f64;
        let avg = |get: fn(&MetricReport) -> f64| reports.iter().map(get).sum::<f64>() / n;
        let cuts: Vec<f64> = reports.iter().filter_map(|r| r.cut_discrepancy).collect();
        MetricReport {
            cut_discrepancy: (!cuts.is_empty()).then(|| cuts.iter().sum::<f64>() / cuts.len() as f64),
            hamming: avg(|r| r.hamming),
            hamming_rm: avg(|r| r.hamming_rm),
            hamming_rf: avg(|r| r.hamming_rf),
            rand_index: avg(|r| r.rand_index),
            global_ce: avg(|r| r.global_ce),
            local_ce: avg(|r| r.local_ce),
        }
    }
}

/// All metrics of `seg` against one ground truth.
pub fn evaluate(mesh: &TriMesh, seg: &FaceLabeling, gt: &FaceLabeling) -> Result<MetricReport> {
    let table = Contingency::build(mesh, seg, gt)?;
    let (hamming, hamming_rf, hamming_rm) = table.hamming();
    let (global_ce, local_ce) = table.consistency_error();
    Ok(MetricReport {
        cut_discrepancy: cut_discrepancy(mesh, seg, gt)?,
        hamming,
        hamming_rm,
        hamming_rf,
        rand_index: table.rand_index(),
        global_ce,
        local_ce,
    })
}

/// Mean of [`evaluate`] over several human annotations of the same mesh.
pub fn evaluate_against_all(mesh: &TriMesh, seg: &FaceLabeling, gts: &[FaceLabeling]) -> Result<MetricReport> {
    if gts.is_empty() {
        return Err(Error::EmptyInput("ground-truth annotations"));
    }
    let reports = gts
        .iter()
        .map(|gt| evaluate(mesh, seg, gt))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricReport::mean(&reports))
}

/// Returns `(hamming, rf, rm)`.
pub fn hamming(mesh: &TriMesh, seg: &FaceLabeling, gt: &FaceLabeling) -> Result<(f64, f64, f64)> {
    Ok(Contingency::build(mesh, seg, gt)?.hamming())
}

/// One minus the fraction of face pairs on which the two partitions agree.
pub fn rand_index_dissimilarity(mesh: &TriMesh, seg: &FaceLabeling, gt: &FaceLabeling) -> Result<f64> {
    Ok(Contingency::build(mesh, seg, gt)?.rand_index())
}

/// Returns `(global_ce, local_ce)`.
pub fn consistency_error(mesh: &TriMesh, seg: &FaceLabeling, gt: &FaceLabeling) -> Result<(f64, f64)> {
    Ok(Contingency::build(mesh, seg, gt)?.consistency_error())
}

/// Symmetric mean nearest-cut distance, divided by the area-weighted mean
/// distance of face centroids from the surface centroid.
pub fn cut_discrepancy(mesh: &TriMesh, seg: &FaceLabeling, gt: &FaceLabeling) -> Result<Option<f64>> {
    check_lengths(mesh, seg, gt)?;
    let a = cut_points(mesh, seg);
    let b = cut_points(mesh, gt);
    if a.is_empty() || b.is_empty() {
        return Ok(None);
    }
    let c = mesh.centroid();
    let area = mesh.surface_area();
    let radius = mesh
        .face_centroids()
        .iter()
        .zip(mesh.face_areas())
        .map(|(p, &w)| w * (p - c).norm())
        .sum::<f64>()
        / area;
    Ok(Some((mean_nearest(&a, &b) + mean_nearest(&b, &a)) / radius))
}

/// Midpoints of the edges whose two faces carry different labels.
pub fn cut_points(mesh: &TriMesh, labels: &FaceLabeling) -> Vec<Point> {
    let v = mesh.vertices();
    mesh.edges()
        .iter()
        .filter(|e| labels.get(e.faces[0]) != labels.get(e.faces[1]))
        .map(|e| nalgebra::center(&v[e.vertices[0]], &v[e.vertices[1]]))
        .collect()
}

fn mean_nearest(from: &[Point], to: &[Point]) -> f64 {
    let total: f64 = from
        .par_iter()
        .map(|p| to.iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min).sqrt())
        .sum();
    total / from.len() as f64
}

fn check_lengths(mesh: &TriMesh, seg: &FaceLabeling, gt: &FaceLabeling) -> Result<()> {
    for l in [seg, gt] {
        if l.len() != mesh.num_faces() {
            return Err(Error::LengthMismatch {
                expected: mesh.num_faces(),
                got: l.len(),
            });
        }
    }
    Ok(())
}

/// Joint region table of two labelings. Every sum is accumulated in face
/// order, so a region's area and its overlap with an identical region are
/// bit-equal and identical partitions score exactly zero.
struct Contingency {
    total_area: f64,
    faces: u64,
    /// Per region of the first labeling: (face count, area).
    rows: Vec<(u64, f64)>,
    cols: Vec<(u64, f64)>,
    /// Non-empty cells: (row, col, face count, area).
    cells: Vec<(usize, usize, u64, f64)>,
}

impl Contingency {
    fn build(mesh: &TriMesh, a: &FaceLabeling, b: &FaceLabeling) -> Result<Self> {
        check_lengths(mesh, a, b)?;
        let ra = dense_ids(a);
        let rb = dense_ids(b);
        let mut rows = vec![(0u64, 0.0); ra.iter().max().map_or(0, |m| m + 1)];
        let mut cols = vec![(0u64, 0.0); rb.iter().max().map_or(0, |m| m + 1)];
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cells: Vec<(usize, usize, u64, f64)> = Vec::new();
        let mut total_area = 0.0;
        for (f, &w) in mesh.face_areas().iter().enumerate() {
            let (i, j) = (ra[f], rb[f]);
            rows[i].0 += 1;
            rows[i].1 += w;
            cols[j].0 += 1;
            cols[j].1 += w;
            let k = *index.entry((i, j)).or_insert_with(|| {
                cells.push((i, j, 0, 0.0));
                cells.len() - 1
            });
            cells[k].2 += 1;
            cells[k].3 += w;
            total_area += w;
        }
        Ok(Contingency {
            total_area,
            faces: mesh.num_faces() as u64,
            rows,
            cols,
            cells,
        })
    }

    /// `(hamming, rf, rm)` with the first labeling as the segmentation.
    fn hamming(&self) -> (f64, f64, f64) {
        if self.total_area <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        // Best overlap per column (ground-truth region) and per row.
        let mut best_col = vec![0.0f64; self.cols.len()];
        let mut best_row = vec![0.0f64; self.rows.len()];
        for &(i, j, _, w) in &self.cells {
            best_col[j] = best_col[j].max(w);
            best_row[i] = best_row[i].max(w);
        }
        let missing: f64 = self.cols.iter().zip(&best_col).map(|(c, b)| c.1 - b).sum();
        let false_alarm: f64 = self.rows.iter().zip(&best_row).map(|(r, b)| r.1 - b).sum();
        let rm = missing / self.total_area;
        let rf = false_alarm / self.total_area;
        ((rm + rf) / 2.0, rf, rm)
    }

    fn rand_index(&self) -> f64 {
        let pairs = |n: u64| n as u128 * n.saturating_sub(1) as u128 / 2;
        let all = pairs(self.faces);
        if all == 0 {
            return 0.0;
        }
        let same_a: u128 = self.rows.iter().map(|r| pairs(r.0)).sum();
        let same_b: u128 = self.cols.iter().map(|c| pairs(c.0)).sum();
        let same_both: u128 = self.cells.iter().map(|c| pairs(c.2)).sum();
        let disagree = same_a + same_b - 2 * same_both;
        disagree as f64 / all as f64
    }

    /// `(global_ce, local_ce)`.
    fn consistency_error(&self) -> (f64, f64) {
        if self.total_area <= 0.0 {
            return (0.0, 0.0);
        }
        let refine = |region: f64, overlap: f64| if region > 0.0 { (region - overlap) / region } else { 0.0 };
        let (mut ab, mut ba, mut local) = (0.0, 0.0, 0.0);
        for &(i, j, _, w) in &self.cells {
            let e_ab = refine(self.rows[i].1, w);
            let e_ba = refine(self.cols[j].1, w);
            ab += w * e_ab;
            ba += w * e_ba;
            local += w * e_ab.min(e_ba);
        }
        (ab.min(ba) / self.total_area, local / self.total_area)
    }
}

/// Dense region ids in order of first appearance.
fn dense_ids(labels: &FaceLabeling) -> Vec<usize> {
    let mut map: HashMap<u32, usize> = HashMap::new();
    labels
        .labels()
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}
