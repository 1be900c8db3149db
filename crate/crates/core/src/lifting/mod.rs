//! Lifting per-view regions to mesh parts: project regions onto faces, link
//! regions of different views that cover the same faces, group linked
//! regions into communities and vote each face's label.

pub mod leiden;

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::fusion::InstanceMask;
use crate::mesh::FaceLabeling;
use crate::render::{FaceIdBuffer, BACKGROUND};

pub use leiden::{leiden, leiden_traced, partition_quality, LeidenParams, Quality};

/// Histogram resolution for the dynamic ratio threshold.
pub const THRESHOLD_BINS: usize = 100;
/// Default minimum number of shared faces for a candidate pair (exclusive).
pub const DEFAULT_MIN_SHARED: usize = 32;

/// The faces one region of one view covers, with pixel counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionProjection {
    pub view_index: usize,
    pub region_id: u32,
    /// `(face, pixels)` sorted by face; every count is at least 1.
    pub face_counts: Vec<(u32, u32)>,
}

impl RegionProjection {
    pub fn total_faces(&self) -> usize {
        self.face_counts.len()
    }

    pub fn count(&self, face: u32) -> u32 {
        self.face_counts
            .binary_search_by_key(&face, |&(f, _)| f)
            .map_or(0, |i| self.face_counts[i].1)
    }
}

/// Projects every region of every view; regions that cover no face are
/// dropped. Output is ordered by view, then region ID.
pub fn project_regions(views: &[(usize, &InstanceMask, &FaceIdBuffer)]) -> Result<Vec<RegionProjection>> {
    for &(_, mask, ids) in views {
        if mask.resolution() != ids.resolution() {
            return Err(Error::ResolutionMismatch {
                expected: ids.resolution(),
                got: mask.resolution(),
            });
        }
    }
    let per_view: Vec<Vec<RegionProjection>> = views
        .par_iter()
        .map(|&(view_index, mask, ids)| {
            let mut tally: HashMap<(u32, u32), u32> = HashMap::new();
            for (&region, &face) in mask.labels.iter().zip(&ids.ids) {
                if region > 0 && face != BACKGROUND {
                    *tally.entry((region, face)).or_default() += 1;
                }
            }
            let mut entries: Vec<((u32, u32), u32)> = tally.into_iter().collect();
            entries.sort_unstable();
            let mut out: Vec<RegionProjection> = Vec::new();
            for ((region, face), count) in entries {
                match out.last_mut() {
                    Some(p) if p.region_id == region => p.face_counts.push((face, count)),
                    _ => out.push(RegionProjection {
                        view_index,
                        region_id: region,
                        face_counts: vec![(face, count)],
                    }),
                }
            }
            out
        })
        .collect();
    Ok(per_view.into_iter().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub shared: usize,
    /// `shared / a.total_faces()`.
    pub ratio_ab: f64,
    /// `shared / b.total_faces()`.
    pub ratio_ba: f64,
}

impl Overlap {
    fn new(shared: usize, a_faces: usize, b_faces: usize) -> Self {
        let ratio = |n: usize| if n == 0 { 0.0 } else { shared as f64 / n as f64 };
        Overlap {
            shared,
            ratio_ab: ratio(a_faces),
            ratio_ba: ratio(b_faces),
        }
    }

    pub fn min_ratio(&self) -> f64 {
        self.ratio_ab.min(self.ratio_ba)
    }
}

/// Distinct shared faces and the two overlap ratios.
pub fn overlap_ratios(a: &RegionProjection, b: &RegionProjection) -> Overlap {
    let (mut i, mut j, mut shared) = (0, 0, 0);
    while i < a.face_counts.len() && j < b.face_counts.len() {
        let (fa, fb) = (a.face_counts[i].0, b.face_counts[j].0);
        match fa.cmp(&fb) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Overlap::new(shared, a.total_faces(), b.total_faces())
}

/// Ratio threshold from the cumulative histogram of `ratios`.
///
/// Ratio `r` falls in bin `min(⌊r·bins⌋, bins − 1)`. The result is the lower
/// edge `b / bins` of the first bin whose running count exceeds `p·N`. When
/// no bin does (only possible for `p ≥ 1`), the threshold is 1.
pub fn dynamic_threshold(ratios: &[f64], p: f64, bins: usize) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::EmptyInput("ratio list for the dynamic threshold"));
    }
    if !(0.0..=1.0).contains(&p) || bins == 0 {
        return Err(Error::InvalidConfig(format!("threshold fraction {p} with {bins} bins")));
    }
    let mut hist = vec![0usize; bins];
    for &r in ratios {
        let b = ((r.clamp(0.0, 1.0) * bins as f64).floor() as usize).min(bins - 1);
        hist[b] += 1;
    }
    let needed = p * ratios.len() as f64;
    let mut running = 0;
    for (b, &count) in hist.iter().enumerate() {
        running += count;
        if running as f64 > needed {
            return Ok(b as f64 / bins as f64);
        }
    }
    Ok(1.0)
}

/// How the overlap-ratio threshold is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    /// Prefix fraction of the candidate-ratio histogram.
    Dynamic(f64),
    /// Fixed ratio.
    Fixed(f64),
}

impl Default for ThresholdMode {
    fn default() -> Self {
        ThresholdMode::Dynamic(0.125)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchEdge {
    pub a: usize,
    pub b: usize,
    #[serde(flatten)]
    pub overlap: Overlap,
}

/// Nodes are region projections (by index); edges link regions of different
/// views judged to show the same part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchGraph {
    /// `(view_index, region_id)` per node.
    pub nodes: Vec<(usize, u32)>,
    pub edges: Vec<MatchEdge>,
    pub candidates: usize,
    /// `None` when there were no candidate pairs.
    pub ratio_threshold: Option<f64>,
}

impl MatchGraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn weighted_edges(&self) -> Vec<(usize, usize, f64)> {
        self.edges.iter().map(|e| (e.a, e.b, 1.0)).collect()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec(self)?).at(path)
    }
}

/// Every cross-view pair sharing more than `min_shared` faces, in
/// ascending `(a, b)` order.
pub fn candidate_pairs(projections: &[RegionProjection], min_shared: usize) -> Vec<MatchEdge> {
    let mut by_face: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, p) in projections.iter().enumerate() {
        for &(f, _) in &p.face_counts {
            by_face.entry(f).or_default().push(i);
        }
    }
    let mut shared: HashMap<(usize, usize), usize> = HashMap::new();
    for regions in by_face.values() {
        for (x, &i) in regions.iter().enumerate() {
            for &j in &regions[x + 1..] {
                if projections[i].view_index != projections[j].view_index {
                    *shared.entry((i, j)).or_default() += 1;
                }
            }
        }
    }
    let mut out: Vec<MatchEdge> = shared
        .into_iter()
        .filter(|&(_, s)| s > min_shared)
        .map(|((a, b), s)| MatchEdge {
            a,
            b,
            overlap: Overlap::new(s, projections[a].total_faces(), projections[b].total_faces()),
        })
        .collect();
    out.sort_by_key(|e| (e.a, e.b));
    out
}

/// Links candidate pairs whose two overlap ratios both reach the threshold.
pub fn build_match_graph(projections: &[RegionProjection], min_shared: usize, threshold: ThresholdMode) -> Result<MatchGraph> {
    let candidates = candidate_pairs(projections, min_shared);
    let ratio_threshold = match threshold {
        _ if candidates.is_empty() => None,
        ThresholdMode::Fixed(t) => Some(t),
        ThresholdMode::Dynamic(p) => {
            let mins: Vec<f64> = candidates.iter().map(|e| e.overlap.min_ratio()).collect();
            Some(dynamic_threshold(&mins, p, THRESHOLD_BINS)?)
        }
    };
    let n_candidates = candidates.len();
    let edges = match ratio_threshold {
        Some(t) => candidates.into_iter().filter(|e| e.overlap.min_ratio() >= t).collect(),
        None => Vec::new(),
    };
    Ok(MatchGraph {
        nodes: projections.iter().map(|p| (p.view_index, p.region_id)).collect(),
        edges,
        candidates: n_candidates,
        ratio_threshold,
    })
}

/// Communities of the match graph with more than one member, each sorted,
/// ordered by smallest member.
pub fn leiden_communities(graph: &MatchGraph, params: &LeidenParams) -> Vec<Vec<usize>> {
    let membership = leiden(graph.num_nodes(), &graph.weighted_edges(), params);
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (v, &c) in membership.iter().enumerate() {
        groups.entry(c).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().filter(|g| g.len() > 1).collect();
    out.sort_by_key(|g| g[0]);
    out
}

/// Majority pixel vote per face over the regions of each community; faces
/// without votes stay unlabeled. Ties go to the lower community index.
pub fn communities_to_face_labels(
    num_faces: usize,
    communities: &[Vec<usize>],
    projections: &[RegionProjection],
) -> Result<FaceLabeling> {
    let mut votes: Vec<(u32, u32, u64)> = Vec::new();
    for (k, members) in communities.iter().enumerate() {
        for &node in members {
            let p = projections.get(node).ok_or(Error::LengthMismatch {
                expected: node + 1,
                got: projections.len(),
            })?;
            for &(f, c) in &p.face_counts {
                if f as usize >= num_faces {
                    return Err(Error::LengthMismatch {
                        expected: f as usize + 1,
                        got: num_faces,
                    });
                }
                votes.push((f, k as u32, c as u64));
            }
        }
    }
    votes.sort_unstable_by_key(|&(f, k, _)| (f, k));
    let mut labels = vec![FaceLabeling::UNLABELED; num_faces];
    let mut i = 0;
    while i < votes.len() {
        let face = votes[i].0;
        let mut best: Option<(u32, u64)> = None;
        while i < votes.len() && votes[i].0 == face {
            let k = votes[i].1;
            let mut total = 0;
            while i < votes.len() && votes[i].0 == face && votes[i].1 == k {
                total += votes[i].2;
                i += 1;
            }
            if best.is_none_or(|(_, b)| total > b) {
                best = Some((k, total));
            }
        }
        labels[face as usize] = best.expect("at least one vote").0;
    }
    Ok(FaceLabeling::new(labels))
}
