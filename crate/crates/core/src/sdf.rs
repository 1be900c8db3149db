//! Shape Diameter Function: per-face local thickness measured with a cone of
//! inward rays, and its log-normalized form.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::mesh::{TriMesh, Vector};
use crate::render::{Bvh, Ray};

/// Rays whose hit face is this close to parallel are skipped.
const GRAZING_COS: f64 = 1e-3;
/// Added to the cone angle in the inverse-angle weight.
const WEIGHT_EPS: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdfParams {
    pub rays_per_face: usize,
    /// Radians, in `(0, π/2)`.
    pub cone_half_angle: f64,
    /// Minimum fraction of rays that must hit the surface.
    pub min_hit_rate: f64,
    /// Normalization strength for the log map.
    pub alpha: f64,
    /// One-ring averaging passes over the raw values (0 disables).
    pub smoothing_iterations: usize,
}

impl Default for SdfParams {
    fn default() -> Self {
        SdfParams {
            rays_per_face: 30,
            cone_half_angle: 60f64.to_radians(),
            min_hit_rate: 0.95,
            alpha: 4.0,
            smoothing_iterations: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdfField {
    /// Thickness per face in model units.
    pub raw: Vec<f64>,
    /// Per-face values in `[0, 1]`, filled by [`normalize_sdf`].
    pub normalized: Option<Vec<f64>>,
    pub alpha: Option<f64>,
}

impl SdfField {
    pub fn normalized(&self) -> Option<&[f64]> {
        self.normalized.as_deref()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec(self)?).at(path)
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).at(path)?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

/// Raw thickness per face.
///
/// From each face centroid, `rays_per_face` rays are cast into the inward
/// cone around the reversed normal, stratified uniformly in polar angle and
/// low-discrepancy in azimuth (with a per-face rotation). Distances more
/// than one standard deviation from the median are discarded and the rest
/// averaged with weight `1 / (angle + ε)`. Faces with no hits take the mean
/// of their neighbours.
pub fn compute_sdf(mesh: &TriMesh, bvh: &Bvh, params: &SdfParams) -> Result<SdfField> {
    if params.rays_per_face == 0 {
        return Err(Error::InvalidConfig("rays_per_face must be at least 1".into()));
    }
    if !(params.cone_half_angle > 0.0 && params.cone_half_angle < PI / 2.0) {
        return Err(Error::InvalidConfig("cone half-angle must lie in (0, π/2)".into()));
    }
    let tmin = 1e-7 * mesh.bounding_radius();
    let per_face: Vec<(Option<f64>, usize)> = (0..mesh.num_faces())
        .into_par_iter()
        .map(|f| face_thickness(mesh, bvh, f, params, tmin))
        .collect();

    let rays = (mesh.num_faces() * params.rays_per_face) as f64;
    let hits: usize = per_face.iter().map(|&(_, h)| h).sum();
    let hit_rate = hits as f64 / rays;
    if hit_rate < params.min_hit_rate {
        return Err(Error::NotWatertightEnough {
            hit_rate,
            required: params.min_hit_rate,
        });
    }
    let mut raw = fill_from_neighbors(mesh, per_face.into_iter().map(|(v, _)| v).collect());
    for _ in 0..params.smoothing_iterations {
        raw = one_ring_average(mesh, &raw);
    }
    Ok(SdfField {
        raw,
        normalized: None,
        alpha: None,
    })
}

/// Cone directions in the frame of the inward axis: `(polar angle, azimuth)`.
pub(crate) fn cone_samples(face: usize, count: usize, half_angle: f64) -> impl Iterator<Item = (f64, f64)> {
    let shift = unit_hash(face as u64);
    (0..count).map(move |i| {
        let theta = half_angle * (i as f64 + 0.5) / count as f64;
        let phi = 2.0 * PI * (radical_inverse(i as u64) + shift).fract();
        (theta, phi)
    })
}

fn face_thickness(mesh: &TriMesh, bvh: &Bvh, f: usize, params: &SdfParams, tmin: f64) -> (Option<f64>, usize) {
    let axis = -mesh.face_normals()[f];
    let (u, v) = orthonormal_basis(&axis);
    let origin = mesh.face_centroids()[f];
    let normals = mesh.face_normals();
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(params.rays_per_face);
    for (theta, phi) in cone_samples(f, params.rays_per_face, params.cone_half_angle) {
        let dir = axis * theta.cos() + (u * phi.cos() + v * phi.sin()) * theta.sin();
        let ray = Ray::new(origin, dir);
        let hit = bvh.intersect_filtered(&ray, tmin, |g, _| {
            g != f && normals[g].dot(&dir).abs() >= GRAZING_COS
        });
        if let Some(h) = hit {
            samples.push((h.t, theta));
        }
    }
    let hits = samples.len();
    if samples.is_empty() {
        return (None, 0);
    }
    let mut dists: Vec<f64> = samples.iter().map(|s| s.0).collect();
    dists.sort_by(f64::total_cmp);
    let n = dists.len();
    let median = if n % 2 == 1 {
        dists[n / 2]
    } else {
        0.5 * (dists[n / 2 - 1] + dists[n / 2])
    };
    let mean = dists.iter().sum::<f64>() / n as f64;
    let std = (dists.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let (mut num, mut den) = (0.0, 0.0);
    for &(d, theta) in &samples {
        if (d - median).abs() <= std {
            let w = 1.0 / (theta + WEIGHT_EPS);
            num += w * d;
            den += w;
        }
    }
    // The sample closest to the median always survives unless rounding
    // pushes it out; fall back to the median itself.
    let value = if den > 0.0 { num / den } else { median };
    (Some(value), hits)
}

fn orthonormal_basis(n: &Vector) -> (Vector, Vector) {
    let helper = if n.x.abs() < 0.9 { Vector::x() } else { Vector::y() };
    let u = n.cross(&helper).normalize();
    let v = n.cross(&u);
    (u, v)
}

fn radical_inverse(mut i: u64) -> f64 {
    let mut r = 0.0;
    let mut f = 0.5;
    while i > 0 {
        r += f * (i & 1) as f64;
        i >>= 1;
        f *= 0.5;
    }
    r
}

/// SplitMix64 finalizer mapped to `[0, 1)`.
fn unit_hash(x: u64) -> f64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Assigns faces without a value the mean of their assigned neighbours,
/// repeating until nothing changes. Faces cut off from every value get the
/// global mean.
fn fill_from_neighbors(mesh: &TriMesh, mut values: Vec<Option<f64>>) -> Vec<f64> {
    loop {
        let updates: Vec<(usize, f64)> = (0..values.len())
            .filter(|&f| values[f].is_none())
            .filter_map(|f| {
                let known: Vec<f64> = mesh.neighbors(f).iter().filter_map(|&g| values[g]).collect();
                (!known.is_empty()).then(|| (f, known.iter().sum::<f64>() / known.len() as f64))
            })
            .collect();
        if updates.is_empty() {
            break;
        }
        for (f, v) in updates {
            values[f] = Some(v);
        }
    }
    let known: Vec<f64> = values.iter().flatten().copied().collect();
    let mean = if known.is_empty() { 0.0 } else { known.iter().sum::<f64>() / known.len() as f64 };
    values.into_iter().map(|v| v.unwrap_or(mean)).collect()
}

fn one_ring_average(mesh: &TriMesh, values: &[f64]) -> Vec<f64> {
    (0..values.len())
        .map(|f| {
            let nb = mesh.neighbors(f);
            (values[f] + nb.iter().map(|&g| values[g]).sum::<f64>()) / (1 + nb.len()) as f64
        })
        .collect()
}

/// Fills `normalized`: min-max scaling to `[0, 1]` followed by
/// `log(x·α + 1) / log(α + 1)`. A constant field maps to all zeros.
pub fn normalize_sdf(field: &SdfField, alpha: f64) -> Result<SdfField> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidConfig(format!("normalization alpha must be positive, got {alpha}")));
    }
    let lo = field.raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let denom = (alpha + 1.0).ln();
    let normalized = field
        .raw
        .iter()
        .map(|&r| {
            let linear = if span > 0.0 { (r - lo) / span } else { 0.0 };
            ((linear * alpha + 1.0).ln() / denom).clamp(0.0, 1.0)
        })
        .collect();
    Ok(SdfField {
        raw: field.raw.clone(),
        normalized: Some(normalized),
        alpha: Some(alpha),
    })
}

/// Computes and normalizes in one step.
pub fn shape_diameter(mesh: &TriMesh, bvh: &Bvh, params: &SdfParams) -> Result<SdfField> {
    normalize_sdf(&compute_sdf(mesh, bvh, params)?, params.alpha)
}
