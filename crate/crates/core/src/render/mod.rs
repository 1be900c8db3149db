//! Deterministic ray-cast multiview renderer.
//!
//! Every pixel's primary ray is cast through its centre against a BVH; the
//! nearest hit (front or back face) wins and ties go to the lower face
//! index. Each view yields a normal image, a per-face scalar image, a
//! face-ID buffer and optionally a flat-lit gray image.

pub mod bvh;
pub mod camera;

use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, RgbImage};
use rayon::prelude::*;

use crate::error::{Error, IoContext, Result};
use crate::mesh::TriMesh;

pub use bvh::{brute_force_intersect, Bvh, Hit, Ray};
pub use camera::{icosahedral_directions, icosahedral_poses, CameraPose};

/// Face-ID value for pixels whose ray misses the mesh.
pub const BACKGROUND: u32 = u32::MAX;

/// Per-pixel face indices, row-major with row 0 at the top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceIdBuffer {
    pub width: u32,
    pub height: u32,
    pub ids: Vec<u32>,
}

impl FaceIdBuffer {
    pub fn resolution(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn is_background(&self, pixel: usize) -> bool {
        self.ids[pixel] == BACKGROUND
    }

    /// Silhouette as a boolean raster.
    pub fn foreground(&self) -> Vec<bool> {
        self.ids.iter().map(|&id| id != BACKGROUND).collect()
    }

    /// Little-endian u32 per pixel.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.ids.iter().flat_map(|id| id.to_le_bytes()).collect()
    }

    pub fn from_bytes(width: u32, height: u32, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != 4 * width as usize * height as usize {
            return None;
        }
        let ids = bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Some(FaceIdBuffer { width, height, ids })
    }
}

/// One camera's render bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewRender {
    pub pose: CameraPose,
    /// Camera-facing world normal mapped to `(n + 1) / 2`.
    pub normal_image: Vec<[f32; 3]>,
    pub scalar_image: Vec<f32>,
    /// Flat-shaded gray, present when requested.
    pub matte_image: Option<Vec<f32>>,
    pub face_ids: FaceIdBuffer,
}

/// A mesh with its BVH, ready to render any number of views.
pub struct Renderer<'m> {
    mesh: &'m TriMesh,
    bvh: Bvh,
}

impl<'m> Renderer<'m> {
    pub fn new(mesh: &'m TriMesh) -> Self {
        Renderer {
            mesh,
            bvh: Bvh::build(mesh),
        }
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    /// Renders one view. `face_scalars` must hold one value in `[0, 1]` per
    /// face; pass `None` for an all-black scalar image.
    pub fn render_view(&self, pose: &CameraPose, face_scalars: Option<&[f64]>, with_matte: bool) -> Result<ViewRender> {
        if let Some(s) = face_scalars {
            if s.len() != self.mesh.num_faces() {
                return Err(Error::LengthMismatch {
                    expected: self.mesh.num_faces(),
                    got: s.len(),
                });
            }
        }
        let (w, h) = pose.resolution();
        let rig = pose.rig();
        let light = -pose.forward();
        let normals = self.mesh.face_normals();
        let n = w as usize * h as usize;
        let mut ids = vec![BACKGROUND; n];
        let mut normal_image = vec![[0f32; 3]; n];
        let mut scalar_image = vec![0f32; n];
        let mut matte = vec![0f32; n];

        ids.par_chunks_mut(w as usize)
            .zip(normal_image.par_chunks_mut(w as usize))
            .zip(scalar_image.par_chunks_mut(w as usize))
            .zip(matte.par_chunks_mut(w as usize))
            .enumerate()
            .for_each(|(y, (((id_row, n_row), s_row), m_row))| {
                for x in 0..w as usize {
                    let ray = rig.ray(x as u32, y as u32);
                    let Some(hit) = self.bvh.intersect(&ray, 0.0) else {
                        continue;
                    };
                    id_row[x] = hit.face as u32;
                    let mut nrm = normals[hit.face];
                    if nrm.dot(&ray.dir) > 0.0 {
                        nrm = -nrm;
                    }
                    n_row[x] = [
                        ((nrm.x + 1.0) / 2.0) as f32,
                        ((nrm.y + 1.0) / 2.0) as f32,
                        ((nrm.z + 1.0) / 2.0) as f32,
                    ];
                    s_row[x] = face_scalars.map_or(0.0, |s| s[hit.face] as f32);
                    m_row[x] = (0.1 + 0.9 * nrm.dot(&light).max(0.0)) as f32;
                }
            });

        Ok(ViewRender {
            pose: *pose,
            normal_image,
            scalar_image,
            matte_image: with_matte.then_some(matte),
            face_ids: FaceIdBuffer {
                width: w,
                height: h,
                ids,
            },
        })
    }

    /// Face-ID buffer computed by testing every triangle for every pixel.
    pub fn brute_force_face_ids(&self, pose: &CameraPose) -> FaceIdBuffer {
        let (w, h) = pose.resolution();
        let rig = pose.rig();
        let mut ids = Vec::with_capacity(w as usize * h as usize);
        for y in 0..h {
            for x in 0..w {
                let hit = brute_force_intersect(self.mesh, &rig.ray(x, y), 0.0);
                ids.push(hit.map_or(BACKGROUND, |h| h.face as u32));
            }
        }
        FaceIdBuffer { width: w, height: h, ids }
    }
}

/// Convenience wrapper that builds a one-off BVH.
pub fn render_view(mesh: &TriMesh, pose: &CameraPose, face_scalars: Option<&[f64]>) -> Result<ViewRender> {
    Renderer::new(mesh).render_view(pose, face_scalars, false)
}

fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn view_file(dir: &Path, view: usize, suffix: &str) -> PathBuf {
    dir.join(format!("view_{view:03}_{suffix}"))
}

/// Writes `view_{i:03}_normal.png`, `_scalar.png`, `_faceid.bin`,
/// `_pose.json` and, when present, `_matte.png`.
pub fn write_view(dir: &Path, view: usize, render: &ViewRender) -> Result<()> {
    fs::create_dir_all(dir).at(dir)?;
    let (w, h) = render.pose.resolution();
    let rgb: Vec<u8> = render.normal_image.iter().flat_map(|p| p.map(quantize)).collect();
    RgbImage::from_raw(w, h, rgb)
        .expect("normal image matches resolution")
        .save(view_file(dir, view, "normal.png"))?;
    let gray: Vec<u8> = render.scalar_image.iter().map(|&v| quantize(v)).collect();
    GrayImage::from_raw(w, h, gray)
        .expect("scalar image matches resolution")
        .save(view_file(dir, view, "scalar.png"))?;
    if let Some(m) = &render.matte_image {
        let gray: Vec<u8> = m.iter().map(|&v| quantize(v)).collect();
        GrayImage::from_raw(w, h, gray)
            .expect("matte image matches resolution")
            .save(view_file(dir, view, "matte.png"))?;
    }
    let ids = view_file(dir, view, "faceid.bin");
    fs::write(&ids, render.face_ids.to_bytes()).at(&ids)?;
    let pose = view_file(dir, view, "pose.json");
    fs::write(&pose, serde_json::to_vec_pretty(&render.pose)?).at(&pose)?;
    Ok(())
}

pub fn read_pose(dir: &Path, view: usize) -> Result<CameraPose> {
    let path = view_file(dir, view, "pose.json");
    let bytes = fs::read(&path).at(&path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

pub fn read_face_ids(dir: &Path, view: usize) -> Result<FaceIdBuffer> {
    let pose = read_pose(dir, view)?;
    let path = view_file(dir, view, "faceid.bin");
    let bytes = fs::read(&path).at(&path)?;
    FaceIdBuffer::from_bytes(pose.width, pose.height, &bytes)
        .ok_or_else(|| Error::parse(&path, "face-ID buffer size does not match the pose resolution"))
}
