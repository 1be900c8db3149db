//! Mesh and labeling file formats.

mod glb;
mod labels;
mod obj;
mod off;
mod ply;

use std::fs;
use std::path::Path;

use crate::error::{Error, IoContext, Result};
use crate::mesh::{Point, TriMesh};

pub use labels::{
    label_colors, load_labels, palette_color, read_seg, save_colored_glb, save_colored_ply,
    save_labels_json, LabelsDocument,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
    Ply,
    Glb,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::Ply),
            "glb" => Some(MeshFormat::Glb),
            _ => None,
        }
    }
}

/// Raw polygon soup as read from a file, before triangulation and welding.
#[derive(Debug, Default)]
pub(crate) struct PolygonSoup {
    pub vertices: Vec<Point>,
    pub polygons: Vec<Vec<usize>>,
}

/// Loads a mesh, inferring the format from the extension when `format` is
/// `None`.
pub fn load_mesh(path: &Path, format: Option<MeshFormat>) -> Result<TriMesh> {
    let format = format
        .or_else(|| MeshFormat::from_path(path))
        .ok_or_else(|| Error::parse(path, "cannot infer mesh format from extension"))?;
    let bytes = fs::read(path).at(path)?;
    let soup = match format {
        MeshFormat::Off => off::parse(&text(path, &bytes)?),
        MeshFormat::Obj => obj::parse(&text(path, &bytes)?),
        MeshFormat::Ply => ply::parse(&bytes),
        MeshFormat::Glb => glb::parse(&bytes),
    }
    .map_err(|msg| Error::parse(path, msg))?;
    if soup.polygons.is_empty() {
        return Err(Error::EmptyMesh);
    }
    TriMesh::from_polygons(soup.vertices, &soup.polygons).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path, message),
        e => e,
    })
}

fn text<'a>(path: &Path, bytes: &'a [u8]) -> Result<&'a str> {
    std::str::from_utf8(bytes).map_err(|_| Error::parse(path, "file is not valid UTF-8"))
}

/// Writes a mesh in one of the lossless text formats (OFF, OBJ, ASCII PLY)
/// or as GLB.
pub fn save_mesh(mesh: &TriMesh, path: &Path, format: Option<MeshFormat>) -> Result<()> {
    let format = format
        .or_else(|| MeshFormat::from_path(path))
        .ok_or_else(|| Error::parse(path, "cannot infer mesh format from extension"))?;
    let bytes = match format {
        MeshFormat::Off => off::write(mesh).into_bytes(),
        MeshFormat::Obj => obj::write(mesh).into_bytes(),
        MeshFormat::Ply => ply::write_ascii(mesh, None).into_bytes(),
        MeshFormat::Glb => glb::write(mesh, None),
    };
    fs::write(path, bytes).at(path)
}

/// Shortest decimal that round-trips the `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
