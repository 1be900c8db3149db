//! Minimal binary glTF 2.0 reader/writer: triangle primitives only.

use nalgebra::{Matrix4, Quaternion, UnitQuaternion, Vector3};
use serde_json::{json, Value};

use super::PolygonSoup;
use crate::mesh::{Point, TriMesh};

const MAGIC: u32 = 0x4654_6C67;
const CHUNK_JSON: u32 = 0x4E4F_534A;
const CHUNK_BIN: u32 = 0x004E_4942;

const FLOAT: u64 = 5126;
const UNSIGNED_INT: u64 = 5125;
const UNSIGNED_SHORT: u64 = 5123;
const UNSIGNED_BYTE: u64 = 5121;

fn u32_at(b: &[u8], at: usize) -> Result<u32, String> {
    b.get(at..at + 4)
        .map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
        .ok_or_else(|| "truncated GLB".to_string())
}

pub(crate) fn parse(bytes: &[u8]) -> Result<PolygonSoup, String> {
    if u32_at(bytes, 0)? != MAGIC {
        return Err("not a GLB file".into());
    }
    if u32_at(bytes, 4)? != 2 {
        return Err("only glTF 2.0 is supported".into());
    }
    let mut json: Option<Value> = None;
    let mut bin: &[u8] = &[];
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let len = u32_at(bytes, at)? as usize;
        let kind = u32_at(bytes, at + 4)?;
        let data = bytes.get(at + 8..at + 8 + len).ok_or("truncated chunk")?;
        match kind {
            CHUNK_JSON => json = Some(serde_json::from_slice(data).map_err(|e| e.to_string())?),
            CHUNK_BIN => bin = data,
            _ => {}
        }
        at += 8 + len;
    }
    let doc = json.ok_or("missing JSON chunk")?;
    let mut soup = PolygonSoup::default();

    let meshes = doc["meshes"].as_array().cloned().unwrap_or_default();
    let mut visit: Vec<(usize, Matrix4<f64>)> = Vec::new();
    let scene_nodes = doc["scenes"]
        .get(doc["scene"].as_u64().unwrap_or(0) as usize)
        .and_then(|s| s["nodes"].as_array())
        .cloned();
    match scene_nodes {
        Some(roots) if doc["nodes"].is_array() => {
            let mut stack: Vec<(u64, Matrix4<f64>)> = roots
                .iter()
                .filter_map(Value::as_u64)
                .map(|n| (n, Matrix4::identity()))
                .collect();
            let mut guard = 0;
            while let Some((n, parent)) = stack.pop() {
                guard += 1;
                if guard > 100_000 {
                    return Err("node hierarchy too deep or cyclic".into());
                }
                let node = &doc["nodes"][n as usize];
                let m = parent * node_matrix(node);
                if let Some(mesh) = node["mesh"].as_u64() {
                    visit.push((mesh as usize, m));
                }
                for c in node["children"].as_array().into_iter().flatten() {
                    if let Some(c) = c.as_u64() {
                        stack.push((c, m));
                    }
                }
            }
        }
        _ => visit.extend((0..meshes.len()).map(|i| (i, Matrix4::identity()))),
    }
    visit.sort_by_key(|(i, _)| *i);

    for (mi, xf) in visit {
        let prims = meshes
            .get(mi)
            .and_then(|m| m["primitives"].as_array())
            .ok_or_else(|| format!("mesh {mi} missing"))?;
        for prim in prims {
            if prim["mode"].as_u64().unwrap_or(4) != 4 {
                continue;
            }
            let pos_acc = prim["attributes"]["POSITION"]
                .as_u64()
                .ok_or("primitive without POSITION")?;
            let positions = read_accessor(&doc, bin, pos_acc as usize)?;
            let base = soup.vertices.len();
            for p in positions.chunks_exact(3) {
                let v = xf.transform_point(&nalgebra::Point3::new(p[0], p[1], p[2]));
                soup.vertices.push(Point::new(v.x, v.y, v.z));
            }
            let count = positions.len() / 3;
            let indices: Vec<usize> = match prim["indices"].as_u64() {
                Some(acc) => read_accessor(&doc, bin, acc as usize)?
                    .into_iter()
                    .map(|x| x as usize)
                    .collect(),
                None => (0..count).collect(),
            };
            if let Some(&bad) = indices.iter().find(|&&i| i >= count) {
                return Err(format!("index {bad} out of range"));
            }
            for t in indices.chunks_exact(3) {
                soup.polygons.push(t.iter().map(|&i| base + i).collect());
            }
        }
    }
    Ok(soup)
}

fn node_matrix(node: &Value) -> Matrix4<f64> {
    if let Some(m) = node["matrix"].as_array() {
        let v: Vec<f64> = m.iter().filter_map(Value::as_f64).collect();
        if v.len() == 16 {
            return Matrix4::from_column_slice(&v);
        }
    }
    let vec = |key: &str, default: &[f64]| -> Vec<f64> {
        node[key]
            .as_array()
            .map(|a| a.iter().filter_map(Value::as_f64).collect())
            .unwrap_or_else(|| default.to_vec())
    };
    let t = vec("translation", &[0.0, 0.0, 0.0]);
    let r = vec("rotation", &[0.0, 0.0, 0.0, 1.0]);
    let s = vec("scale", &[1.0, 1.0, 1.0]);
    let rot = UnitQuaternion::from_quaternion(Quaternion::new(r[3], r[0], r[1], r[2]));
    Matrix4::new_translation(&Vector3::new(t[0], t[1], t[2]))
        * rot.to_homogeneous()
        * Matrix4::new_nonuniform_scaling(&Vector3::new(s[0], s[1], s[2]))
}

fn read_accessor(doc: &Value, bin: &[u8], index: usize) -> Result<Vec<f64>, String> {
    let acc = &doc["accessors"][index];
    let count = acc["count"].as_u64().ok_or("accessor without count")? as usize;
    let comps = match acc["type"].as_str() {
        Some("SCALAR") => 1,
        Some("VEC2") => 2,
        Some("VEC3") => 3,
        Some("VEC4") => 4,
        other => return Err(format!("unsupported accessor type {other:?}")),
    };
    let ctype = acc["componentType"].as_u64().ok_or("accessor without componentType")?;
    let size = match ctype {
        FLOAT | UNSIGNED_INT => 4,
        UNSIGNED_SHORT => 2,
        UNSIGNED_BYTE => 1,
        other => return Err(format!("unsupported componentType {other}")),
    };
    let view = &doc["bufferViews"][acc["bufferView"].as_u64().ok_or("sparse accessors unsupported")? as usize];
    if view["buffer"].as_u64().unwrap_or(0) != 0 {
        return Err("only the embedded buffer is supported".into());
    }
    let start = view["byteOffset"].as_u64().unwrap_or(0) as usize + acc["byteOffset"].as_u64().unwrap_or(0) as usize;
    let stride = view["byteStride"].as_u64().map(|s| s as usize).unwrap_or(size * comps);
    let mut out = Vec::with_capacity(count * comps);
    for i in 0..count {
        for c in 0..comps {
            let at = start + i * stride + c * size;
            let b = bin.get(at..at + size).ok_or("accessor reads past buffer")?;
            out.push(match ctype {
                FLOAT => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
                UNSIGNED_INT => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
                UNSIGNED_SHORT => u16::from_le_bytes([b[0], b[1]]) as f64,
                _ => b[0] as f64,
            });
        }
    }
    Ok(out)
}

/// Serializes the mesh. With `face_colors` the geometry is un-indexed so each
/// face carries its own flat vertex color.
pub(crate) fn write(mesh: &TriMesh, face_colors: Option<&[[u8; 3]]>) -> Vec<u8> {
    let (positions, colors, indices): (Vec<[f32; 3]>, Vec<[f32; 3]>, Vec<u32>) = match face_colors {
        Some(fc) => {
            let mut p = Vec::with_capacity(3 * mesh.num_faces());
            let mut c = Vec::with_capacity(3 * mesh.num_faces());
            for (f, col) in mesh.faces().iter().zip(fc) {
                let rgb = col.map(|x| srgb_to_linear(x as f32 / 255.0));
                for &v in f {
                    let q = mesh.vertices()[v];
                    p.push([q.x as f32, q.y as f32, q.z as f32]);
                    c.push(rgb);
                }
            }
            let idx = (0..p.len() as u32).collect();
            (p, c, idx)
        }
        None => (
            mesh.vertices().iter().map(|q| [q.x as f32, q.y as f32, q.z as f32]).collect(),
            Vec::new(),
            mesh.faces().iter().flatten().map(|&i| i as u32).collect(),
        ),
    };

    let mut bin: Vec<u8> = Vec::new();
    let pos_off = bin.len();
    for p in &positions {
        for x in p {
            bin.extend(x.to_le_bytes());
        }
    }
    let col_off = bin.len();
    for c in &colors {
        for x in c {
            bin.extend(x.to_le_bytes());
        }
    }
    let idx_off = bin.len();
    for i in &indices {
        bin.extend(i.to_le_bytes());
    }
    let total = bin.len();

    let (mut lo, mut hi) = ([f32::INFINITY; 3], [f32::NEG_INFINITY; 3]);
    for p in &positions {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut views = vec![json!({"buffer": 0, "byteOffset": pos_off, "byteLength": col_off - pos_off, "target": 34962})];
    let mut accessors = vec![json!({"bufferView": 0, "componentType": FLOAT, "count": positions.len(), "type": "VEC3", "min": lo, "max": hi})];
    let mut attributes = json!({"POSITION": 0});
    if !colors.is_empty() {
        views.push(json!({"buffer": 0, "byteOffset": col_off, "byteLength": idx_off - col_off, "target": 34962}));
        accessors.push(json!({"bufferView": 1, "componentType": FLOAT, "count": colors.len(), "type": "VEC3"}));
        attributes["COLOR_0"] = json!(1);
    }
    views.push(json!({"buffer": 0, "byteOffset": idx_off, "byteLength": total - idx_off, "target": 34963}));
    accessors.push(json!({"bufferView": views.len() - 1, "componentType": UNSIGNED_INT, "count": indices.len(), "type": "SCALAR"}));
    let doc = json!({
        "asset": {"version": "2.0", "generator": "meshseg"},
        "scene": 0,
        "scenes": [{"nodes": [0]}],
        "nodes": [{"mesh": 0}],
        "meshes": [{"primitives": [{"attributes": attributes, "indices": accessors.len() - 1, "mode": 4}]}],
        "accessors": accessors,
        "bufferViews": views,
        "buffers": [{"byteLength": total}],
    });

    let mut json_bytes = serde_json::to_vec(&doc).expect("json serializes");
    while json_bytes.len() % 4 != 0 {
        json_bytes.push(b' ');
    }
    while bin.len() % 4 != 0 {
        bin.push(0);
    }
    let length = 12 + 8 + json_bytes.len() + 8 + bin.len();
    let mut out = Vec::with_capacity(length);
    out.extend(MAGIC.to_le_bytes());
    out.extend(2u32.to_le_bytes());
    out.extend((length as u32).to_le_bytes());
    out.extend((json_bytes.len() as u32).to_le_bytes());
    out.extend(CHUNK_JSON.to_le_bytes());
    out.extend(json_bytes);
    out.extend((bin.len() as u32).to_le_bytes());
    out.extend(CHUNK_BIN.to_le_bytes());
    out.extend(bin);
    out
}

fn srgb_to_linear(c: f32) -> f32 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn colored_export_is_readable() {
        let mesh = shapes::cube(1.0);
        let colors = vec![[255u8, 0, 0]; 12];
        let soup = parse(&write(&mesh, Some(&colors))).unwrap();
        assert_eq!(soup.polygons.len(), 12);
        assert_eq!(soup.vertices.len(), 36);
        let back = TriMesh::from_polygons(soup.vertices, &soup.polygons).unwrap();
        assert_eq!(back.vertices().len(), 8);
    }

    #[test]
    fn node_transforms_are_applied() {
        let mesh = shapes::quad(2.0);
        let bytes = write(&mesh, None);
        // Patch the node to carry a translation.
        let json_len = u32_at(&bytes, 12).unwrap() as usize;
        let mut doc: Value = serde_json::from_slice(&bytes[20..20 + json_len]).unwrap();
        doc["nodes"][0]["translation"] = json!([0.0, 0.0, 5.0]);
        let mut json_bytes = serde_json::to_vec(&doc).unwrap();
        while json_bytes.len() % 4 != 0 {
            json_bytes.push(b' ');
        }
        let bin = &bytes[20 + json_len..];
        let mut out = Vec::new();
        out.extend(MAGIC.to_le_bytes());
        out.extend(2u32.to_le_bytes());
        out.extend(((12 + 8 + json_bytes.len() + bin.len()) as u32).to_le_bytes());
        out.extend((json_bytes.len() as u32).to_le_bytes());
        out.extend(CHUNK_JSON.to_le_bytes());
        out.extend(json_bytes);
        out.extend(bin);
        let soup = parse(&out).unwrap();
        assert!(soup.vertices.iter().all(|v| (v.z - 5.0).abs() < 1e-6));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse(b"not a glb at all").is_err());
    }
}
