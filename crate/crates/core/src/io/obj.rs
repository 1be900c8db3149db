use std::fmt::Write;

use super::{fmt_f64, PolygonSoup};
use crate::mesh::{Point, TriMesh};

pub(crate) fn parse(src: &str) -> Result<PolygonSoup, String> {
    let mut soup = PolygonSoup::default();
    for (lineno, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let xyz = it
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| format!("line {}: bad vertex", lineno + 1))?;
                if xyz.len() != 3 {
                    return Err(format!("line {}: vertex needs 3 coordinates", lineno + 1));
                }
                soup.vertices.push(Point::new(xyz[0], xyz[1], xyz[2]));
            }
            Some("f") => {
                let nv = soup.vertices.len() as i64;
                let poly = it
                    .map(|t| {
                        let idx: i64 = t
                            .split('/')
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| format!("line {}: bad face index {t:?}", lineno + 1))?;
                        let resolved = if idx < 0 { nv + idx } else { idx - 1 };
                        if resolved < 0 || resolved >= nv {
                            return Err(format!("line {}: face index {idx} out of range", lineno + 1));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if poly.len() < 3 {
                    return Err(format!("line {}: face needs at least 3 vertices", lineno + 1));
                }
                soup.polygons.push(poly);
            }
            _ => {}
        }
    }
    Ok(soup)
}

pub(crate) fn write(mesh: &TriMesh) -> String {
    let mut s = String::new();
    for v in mesh.vertices() {
        writeln!(s, "v {} {} {}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z)).unwrap();
    }
    for f in mesh.faces() {
        writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    s
}
