use std::fmt::Write;

use super::{fmt_f64, PolygonSoup};
use crate::mesh::{Point, TriMesh};

pub(crate) fn parse(src: &str) -> Result<PolygonSoup, String> {
    let mut lines = src
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());

    let first = lines.next().ok_or("empty file")?;
    let mut header = first.split_whitespace();
    let keyword = header.next().unwrap_or("");
    let counts: Vec<&str> = if keyword.ends_with("OFF") {
        let rest: Vec<&str> = header.collect();
        if rest.is_empty() {
            lines.next().ok_or("missing counts")?.split_whitespace().collect()
        } else {
            rest
        }
    } else {
        first.split_whitespace().collect()
    };
    let count = |i: usize, what: &str| -> Result<usize, String> {
        counts
            .get(i)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format!("bad {what} count"))
    };
    let (nv, nf) = (count(0, "vertex")?, count(1, "face")?);

    let mut soup = PolygonSoup::default();
    soup.vertices.reserve(nv);
    for i in 0..nv {
        let line = lines.next().ok_or_else(|| format!("missing vertex {i}"))?;
        let xyz = line
            .split_whitespace()
            .take(3)
            .map(|t| t.parse::<f64>().map_err(|_| format!("vertex {i}: bad coordinate {t:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        if xyz.len() != 3 {
            return Err(format!("vertex {i}: expected 3 coordinates"));
        }
        soup.vertices.push(Point::new(xyz[0], xyz[1], xyz[2]));
    }
    soup.polygons.reserve(nf);
    for i in 0..nf {
        let line = lines.next().ok_or_else(|| format!("missing face {i}"))?;
        let mut it = line.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format!("face {i}: bad vertex count"))?;
        // Anything after the indices is an optional color.
        let poly = it
            .take(n)
            .map(|t| t.parse::<usize>().map_err(|_| format!("face {i}: bad index {t:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        if poly.len() != n {
            return Err(format!("face {i}: expected {n} indices"));
        }
        if let Some(&bad) = poly.iter().find(|&&v| v >= nv) {
            return Err(format!("face {i}: index {bad} out of range"));
        }
        soup.polygons.push(poly);
    }
    Ok(soup)
}

pub(crate) fn write(mesh: &TriMesh) -> String {
    let mut s = String::new();
    writeln!(s, "OFF\n{} {} 0", mesh.vertices().len(), mesh.num_faces()).unwrap();
    for v in mesh.vertices() {
        writeln!(s, "{} {} {}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z)).unwrap();
    }
    for f in mesh.faces() {
        writeln!(s, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
    }
    s
}
