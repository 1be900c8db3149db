//! Indexed triangle meshes, per-face labelings and the topological queries
//! shared by the rest of the crate.

use std::collections::{HashMap, VecDeque};

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

pub type Point = Point3<f64>;
pub type Vector = Vector3<f64>;

/// Vertices closer than this are merged at construction time.
pub const WELD_TOLERANCE: f64 = 1e-9;

/// An interior edge shared by two faces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceEdge {
    pub faces: [usize; 2],
    pub vertices: [usize; 2],
}

/// Immutable indexed triangle mesh with precomputed normals, areas and
/// edge adjacency.
#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    face_normals: Vec<Vector>,
    face_areas: Vec<f64>,
    face_centroids: Vec<Point>,
    face_adjacency: Vec<Vec<usize>>,
    edges: Vec<FaceEdge>,
    centroid: Point,
    bounding_radius: f64,
    source_face: Vec<usize>,
    source_face_count: usize,
}

impl TriMesh {
    /// Builds a mesh from triangles. Equivalent to [`TriMesh::from_polygons`]
    /// with three-vertex polygons.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let polys: Vec<Vec<usize>> = triangles.into_iter().map(|t| t.to_vec()).collect();
        Self::from_polygons(vertices, &polys)
    }

    /// Builds a mesh from arbitrary polygons.
    ///
    /// Polygons are fan-triangulated, vertices within [`WELD_TOLERANCE`] are
    /// welded and zero-area triangles are dropped with a warning. The index of
    /// the polygon each triangle came from is kept (see [`TriMesh::source_face`]).
    pub fn from_polygons(vertices: Vec<Point>, polygons: &[Vec<usize>]) -> Result<Self> {
        let (vertices, remap) = weld(vertices, WELD_TOLERANCE);
        let mut faces = Vec::with_capacity(polygons.len());
        let mut source_face = Vec::with_capacity(polygons.len());
        let mut dropped = 0usize;
        for (pi, poly) in polygons.iter().enumerate() {
            if poly.len() < 3 {
                dropped += 1;
                continue;
            }
            if let Some(&bad) = poly.iter().find(|&&v| v >= remap.len()) {
                return Err(Error::parse(
                    "<mesh>",
                    format!("polygon {pi} references vertex {bad} but only {} exist", remap.len()),
                ));
            }
            for k in 1..poly.len() - 1 {
                let tri = [remap[poly[0]], remap[poly[k]], remap[poly[k + 1]]];
                if is_degenerate(&vertices, tri) {
                    dropped += 1;
                    continue;
                }
                faces.push(tri);
                source_face.push(pi);
            }
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} degenerate faces");
        }
        if faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        Ok(Self::assemble(vertices, faces, source_face, polygons.len()))
    }

    fn assemble(
        vertices: Vec<Point>,
        faces: Vec<[usize; 3]>,
        source_face: Vec<usize>,
        source_face_count: usize,
    ) -> Self {
        let mut face_normals = Vec::with_capacity(faces.len());
        let mut face_areas = Vec::with_capacity(faces.len());
        let mut face_centroids = Vec::with_capacity(faces.len());
        for f in &faces {
            let (a, b, c) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
            let cross = (b - a).cross(&(c - a));
            let len = cross.norm();
            face_normals.push(cross / len);
            face_areas.push(0.5 * len);
            face_centroids.push(Point::from((a.coords + b.coords + c.coords) / 3.0));
        }

        let mut edge_faces: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                edge_faces.entry((u.min(v), u.max(v))).or_default().push(fi);
            }
        }
        let mut edges = Vec::new();
        let mut face_adjacency = vec![Vec::new(); faces.len()];
        for (&(u, v), fs) in &edge_faces {
            for i in 0..fs.len() {
                for j in i + 1..fs.len() {
                    let (f, g) = (fs[i].min(fs[j]), fs[i].max(fs[j]));
                    if f == g {
                        continue;
                    }
                    face_adjacency[f].push(g);
                    face_adjacency[g].push(f);
                    edges.push(FaceEdge {
                        faces: [f, g],
                        vertices: [u, v],
                    });
                }
            }
        }
        for adj in &mut face_adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        edges.sort_unstable_by_key(|e| (e.faces, e.vertices));
        edges.dedup_by_key(|e| e.faces);

        let total_area: f64 = face_areas.iter().sum();
        let centroid = Point::from(
            face_centroids
                .iter()
                .zip(&face_areas)
                .fold(Vector::zeros(), |acc, (c, a)| acc + c.coords * *a)
                / total_area,
        );
        let mut used = vec![false; vertices.len()];
        for f in &faces {
            for &v in f {
                used[v] = true;
            }
        }
        let bounding_radius = vertices
            .iter()
            .zip(&used)
            .filter(|(_, &u)| u)
            .map(|(v, _)| (v - centroid).norm())
            .fold(0.0, f64::max);

        TriMesh {
            vertices,
            faces,
            face_normals,
            face_areas,
            face_centroids,
            face_adjacency,
            edges,
            centroid,
            bounding_radius,
            source_face,
            source_face_count,
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn face_normals(&self) -> &[Vector] {
        &self.face_normals
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn face_centroids(&self) -> &[Point] {
        &self.face_centroids
    }

    /// Edge-adjacent faces of `f`, sorted ascending.
    pub fn neighbors(&self, f: usize) -> &[usize] {
        &self.face_adjacency[f]
    }

    pub fn face_adjacency(&self) -> &[Vec<usize>] {
        &self.face_adjacency
    }

    /// Interior edges, one per adjacent face pair, sorted by face pair.
    pub fn edges(&self) -> &[FaceEdge] {
        &self.edges
    }

    /// Area-weighted centroid of the surface.
    pub fn centroid(&self) -> Point {
        self.centroid
    }

    /// Largest distance from [`TriMesh::centroid`] to a vertex.
    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn surface_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    /// Polygon index in the source file that produced triangle `f`.
    pub fn source_face(&self, f: usize) -> usize {
        self.source_face[f]
    }

    /// Number of polygons in the source before triangulation and cleanup.
    pub fn source_face_count(&self) -> usize {
        self.source_face_count
    }

    /// Maps a per-polygon labeling of the source file onto the triangles.
    /// Labelings that already match the triangle count are passed through.
    pub fn labels_from_source(&self, labels: &[u32]) -> Result<FaceLabeling> {
        if labels.len() == self.num_faces() {
            return Ok(FaceLabeling::new(labels.to_vec()));
        }
        if labels.len() == self.source_face_count {
            return Ok(FaceLabeling::new(
                self.source_face.iter().map(|&p| labels[p]).collect(),
            ));
        }
        Err(Error::LengthMismatch {
            expected: self.num_faces(),
            got: labels.len(),
        })
    }

    /// Uniformly scaled copy about the origin.
    pub fn scaled(&self, s: f64) -> TriMesh {
        self.transformed(|p| Point::from(p.coords * s))
    }

    pub fn translated(&self, t: Vector) -> TriMesh {
        self.transformed(|p| p + t)
    }

    fn transformed(&self, map: impl Fn(&Point) -> Point) -> TriMesh {
        let vertices = self.vertices.iter().map(map).collect();
        Self::assemble(
            vertices,
            self.faces.clone(),
            self.source_face.clone(),
            self.source_face_count,
        )
    }

    /// Concatenates two meshes without welding across them.
    pub fn merged(&self, other: &TriMesh) -> TriMesh {
        let offset = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(
            other
                .faces
                .iter()
                .map(|f| [f[0] + offset, f[1] + offset, f[2] + offset]),
        );
        let mut source_face = self.source_face.clone();
        source_face.extend(other.source_face.iter().map(|&s| s + self.source_face_count));
        Self::assemble(
            vertices,
            faces,
            source_face,
            self.source_face_count + other.source_face_count,
        )
    }

    pub(crate) fn check_labels(&self, labels: &FaceLabeling) -> Result<()> {
        if labels.len() != self.num_faces() {
            return Err(Error::LengthMismatch {
                expected: self.num_faces(),
                got: labels.len(),
            });
        }
        Ok(())
    }
}

fn is_degenerate(vertices: &[Point], tri: [usize; 3]) -> bool {
    if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
        return true;
    }
    let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    let (e1, e2) = (b - a, c - a);
    let cross = e1.cross(&e2).norm();
    !(cross > f64::EPSILON * e1.norm() * e2.norm()) || !cross.is_finite()
}

/// Merges vertices within `tol`, keeping first occurrences. Returns the new
/// vertex list and old-to-new index map.
fn weld(vertices: Vec<Point>, tol: f64) -> (Vec<Point>, Vec<usize>) {
    let cell = |p: &Point| {
        (
            (p.x / tol).floor() as i64,
            (p.y / tol).floor() as i64,
            (p.z / tol).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::with_capacity(vertices.len());
    let mut kept: Vec<Point> = Vec::with_capacity(vertices.len());
    let mut remap = Vec::with_capacity(vertices.len());
    'outer: for p in vertices {
        let (cx, cy, cz) = cell(&p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &k in bucket {
                            if (kept[k] - p).norm() <= tol {
                                remap.push(k);
                                continue 'outer;
                            }
                        }
                    }
                }
            }
        }
        grid.entry((cx, cy, cz)).or_default().push(kept.len());
        remap.push(kept.len());
        kept.push(p);
    }
    (kept, remap)
}

/// Per-face part labels. [`FaceLabeling::UNLABELED`] marks faces without a part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaceLabeling {
    labels: Vec<u32>,
}

impl FaceLabeling {
    pub const UNLABELED: u32 = u32::MAX;

    pub fn new(labels: Vec<u32>) -> Self {
        FaceLabeling { labels }
    }

    pub fn unlabeled(num_faces: usize) -> Self {
        FaceLabeling {
            labels: vec![Self::UNLABELED; num_faces],
        }
    }

    pub fn constant(num_faces: usize, label: u32) -> Self {
        FaceLabeling {
            labels: vec![label; num_faces],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u32] {
        &mut self.labels
    }

    pub fn into_labels(self) -> Vec<u32> {
        self.labels
    }

    pub fn get(&self, f: usize) -> u32 {
        self.labels[f]
    }

    pub fn is_labeled(&self, f: usize) -> bool {
        self.labels[f] != Self::UNLABELED
    }

    /// True when no face carries the sentinel.
    pub fn is_complete(&self) -> bool {
        self.labels.iter().all(|&l| l != Self::UNLABELED)
    }

    /// Number of distinct non-sentinel labels.
    pub fn num_labels(&self) -> usize {
        let mut seen: Vec<u32> = self
            .labels
            .iter()
            .copied()
            .filter(|&l| l != Self::UNLABELED)
            .collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// One past the largest label in use (0 when nothing is labeled).
    pub fn label_bound(&self) -> u32 {
        self.labels
            .iter()
            .filter(|&&l| l != Self::UNLABELED)
            .map(|&l| l + 1)
            .max()
            .unwrap_or(0)
    }

    /// True when labels are exactly `0..num_labels` and nothing is unlabeled.
    pub fn is_dense(&self) -> bool {
        self.is_complete() && self.label_bound() as usize == self.num_labels()
    }

    /// Renumbers labels to `0..K` in order of first appearance over faces.
    pub fn densified(&self) -> FaceLabeling {
        let mut map: HashMap<u32, u32> = HashMap::new();
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if l == Self::UNLABELED {
                    l
                } else {
                    let next = map.len() as u32;
                    *map.entry(l).or_insert(next)
                }
            })
            .collect();
        FaceLabeling { labels }
    }
}

impl From<Vec<u32>> for FaceLabeling {
    fn from(labels: Vec<u32>) -> Self {
        FaceLabeling::new(labels)
    }
}

/// Splits every label into its edge-connected pieces.
///
/// Output labels are dense and numbered in order of each component's lowest
/// face index. Unlabeled faces pass through unchanged.
pub fn connected_components(mesh: &TriMesh, labels: &FaceLabeling) -> Result<FaceLabeling> {
    mesh.check_labels(labels)?;
    let n = mesh.num_faces();
    let mut out = vec![FaceLabeling::UNLABELED; n];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        let l = labels.get(seed);
        if l == FaceLabeling::UNLABELED || out[seed] != FaceLabeling::UNLABELED {
            continue;
        }
        out[seed] = next;
        queue.push_back(seed);
        while let Some(f) = queue.pop_front() {
            for &g in mesh.neighbors(f) {
                if labels.get(g) == l && out[g] == FaceLabeling::UNLABELED {
                    out[g] = next;
                    queue.push_back(g);
                }
            }
        }
        next += 1;
    }
    Ok(FaceLabeling::new(out))
}

/// Angle between two adjacent faces' normals, with edge convexity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dihedral {
    /// In `[0, π]`; 0 for coplanar faces with the same orientation.
    pub angle: f64,
    /// True when the surface bends away from the normals across the edge.
    pub convex: bool,
}

pub fn dihedral_angle(mesh: &TriMesh, f: usize, g: usize) -> Result<Dihedral> {
    if f == g || mesh.neighbors(f).binary_search(&g).is_err() {
        return Err(Error::NotAdjacent(f, g));
    }
    Ok(dihedral_unchecked(mesh, f, g))
}

pub(crate) fn dihedral_unchecked(mesh: &TriMesh, f: usize, g: usize) -> Dihedral {
    let (nf, ng) = (mesh.face_normals[f], mesh.face_normals[g]);
    let angle = nf.dot(&ng).clamp(-1.0, 1.0).acos();
    let towards_g = mesh.face_centroids[g] - mesh.face_centroids[f];
    let towards_f = -towards_g;
    // Both faces see the other behind their own plane on a convex edge.
    let convex = towards_g.dot(&nf) + towards_f.dot(&ng) <= 0.0;
    Dihedral { angle, convex }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quad_strip(n: usize) -> TriMesh {
        let mut v = Vec::new();
        for i in 0..=n {
            v.push(Point::new(i as f64, 0.0, 0.0));
            v.push(Point::new(i as f64, 1.0, 0.0));
        }
        let mut f = Vec::new();
        for i in 0..n {
            let (a, b, c, d) = (2 * i, 2 * i + 2, 2 * i + 3, 2 * i + 1);
            f.push([a, b, c]);
            f.push([a, c, d]);
        }
        TriMesh::new(v, f).unwrap()
    }

    #[test]
    fn single_triangle_has_no_adjacency() {
        let m = TriMesh::new(
            vec![Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(m.num_faces(), 1);
        assert!(m.neighbors(0).is_empty());
        assert!((m.face_normals()[0] - Vector::z()).norm() < 1e-12);
    }

    #[test]
    fn cube_faces_have_three_neighbors() {
        let m = shapes::cube(1.0);
        assert_eq!(m.num_faces(), 12);
        for f in 0..12 {
            assert_eq!(m.neighbors(f).len(), 3);
        }
        assert!((m.surface_area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn welding_joins_duplicated_seam_vertices() {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(1.0 + 1e-12, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
        ];
        let m = TriMesh::new(v, vec![[0, 1, 2], [3, 5, 4]]).unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.neighbors(0), &[1]);
    }

    #[test]
    fn degenerate_faces_are_dropped_and_empty_meshes_rejected() {
        let v = vec![Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(2.0, 0.0, 0.0)];
        assert!(matches!(TriMesh::new(v.clone(), vec![[0, 1, 2]]), Err(Error::EmptyMesh)));
        let mut v2 = v;
        v2.push(Point::new(0.0, 1.0, 0.0));
        let m = TriMesh::new(v2, vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        assert_eq!(m.num_faces(), 1);
        assert_eq!(m.source_face(0), 1);
    }

    #[test]
    fn adjacency_is_symmetric() {
        let m = shapes::icosphere(2);
        for f in 0..m.num_faces() {
            for &g in m.neighbors(f) {
                assert!(m.neighbors(g).contains(&f));
            }
        }
    }

    #[test]
    fn components_identity_and_disjoint_parts() {
        let cube = shapes::cube(1.0);
        let l = FaceLabeling::constant(12, 0);
        assert_eq!(connected_components(&cube, &l).unwrap(), l);

        let two = cube.merged(&cube.translated(Vector::new(3.0, 0.0, 0.0)));
        let cc = connected_components(&two, &FaceLabeling::constant(24, 0)).unwrap();
        assert_eq!(cc.num_labels(), 2);
        assert!(cc.labels()[..12].iter().all(|&l| l == 0));
        assert!(cc.labels()[12..].iter().all(|&l| l == 1));
    }

    #[test]
    fn components_keep_unlabeled_and_reject_bad_length() {
        let strip = quad_strip(3);
        // Faces chain as 1-0-3-2-5-4 along the strip.
        let u = FaceLabeling::UNLABELED;
        let l = FaceLabeling::new(vec![0, 0, 0, u, 0, 0]);
        let cc = connected_components(&strip, &l).unwrap();
        assert_eq!(cc.labels(), &[0, 0, 1, u, 1, 1]);
        assert!(matches!(
            connected_components(&strip, &FaceLabeling::constant(2, 0)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    /// Independent flood fill: grow each (label, seed) set by repeated edge scans.
    fn flood_oracle(mesh: &TriMesh, labels: &[u32]) -> Vec<Vec<usize>> {
        let n = labels.len();
        let mut assigned = vec![false; n];
        let mut sets = Vec::new();
        for seed in 0..n {
            if assigned[seed] {
                continue;
            }
            let mut member = vec![false; n];
            member[seed] = true;
            loop {
                let mut grew = false;
                for e in mesh.edges() {
                    let [a, b] = e.faces;
                    if labels[a] == labels[b] && member[a] != member[b] {
                        member[a] = true;
                        member[b] = true;
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
            }
            let set: Vec<usize> = (0..n).filter(|&f| member[f]).collect();
            for &f in &set {
                assigned[f] = true;
            }
            sets.push(set);
        }
        sets
    }

    #[test]
    fn components_match_flood_fill_oracle() {
        let mesh = quad_strip(50);
        assert_eq!(mesh.num_faces(), 100);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let labels: Vec<u32> = (0..100).map(|_| rng.random_range(0..3)).collect();
            let cc = connected_components(&mesh, &FaceLabeling::new(labels.clone())).unwrap();
            let sets = flood_oracle(&mesh, &labels);
            assert_eq!(cc.num_labels(), sets.len());
            for set in sets {
                let l = cc.get(set[0]);
                assert!(set.iter().all(|&f| cc.get(f) == l));
                assert_eq!(cc.labels().iter().filter(|&&x| x == l).count(), set.len());
            }
            assert_eq!(connected_components(&mesh, &cc).unwrap(), cc);
        }
    }

    #[test]
    fn dihedral_cases() {
        let strip = quad_strip(1);
        let d = dihedral_angle(&strip, 0, 1).unwrap();
        assert!(d.angle.abs() < 1e-12);

        let cube = shapes::cube(1.0);
        let f = 0;
        let g = cube
            .neighbors(f)
            .iter()
            .copied()
            .find(|&g| cube.face_normals()[g].dot(&cube.face_normals()[f]).abs() < 0.5)
            .unwrap();
        let d = dihedral_angle(&cube, f, g).unwrap();
        assert!((d.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(d.convex);

        assert!(matches!(dihedral_angle(&strip, 0, 0), Err(Error::NotAdjacent(0, 0))));
    }

    #[test]
    fn icosahedron_dihedral_matches_analytic_value() {
        // Adjacent icosahedron face normals satisfy n·m = √5/3.
        let ico = shapes::icosphere(0);
        let expected = (5f64.sqrt() / 3.0).acos();
        assert!((expected - 0.7297).abs() < 1e-4);
        for e in ico.edges() {
            let d = dihedral_angle(&ico, e.faces[0], e.faces[1]).unwrap();
            assert!((d.angle - expected).abs() < 1e-9);
            assert!(d.convex);
        }
    }

    #[test]
    fn primitive_surface_areas() {
        let ico = shapes::icosphere(0);
        // Edge length of the unit-circumradius icosahedron.
        let a = 4.0 / (10.0 + 2.0 * 5f64.sqrt()).sqrt();
        let area = 5.0 * 3f64.sqrt() * a * a;
        assert!(((ico.surface_area() - area) / area).abs() < 1e-6);
        assert!((shapes::cube(2.0).surface_area() - 24.0).abs() < 1e-9);
    }

    #[test]
    fn densify_and_source_mapping() {
        let l = FaceLabeling::new(vec![7, 3, 7, FaceLabeling::UNLABELED]);
        assert_eq!(l.densified().labels(), &[0, 1, 0, FaceLabeling::UNLABELED]);
        assert!(!l.is_dense());
        assert!(l.densified().num_labels() == 2);

        let quad = TriMesh::from_polygons(
            vec![
                Point::origin(),
                Point::new(1.0, 0.0, 0.0),
                Point::new(1.0, 1.0, 0.0),
                Point::new(0.0, 1.0, 0.0),
            ],
            &[vec![0, 1, 2, 3]],
        )
        .unwrap();
        assert_eq!(quad.num_faces(), 2);
        assert_eq!(quad.labels_from_source(&[5]).unwrap().labels(), &[5, 5]);
    }
}
