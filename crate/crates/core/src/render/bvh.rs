//! Bounding volume hierarchy over mesh triangles for closest-hit ray queries.

use crate::mesh::{Point, TriMesh, Vector};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Copy, Debug)]
pub struct Ray {
    pub origin: Point,
    pub dir: Vector,
}

impl Ray {
    pub fn new(origin: Point, dir: Vector) -> Self {
        Ray { origin, dir }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub face: usize,
    pub t: f64,
}

impl Hit {
    /// Nearest wins; equal distances go to the lower face index.
    #[inline]
    fn beats(&self, other: &Option<Hit>) -> bool {
        match other {
            None => true,
            Some(o) => self.t < o.t || (self.t == o.t && self.face < o.face),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Aabb {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            lo: [f64::INFINITY; 3],
            hi: [f64::NEG_INFINITY; 3],
        }
    }

    fn grow(&mut self, p: &Point) {
        for k in 0..3 {
            self.lo[k] = self.lo[k].min(p[k]);
            self.hi[k] = self.hi[k].max(p[k]);
        }
    }

    fn union(&mut self, o: &Aabb) {
        for k in 0..3 {
            self.lo[k] = self.lo[k].min(o.lo[k]);
            self.hi[k] = self.hi[k].max(o.hi[k]);
        }
    }

    /// Pads by a relative epsilon so rounding in the slab test never rejects
    /// a ray that the exact triangle test would accept.
    fn padded(mut self) -> Self {
        for k in 0..3 {
            let pad = 1e-9 * (self.hi[k] - self.lo[k]).abs().max(self.lo[k].abs().max(self.hi[k].abs())).max(1e-30);
            self.lo[k] -= pad;
            self.hi[k] += pad;
        }
        self
    }

    /// Entry distance of the ray into the box, if it is hit before `tmax`.
    #[inline]
    fn entry(&self, o: &Point, inv: &[f64; 3], tmin: f64, tmax: f64) -> Option<f64> {
        let (mut t0, mut t1) = (tmin, tmax);
        for k in 0..3 {
            if inv[k].is_infinite() {
                if o[k] < self.lo[k] || o[k] > self.hi[k] {
                    return None;
                }
                continue;
            }
            let a = (self.lo[k] - o[k]) * inv[k];
            let b = (self.hi[k] - o[k]) * inv[k];
            let (near, far) = if a < b { (a, b) } else { (b, a) };
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    bounds: Aabb,
    /// Leaf: first triangle slot; interior: index of the right child (the
    /// left child immediately follows its parent).
    index: u32,
    /// Leaf triangle count; 0 marks an interior node.
    count: u32,
}

/// Immutable BVH; triangles keep their mesh face indices.
#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    tris: Vec<[Point; 3]>,
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Self {
        let tris: Vec<[Point; 3]> = mesh
            .faces()
            .iter()
            .map(|f| [mesh.vertices()[f[0]], mesh.vertices()[f[1]], mesh.vertices()[f[2]]])
            .collect();
        let centroids: Vec<Point> = mesh.face_centroids().to_vec();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * tris.len() / LEAF_SIZE + 1);
        build_node(&tris, &centroids, &mut order, 0, tris.len(), &mut nodes);
        Bvh { nodes, order, tris }
    }

    pub fn num_triangles(&self) -> usize {
        self.tris.len()
    }

    /// Closest hit with `t > tmin`.
    pub fn intersect(&self, ray: &Ray, tmin: f64) -> Option<Hit> {
        self.intersect_filtered(ray, tmin, |_, _| true)
    }

    /// Closest hit with `t > tmin` among hits accepted by `accept(face, t)`.
    pub fn intersect_filtered(
        &self,
        ray: &Ray,
        tmin: f64,
        mut accept: impl FnMut(usize, f64) -> bool,
    ) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = [1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z];
        let mut best: Option<Hit> = None;
        let mut stack: Vec<(usize, f64)> = Vec::with_capacity(64);
        let root = &self.nodes[0];
        if let Some(t) = root.bounds.entry(&ray.origin, &inv, tmin, f64::INFINITY) {
            stack.push((0, t));
        }
        while let Some((ni, tnear)) = stack.pop() {
            let limit = best.map_or(f64::INFINITY, |h| h.t);
            // Equal entry distance may still hold a lower-index tie.
            if tnear > limit {
                continue;
            }
            let node = &self.nodes[ni];
            if node.count > 0 {
                let start = node.index as usize;
                for &fi in &self.order[start..start + node.count as usize] {
                    let f = fi as usize;
                    if let Some(t) = intersect_triangle(ray, &self.tris[f], tmin) {
                        let hit = Hit { face: f, t };
                        if hit.beats(&best) && accept(f, t) {
                            best = Some(hit);
                        }
                    }
                }
                continue;
            }
            let (l, r) = (ni + 1, node.index as usize);
            let limit = best.map_or(f64::INFINITY, |h| h.t);
            let tl = self.nodes[l].bounds.entry(&ray.origin, &inv, tmin, limit);
            let tr = self.nodes[r].bounds.entry(&ray.origin, &inv, tmin, limit);
            match (tl, tr) {
                (Some(a), Some(b)) => {
                    // Push the farther child first so the nearer is visited next.
                    if a <= b {
                        stack.push((r, b));
                        stack.push((l, a));
                    } else {
                        stack.push((l, a));
                        stack.push((r, b));
                    }
                }
                (Some(a), None) => stack.push((l, a)),
                (None, Some(b)) => stack.push((r, b)),
                (None, None) => {}
            }
        }
        best
    }
}

/// Reference closest-hit query that tests every triangle; shares the
/// triangle test and tie rule with [`Bvh::intersect`].
pub fn brute_force_intersect(mesh: &TriMesh, ray: &Ray, tmin: f64) -> Option<Hit> {
    let mut best = None;
    for (f, face) in mesh.faces().iter().enumerate() {
        let tri = [mesh.vertices()[face[0]], mesh.vertices()[face[1]], mesh.vertices()[face[2]]];
        if let Some(t) = intersect_triangle(ray, &tri, tmin) {
            let hit = Hit { face: f, t };
            if hit.beats(&best) {
                best = Some(hit);
            }
        }
    }
    best
}

fn build_node(
    tris: &[[Point; 3]],
    centroids: &[Point],
    order: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &fi in &order[start..end] {
        for p in &tris[fi as usize] {
            bounds.grow(p);
        }
        cbounds.grow(&centroids[fi as usize]);
    }
    let me = nodes.len();
    nodes.push(Node {
        bounds: bounds.padded(),
        index: start as u32,
        count: (end - start) as u32,
    });
    if end - start <= LEAF_SIZE {
        return me;
    }
    let axis = (0..3)
        .max_by(|&a, &b| {
            (cbounds.hi[a] - cbounds.lo[a]).total_cmp(&(cbounds.hi[b] - cbounds.lo[b]))
        })
        .unwrap();
    if cbounds.hi[axis] - cbounds.lo[axis] <= 0.0 {
        return me;
    }
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    build_node(tris, centroids, order, start, mid, nodes);
    let right = build_node(tris, centroids, order, mid, end, nodes);
    nodes[me].index = right as u32;
    nodes[me].count = 0;
    let mut merged = nodes[me + 1].bounds;
    merged.union(&nodes[right].bounds);
    nodes[me].bounds = merged;
    me
}

/// Two-sided Möller–Trumbore test; edges and vertices count as inside.
#[inline]
pub fn intersect_triangle(ray: &Ray, tri: &[Point; 3], tmin: f64) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = ray.dir.cross(&e2);
    let det = e1.dot(&p);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = ray.dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > tmin).then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force_on_random_rays() {
        let mesh = shapes::random_soup(300, 3);
        let bvh = Bvh::build(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = 0;
        for _ in 0..5000 {
            let o = Point::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let d = Vector::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let ray = Ray::new(o, d);
            let a = bvh.intersect(&ray, 0.0);
            assert_eq!(a, brute_force_intersect(&mesh, &ray, 0.0));
            hits += a.is_some() as usize;
        }
        assert!(hits > 500);
    }

    #[test]
    fn axis_aligned_rays_hit_flat_geometry() {
        let mesh = shapes::quad(2.0);
        let bvh = Bvh::build(&mesh);
        let hit = bvh
            .intersect(&Ray::new(Point::new(0.3, 0.2, 5.0), -Vector::z()), 0.0)
            .unwrap();
        assert!((hit.t - 5.0).abs() < 1e-12);
        // The shared diagonal is hit by both faces at the same t; lower wins.
        let diag = bvh
            .intersect(&Ray::new(Point::new(0.25, 0.25, 1.0), -Vector::z()), 0.0)
            .unwrap();
        assert_eq!(diag.face, 0);
        assert!(bvh
            .intersect(&Ray::new(Point::new(3.0, 0.0, 1.0), -Vector::z()), 0.0)
            .is_none());
    }

    #[test]
    fn filtered_query_skips_rejected_faces() {
        let mesh = shapes::cube(1.0);
        let bvh = Bvh::build(&mesh);
        let ray = Ray::new(Point::new(0.5, 0.4, -1.0), Vector::z());
        let first = bvh.intersect(&ray, 0.0).unwrap();
        assert!((first.t - 1.0).abs() < 1e-12);
        let second = bvh
            .intersect_filtered(&ray, 0.0, |_, t| t > 1.5)
            .unwrap();
        assert!((second.t - 2.0).abs() < 1e-12);
    }
}
