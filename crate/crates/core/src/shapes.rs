//! Procedural meshes with known part structure.
//!
//! The multi-part shapes come with a ground-truth labeling and are watertight,
//! so they exercise the full pipeline (including the thickness field) without
//! external data.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{FaceLabeling, Point, TriMesh, Vector};

/// A mesh paired with its reference part labeling.
#[derive(Clone, Debug)]
pub struct LabeledShape {
    pub name: &'static str,
    pub mesh: TriMesh,
    pub ground_truth: FaceLabeling,
}

/// Axis-aligned cube `[0, size]^3`, 12 triangles, outward normals.
pub fn cube(size: f64) -> TriMesh {
    let v: Vec<Point> = (0..8)
        .map(|i| {
            Point::new(
                (i & 1) as f64 * size,
                ((i >> 1) & 1) as f64 * size,
                ((i >> 2) & 1) as f64 * size,
            )
        })
        .collect();
    let quads = [
        [0, 2, 3, 1], // z = 0
        [4, 5, 7, 6], // z = 1
        [0, 1, 5, 4], // y = 0
        [2, 6, 7, 3], // y = 1
        [0, 4, 6, 2], // x = 0
        [1, 3, 7, 5], // x = 1
    ];
    let polys: Vec<Vec<usize>> = quads.iter().map(|q| q.to_vec()).collect();
    TriMesh::from_polygons(v, &polys).expect("cube is valid")
}

/// Unit square in the XY plane centred on the origin, facing +Z.
pub fn quad(size: f64) -> TriMesh {
    let h = size / 2.0;
    TriMesh::new(
        vec![
            Point::new(-h, -h, 0.0),
            Point::new(h, -h, 0.0),
            Point::new(h, h, 0.0),
            Point::new(-h, h, 0.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .expect("quad is valid")
}

/// Unit-radius icosphere; level 0 is the regular icosahedron (20 faces) and
/// each level multiplies the face count by four.
pub fn icosphere(level: u32) -> TriMesh {
    let (vertices, faces) = icosahedron_subdivided(level);
    TriMesh::new(vertices, faces).expect("icosphere is valid")
}

/// Vertices (unit length) and faces of a subdivided icosahedron.
pub(crate) fn icosahedron_subdivided(level: u32) -> (Vec<Point>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vector>| {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) / 2.0).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (verts.into_iter().map(Point::from).collect(), faces)
}

/// One piece of an axisymmetric profile along +Z.
#[derive(Clone, Copy, Debug)]
pub enum ProfilePiece {
    Sphere { center_z: f64, radius: f64 },
    Cylinder { z0: f64, z1: f64, radius: f64 },
}

impl ProfilePiece {
    fn radius_at(&self, z: f64) -> f64 {
        match *self {
            ProfilePiece::Sphere { center_z, radius } => {
                let d = z - center_z;
                if d.abs() <= radius {
                    (radius * radius - d * d).max(0.0).sqrt()
                } else {
                    0.0
                }
            }
            ProfilePiece::Cylinder { z0, z1, radius } => {
                if z >= z0 && z <= z1 {
                    radius
                } else {
                    0.0
                }
            }
        }
    }

    fn extent(&self) -> (f64, f64) {
        match *self {
            ProfilePiece::Sphere { center_z, radius } => (center_z - radius, center_z + radius),
            ProfilePiece::Cylinder { z0, z1, .. } => (z0, z1),
        }
    }
}

/// Surface of revolution of the union of `pieces`, with faces labeled by the
/// piece that owns the outer profile at each ring band. Pieces must overlap so
/// the union is a single solid.
pub fn revolve_union(pieces: &[ProfilePiece], segments: usize, rings_per_piece: usize) -> (TriMesh, FaceLabeling) {
    let radius = |z: f64| pieces.iter().map(|p| p.radius_at(z)).fold(0.0, f64::max);
    let owner = |z: f64| {
        pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.radius_at(z)))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0
    };

    // Breakpoints where ownership changes, found by bisection on a fine scan.
    let zmin = pieces.iter().map(|p| p.extent().0).fold(f64::INFINITY, f64::min);
    let zmax = pieces.iter().map(|p| p.extent().1).fold(f64::NEG_INFINITY, f64::max);
    let scan = 4000;
    let mut breaks = vec![zmin];
    let mut prev_owner = owner(zmin + 1e-12);
    for s in 1..=scan {
        let z = zmin + (zmax - zmin) * s as f64 / scan as f64;
        let o = owner(z.min(zmax - 1e-12));
        if o != prev_owner {
            let (mut lo, mut hi) = (z - (zmax - zmin) / scan as f64, z);
            for _ in 0..80 {
                let m = 0.5 * (lo + hi);
                if owner(m) == prev_owner {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            breaks.push(0.5 * (lo + hi));
            prev_owner = o;
        }
    }
    breaks.push(zmax);

    // Ring heights: spheres sampled uniformly in polar angle, cylinders in z.
    let mut zs = vec![zmin];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let piece = pieces[owner(0.5 * (a + b))];
        for k in 1..=rings_per_piece {
            let t = k as f64 / rings_per_piece as f64;
            let z = match piece {
                ProfilePiece::Sphere { center_z, radius } => {
                    let ta = ((a - center_z) / radius).clamp(-1.0, 1.0).acos();
                    let tb = ((b - center_z) / radius).clamp(-1.0, 1.0).acos();
                    center_z + radius * (ta + (tb - ta) * t).cos()
                }
                ProfilePiece::Cylinder { .. } => a + (b - a) * t,
            };
            zs.push(z);
        }
    }
    *zs.last_mut().unwrap() = zmax;

    let mut vertices = vec![Point::new(0.0, 0.0, zmin)];
    let inner = &zs[1..zs.len() - 1];
    for &z in inner {
        let r = radius(z);
        for j in 0..segments {
            let a = 2.0 * PI * j as f64 / segments as f64;
            vertices.push(Point::new(r * a.cos(), r * a.sin(), z));
        }
    }
    let top = vertices.len();
    vertices.push(Point::new(0.0, 0.0, zmax));
    let ring = |i: usize, j: usize| 1 + i * segments + (j % segments);

    let mut faces = Vec::new();
    let mut band_mid = Vec::new();
    for j in 0..segments {
        faces.push([0, ring(0, j + 1), ring(0, j)]);
        band_mid.push(0.5 * (zs[0] + zs[1]));
    }
    for i in 0..inner.len() - 1 {
        let mid = 0.5 * (inner[i] + inner[i + 1]);
        for j in 0..segments {
            faces.push([ring(i, j), ring(i, j + 1), ring(i + 1, j + 1)]);
            faces.push([ring(i, j), ring(i + 1, j + 1), ring(i + 1, j)]);
            band_mid.push(mid);
            band_mid.push(mid);
        }
    }
    let last = inner.len() - 1;
    for j in 0..segments {
        faces.push([top, ring(last, j), ring(last, j + 1)]);
        band_mid.push(0.5 * (zs[zs.len() - 2] + zs[zs.len() - 1]));
    }

    // Consecutive bands owned by the same piece share a label; labels follow
    // the order pieces are met along the axis.
    let mut label_of_owner: HashMap<usize, u32> = HashMap::new();
    let labels: Vec<u32> = band_mid
        .iter()
        .map(|&z| {
            let o = owner(z);
            let next = label_of_owner.len() as u32;
            *label_of_owner.entry(o).or_insert(next)
        })
        .collect();
    let mesh = TriMesh::new(vertices, faces).expect("revolved profile is valid");
    assert_eq!(mesh.num_faces(), labels.len(), "revolve produced degenerate faces");
    (mesh, FaceLabeling::new(labels))
}

/// Closed cylinder along Z with flat caps, centred on the origin.
pub fn cylinder(radius: f64, length: f64, segments: usize, rings: usize) -> TriMesh {
    let h = length / 2.0;
    let mut vertices = vec![Point::new(0.0, 0.0, -h)];
    for i in 0..=rings {
        let z = -h + length * i as f64 / rings as f64;
        for j in 0..segments {
            let a = 2.0 * PI * j as f64 / segments as f64;
            vertices.push(Point::new(radius * a.cos(), radius * a.sin(), z));
        }
    }
    let top = vertices.len();
    vertices.push(Point::new(0.0, 0.0, h));
    let ring = |i: usize, j: usize| 1 + i * segments + (j % segments);
    let mut faces = Vec::new();
    for j in 0..segments {
        faces.push([0, ring(0, j + 1), ring(0, j)]);
        faces.push([top, ring(rings, j), ring(rings, j + 1)]);
    }
    for i in 0..rings {
        for j in 0..segments {
            faces.push([ring(i, j), ring(i, j + 1), ring(i + 1, j + 1)]);
            faces.push([ring(i, j), ring(i + 1, j + 1), ring(i + 1, j)]);
        }
    }
    TriMesh::new(vertices, faces).expect("cylinder is valid")
}

/// Two unit spheres joined by a thin neck along Z. Ground truth: lower
/// sphere, neck, upper sphere.
pub fn dumbbell() -> LabeledShape {
    let (mesh, ground_truth) = revolve_union(
        &[
            ProfilePiece::Sphere { center_z: -2.0, radius: 1.0 },
            ProfilePiece::Cylinder { z0: -2.0, z1: 2.0, radius: 0.3 },
            ProfilePiece::Sphere { center_z: 2.0, radius: 1.0 },
        ],
        40,
        14,
    );
    LabeledShape { name: "dumbbell", mesh, ground_truth }
}

/// Three stacked spheres of decreasing size.
pub fn snowman() -> LabeledShape {
    let (mesh, ground_truth) = revolve_union(
        &[
            ProfilePiece::Sphere { center_z: 0.0, radius: 1.0 },
            ProfilePiece::Sphere { center_z: 1.5, radius: 0.75 },
            ProfilePiece::Sphere { center_z: 2.55, radius: 0.5 },
        ],
        40,
        14,
    );
    LabeledShape { name: "snowman", mesh, ground_truth }
}

/// Boundary surface of a set of unit voxels, scaled by `voxel`. Each face is
/// labeled with the part id of the voxel it bounds. Voxels touching only
/// along an edge or corner produce non-manifold geometry and should be avoided.
pub fn voxel_union(cells: &[([i32; 3], u32)], voxel: f64) -> (TriMesh, FaceLabeling) {
    let occupied: HashMap<[i32; 3], u32> = cells.iter().copied().collect();
    let mut index: HashMap<[i32; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vid = |p: [i32; 3], vertices: &mut Vec<Point>| {
        *index.entry(p).or_insert_with(|| {
            vertices.push(Point::new(p[0] as f64 * voxel, p[1] as f64 * voxel, p[2] as f64 * voxel));
            vertices.len() - 1
        })
    };
    let mut faces = Vec::new();
    let mut labels = Vec::new();
    let mut sorted: Vec<_> = cells.to_vec();
    sorted.sort_unstable();
    for (c, part) in sorted {
        for axis in 0..3 {
            for dir in [-1i32, 1] {
                let mut n = c;
                n[axis] += dir;
                if occupied.contains_key(&n) {
                    continue;
                }
                // Quad on the face of cell `c` perpendicular to `axis`.
                let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                let mut base = c;
                if dir > 0 {
                    base[axis] += 1;
                }
                let corner = |du: i32, dv: i32| {
                    let mut p = base;
                    p[u] += du;
                    p[v] += dv;
                    p
                };
                let mut q = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                if dir < 0 {
                    q.reverse();
                }
                let ids = q.map(|p| vid(p, &mut vertices));
                faces.push([ids[0], ids[1], ids[2]]);
                faces.push([ids[0], ids[2], ids[3]]);
                labels.push(part);
                labels.push(part);
            }
        }
    }
    let mesh = TriMesh::new(vertices, faces).expect("voxel surface is valid");
    (mesh, FaceLabeling::new(labels))
}

/// A wide slab with a tower standing on it.
pub fn two_box_union() -> LabeledShape {
    let mut cells = Vec::new();
    for x in 0..12 {
        for y in 0..12 {
            for z in 0..4 {
                cells.push(([x, y, z], 0));
            }
        }
    }
    for x in 4..8 {
        for y in 4..8 {
            for z in 4..12 {
                cells.push(([x, y, z], 1));
            }
        }
    }
    let (mesh, ground_truth) = voxel_union(&cells, 0.5);
    LabeledShape { name: "two_box_union", mesh, ground_truth }
}

/// Planar `nx` x `ny` grid of quads (two triangles each) with jittered
/// interior vertices so face areas differ.
pub fn jittered_grid(nx: usize, ny: usize, jitter: f64, seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let interior = jitter > 0.0 && i > 0 && j > 0 && i < nx && j < ny;
            let (dx, dy) = if interior {
                (rng.random_range(-jitter..jitter), rng.random_range(-jitter..jitter))
            } else {
                (0.0, 0.0)
            };
            vertices.push(Point::new(i as f64 + dx, j as f64 + dy, 0.0));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(vertices, faces).expect("grid is valid")
}

/// Unit-height strip of `n` unit quads along +x, split into `2n` triangles
/// numbered left to right.
pub fn strip(n: usize) -> TriMesh {
    let mut vertices = Vec::with_capacity(2 * n + 2);
    for i in 0..=n {
        vertices.push(Point::new(i as f64, 0.0, 0.0));
        vertices.push(Point::new(i as f64, 1.0, 0.0));
    }
    let faces = (0..n)
        .flat_map(|i| {
            let (a, b, c, d) = (2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3);
            [[a, c, b], [b, c, d]]
        })
        .collect();
    TriMesh::new(vertices, faces).expect("strip is valid")
}

/// `n` random triangles inside the unit cube around the origin.
pub fn random_soup(n: usize, seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::with_capacity(3 * n);
    let mut faces = Vec::with_capacity(n);
    for f in 0..n {
        let c = Vector::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        for _ in 0..3 {
            let d = Vector::new(
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
            );
            vertices.push(Point::from(c + d));
        }
        faces.push([3 * f, 3 * f + 1, 3 * f + 2]);
    }
    TriMesh::new(vertices, faces).expect("soup has non-degenerate faces")
}

/// The three multi-part reference shapes.
pub fn reference_shapes() -> Vec<LabeledShape> {
    vec![two_box_union(), dumbbell(), snowman()]
}
