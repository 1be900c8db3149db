use serde::{Deserialize, Serialize};

use super::bvh::Ray;
use crate::error::{Error, Result};
use crate::mesh::{Point, TriMesh, Vector};
use crate::shapes::icosahedron_subdivided;

/// Fraction of the vertical field of view the bounding sphere spans.
pub const FRAME_FILL: f64 = 0.9;

/// Pinhole camera looking at a target point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: [f64; 3],
    pub look_at: [f64; 3],
    pub up: [f64; 3],
    /// Radians, in `(0, π)`.
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraPose {
    pub fn new(position: Point, look_at: Point, up: Vector, vertical_fov: f64, width: u32, height: u32) -> Result<Self> {
        if (position - look_at).norm() == 0.0 {
            return Err(Error::InvalidConfig("camera position equals its target".into()));
        }
        if !(vertical_fov > 0.0 && vertical_fov < std::f64::consts::PI) {
            return Err(Error::InvalidConfig(format!("field of view {vertical_fov} outside (0, π)")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig("zero image size".into()));
        }
        Ok(CameraPose {
            position: position.coords.into(),
            look_at: look_at.coords.into(),
            up: up.normalize().into(),
            vertical_fov,
            width,
            height,
        })
    }

    pub fn position(&self) -> Point {
        Point::from(self.position)
    }

    pub fn resolution(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Unit viewing direction.
    pub fn forward(&self) -> Vector {
        (Point::from(self.look_at) - self.position()).normalize()
    }

    pub(crate) fn rig(&self) -> CameraRig {
        let forward = self.forward();
        let up = Vector::from(self.up);
        let right = forward.cross(&up).normalize();
        let true_up = right.cross(&forward);
        let tan_half = (self.vertical_fov / 2.0).tan();
        let aspect = self.width as f64 / self.height as f64;
        CameraRig {
            origin: self.position(),
            forward,
            right: right * tan_half * aspect,
            up: true_up * tan_half,
            width: self.width as f64,
            height: self.height as f64,
        }
    }
}

/// Precomputed basis for generating primary rays.
pub(crate) struct CameraRig {
    origin: Point,
    forward: Vector,
    right: Vector,
    up: Vector,
    width: f64,
    height: f64,
}

impl CameraRig {
    /// Ray through the centre of pixel `(x, y)`; row 0 is the top of the image.
    #[inline]
    pub fn ray(&self, x: u32, y: u32) -> Ray {
        let ndc_x = 2.0 * (x as f64 + 0.5) / self.width - 1.0;
        let ndc_y = 1.0 - 2.0 * (y as f64 + 0.5) / self.height;
        let dir = self.forward + self.right * ndc_x + self.up * ndc_y;
        Ray::new(self.origin, dir.normalize())
    }
}

/// View counts of the icosahedral layout at subdivision levels 0, 1 and 2.
pub const SUPPORTED_VIEW_COUNTS: [usize; 3] = [12, 42, 162];

/// Unit directions of the icosahedral viewpoint layout: 12, 42 or 162 views
/// (icosahedron vertices after 0, 1 or 2 subdivisions).
pub fn icosahedral_directions(n_views: usize) -> Result<Vec<Vector>> {
    let level = match n_views {
        12 => 0,
        42 => 1,
        162 => 2,
        n => return Err(Error::UnsupportedViewCount(n)),
    };
    let (verts, _) = icosahedron_subdivided(level);
    Ok(verts.into_iter().map(|p| p.coords).collect())
}

/// Cameras on a sphere around the mesh centroid, one per icosahedral
/// direction, at the distance where the bounding sphere fills
/// [`FRAME_FILL`] of the vertical field of view. Up is +Z, or +X for views
/// looking almost straight along Z.
pub fn icosahedral_poses(mesh: &TriMesh, n_views: usize, vertical_fov: f64, resolution: (u32, u32)) -> Result<Vec<CameraPose>> {
    let dirs = icosahedral_directions(n_views)?;
    let center = mesh.centroid();
    let radius = mesh.bounding_radius().max(1e-12);
    let distance = radius / (FRAME_FILL * vertical_fov / 2.0).sin();
    dirs.into_iter()
        .map(|d| {
            let up = if d.z.abs() > 0.99 { Vector::x() } else { Vector::z() };
            CameraPose::new(center + d * distance, center, up, vertical_fov, resolution.0, resolution.1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn twelve_views_sit_on_icosahedron_vertices() {
        let sphere = shapes::icosphere(3);
        let poses = icosahedral_poses(&sphere, 12, 60f64.to_radians(), (64, 64)).unwrap();
        assert_eq!(poses.len(), 12);
        let c = sphere.centroid();
        let d0 = (poses[0].position() - c).norm();
        for p in &poses {
            assert!(((p.position() - c).norm() - d0).abs() < 1e-9);
        }
    }

    #[test]
    fn icosahedron_vertex_angles() {
        // cos of the angle between adjacent vertices is 1/√5.
        let near = (1.0 / 5f64.sqrt()).acos().to_degrees();
        assert!((near - 63.4349).abs() < 1e-3);
        let allowed = [near, 180.0 - near, 180.0];
        let dirs = icosahedral_directions(12).unwrap();
        for i in 0..12 {
            for j in i + 1..12 {
                let a = dirs[i].dot(&dirs[j]).clamp(-1.0, 1.0).acos().to_degrees();
                assert!(allowed.iter().any(|&x| (a - x).abs() < 1e-6), "{a}");
            }
        }
    }

    #[test]
    fn subdivided_layouts() {
        let d42 = icosahedral_directions(42).unwrap();
        assert_eq!(d42.len(), 42);
        let d12 = icosahedral_directions(12).unwrap();
        assert_eq!(&d42[..12], &d12[..]);
        assert_eq!(icosahedral_directions(162).unwrap().len(), 162);
        assert!(matches!(icosahedral_directions(20), Err(Error::UnsupportedViewCount(20))));
    }

    #[test]
    fn bounding_sphere_fills_the_frame() {
        let sphere = shapes::icosphere(2);
        let fov = 50f64.to_radians();
        let pose = &icosahedral_poses(&sphere, 12, fov, (32, 32)).unwrap()[0];
        let d = (pose.position() - sphere.centroid()).norm();
        let half = (sphere.bounding_radius() / d).asin();
        assert!((2.0 * half / fov - FRAME_FILL).abs() < 1e-9);
    }

    #[test]
    fn invalid_pose_parameters() {
        let p = Point::origin();
        assert!(CameraPose::new(p, p, Vector::z(), 1.0, 8, 8).is_err());
        assert!(CameraPose::new(Point::new(0.0, 0.0, 1.0), p, Vector::x(), 3.5, 8, 8).is_err());
        assert!(CameraPose::new(Point::new(0.0, 0.0, 1.0), p, Vector::x(), 1.0, 0, 8).is_err());
    }
}
