//! Cleanup of a lifted labeling: fill unlabeled faces, then smooth part
//! boundaries with a graph cut that prefers concave creases.

pub mod expansion;
pub mod maxflow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{connected_components, dihedral_unchecked, FaceLabeling, TriMesh};

pub use expansion::{alpha_expansion, alpha_expansion_traced, CutEnergy};

/// Convex dihedral angles are scaled by this before weighting.
pub const CONVEX_SCALE: f64 = 0.1;
const WEIGHT_EPS: f64 = 1e-6;

/// What to do with unlabeled components large enough to be parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HoleMode {
    /// Give each large unlabeled component its own label.
    #[default]
    Promote,
    /// Fill every unlabeled face from its neighbours regardless of size.
    Flood,
}

/// Resolves every unlabeled face.
///
/// Unlabeled components with at least `p_area · |F|` faces are promoted to
/// fresh labels (unless `mode` is [`HoleMode::Flood`]). The rest are filled
/// by synchronous frontier growth: each round, every unlabeled face touching
/// a labeled one takes the most common neighbouring label (ties to the
/// smaller label). Faces still unlabeled after `max_iters` rounds, or out of
/// reach of any label, are promoted per component.
pub fn fill_unlabeled(mesh: &TriMesh, labels: &FaceLabeling, p_area: f64, max_iters: usize, mode: HoleMode) -> Result<FaceLabeling> {
    mesh.check_labels(labels)?;
    if !labels.labels().iter().any(|&l| l != FaceLabeling::UNLABELED) {
        return Err(Error::AllUnlabeled);
    }
    let mut out = labels.labels().to_vec();
    if mode == HoleMode::Promote {
        let min_faces = p_area * mesh.num_faces() as f64;
        promote_components(mesh, &mut out, |size| size as f64 >= min_faces);
    }
    for _ in 0..max_iters {
        let updates: Vec<(usize, u32)> = (0..out.len())
            .filter(|&f| out[f] == FaceLabeling::UNLABELED)
            .filter_map(|f| majority(mesh.neighbors(f).iter().map(|&g| out[g])).map(|l| (f, l)))
            .collect();
        if updates.is_empty() {
            break;
        }
        for (f, l) in updates {
            out[f] = l;
        }
    }
    promote_components(mesh, &mut out, |_| true);
    Ok(FaceLabeling::new(out))
}

/// Most common labeled value, ties to the smallest.
fn majority(labels: impl Iterator<Item = u32>) -> Option<u32> {
    let mut seen: Vec<(u32, usize)> = Vec::new();
    for l in labels.filter(|&l| l != FaceLabeling::UNLABELED) {
        match seen.iter_mut().find(|(x, _)| *x == l) {
            Some(e) => e.1 += 1,
            None => seen.push((l, 1)),
        }
    }
    seen.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(l, _)| l)
}

/// Gives each unlabeled component accepted by `take` a fresh label, in order
/// of its lowest face.
fn promote_components(mesh: &TriMesh, labels: &mut [u32], take: impl Fn(usize) -> bool) {
    let holes: Vec<u32> = labels
        .iter()
        .map(|&l| if l == FaceLabeling::UNLABELED { 0 } else { FaceLabeling::UNLABELED })
        .collect();
    let comps = connected_components(mesh, &FaceLabeling::new(holes)).expect("lengths match");
    let mut sizes = vec![0usize; comps.label_bound() as usize];
    for &c in comps.labels() {
        if c != FaceLabeling::UNLABELED {
            sizes[c as usize] += 1;
        }
    }
    let mut next = labels
        .iter()
        .filter(|&&l| l != FaceLabeling::UNLABELED)
        .max()
        .map_or(0, |&m| m + 1);
    let mut fresh = vec![None; sizes.len()];
    for (c, &size) in sizes.iter().enumerate() {
        if take(size) {
            fresh[c] = Some(next);
            next += 1;
        }
    }
    for (f, &c) in comps.labels().iter().enumerate() {
        if c != FaceLabeling::UNLABELED {
            if let Some(l) = fresh[c as usize] {
                labels[f] = l;
            }
        }
    }
}

/// Boundary cost of each adjacent face pair: `max(0, −ln(θ'/π + ε))` where
/// θ' is the dihedral angle, scaled by [`CONVEX_SCALE`] on convex edges.
/// Concave creases are cheap to cut; flat and convex regions expensive.
pub fn edge_weights(mesh: &TriMesh) -> Vec<(usize, usize, f64)> {
    mesh.edges()
        .iter()
        .map(|e| {
            let [f, g] = e.faces;
            let d = dihedral_unchecked(mesh, f, g);
            let theta = if d.convex { CONVEX_SCALE * d.angle } else { d.angle };
            (f, g, (-(theta / std::f64::consts::PI + WEIGHT_EPS).ln()).max(0.0))
        })
        .collect()
}

/// One alpha-expansion sweep with a 0/1 cost for leaving each face's
/// current label, then a split into connected parts.
pub fn smooth_labels(mesh: &TriMesh, labels: &FaceLabeling, lambda: f64) -> Result<FaceLabeling> {
    smooth_labels_with(mesh, labels, lambda, &edge_weights(mesh))
}

/// [`smooth_labels`] with precomputed [`edge_weights`].
pub fn smooth_labels_with(mesh: &TriMesh, labels: &FaceLabeling, lambda: f64, weights: &[(usize, usize, f64)]) -> Result<FaceLabeling> {
    mesh.check_labels(labels)?;
    if !labels.is_complete() {
        return Err(Error::InvalidConfig("smoothing needs every face labeled".into()));
    }
    let dense = labels.densified();
    let num_labels = dense.num_labels();
    let mut unary = vec![1.0; mesh.num_faces() * num_labels];
    for (f, &l) in dense.labels().iter().enumerate() {
        unary[f * num_labels + l as usize] = 0.0;
    }
    let energy = CutEnergy {
        num_labels,
        unary,
        edges: weights.to_vec(),
        lambda,
    };
    let cut = alpha_expansion(&energy, &dense, 1)?;
    connected_components(mesh, &cut)
}

/// Number of distinct parts in a labeling.
pub fn segment_count(labels: &FaceLabeling) -> usize {
    labels.num_labels()
}

/// Evaluates `run` on each λ of the ascending `grid` and returns the first
/// whose part count lies within `margin` of `target`. Without such a λ, the
/// one with the closest count wins (ties to the smaller λ).
pub fn lambda_search<T>(
    grid: &[f64],
    target: usize,
    margin: usize,
    mut run: impl FnMut(f64) -> Result<(usize, T)>,
) -> Result<(f64, T)> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("lambda grid"));
    }
    let mut best: Option<(usize, f64, T)> = None;
    for &lambda in grid {
        let (count, value) = run(lambda)?;
        let miss = count.abs_diff(target);
        if miss <= margin {
            return Ok((lambda, value));
        }
        if best.as_ref().is_none_or(|(m, _, _)| miss < *m) {
            best = Some((miss, lambda, value));
        }
    }
    let (_, lambda, value) = best.expect("grid is not empty");
    Ok((lambda, value))
}

/// The integer grid `1, 2, …, 15`.
pub fn default_lambda_grid() -> Vec<f64> {
    (1..=15).map(f64::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Vector;
    use crate::shapes::{self, strip};

    const U: u32 = FaceLabeling::UNLABELED;

    /// `n` unit squares in a row, two triangles each; faces chain left to right.
    #[test]
    fn fully_labeled_input_is_unchanged() {
        let m = strip(5);
        let l = FaceLabeling::new(vec![0, 0, 1, 1, 2, 2, 2, 0, 0, 1]);
        assert_eq!(fill_unlabeled(&m, &l, 0.025, 64, HoleMode::Promote).unwrap(), l);
    }

    #[test]
    fn single_hole_takes_its_surroundings() {
        let m = shapes::icosphere(1);
        let mut l = vec![3; m.num_faces()];
        l[7] = U;
        let out = fill_unlabeled(&m, &FaceLabeling::new(l), 0.025, 64, HoleMode::Promote).unwrap();
        assert!(out.labels().iter().all(|&x| x == 3));
    }

    #[test]
    fn large_unlabeled_region_is_promoted() {
        let m = strip(50);
        let l: Vec<u32> = (0..100).map(|f| if f < 60 { 0 } else { U }).collect();
        let out = fill_unlabeled(&m, &FaceLabeling::new(l.clone()), 0.025, 64, HoleMode::Promote).unwrap();
        assert!(out.labels()[..60].iter().all(|&x| x == 0));
        assert!(out.labels()[60..].iter().all(|&x| x == 1));
        let flooded = fill_unlabeled(&m, &FaceLabeling::new(l), 0.025, 64, HoleMode::Flood).unwrap();
        assert!(flooded.labels().iter().all(|&x| x == 0));
    }

    #[test]
    fn frontier_ties_go_to_the_smaller_label() {
        let m = strip(2);
        let out = fill_unlabeled(&m, &FaceLabeling::new(vec![4, U, U, 2]), 0.9, 64, HoleMode::Promote).unwrap();
        assert_eq!(out.labels(), &[4, 4, 2, 2]);
    }

    #[test]
    fn leftovers_and_unreachable_faces_are_promoted() {
        let a = strip(3);
        let m = a.merged(&a.translated(Vector::new(0.0, 5.0, 0.0)));
        let mut l = vec![U; 12];
        l[0] = 0;
        let out = fill_unlabeled(&m, &FaceLabeling::new(l.clone()), 1.0, 64, HoleMode::Promote).unwrap();
        assert_eq!(out.labels(), &[0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1]);
        let out = fill_unlabeled(&m, &FaceLabeling::new(l), 1.0, 2, HoleMode::Promote).unwrap();
        assert_eq!(out.labels(), &[0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 2, 2]);
        assert!(matches!(
            fill_unlabeled(&m, &FaceLabeling::unlabeled(12), 0.0, 64, HoleMode::Promote),
            Err(Error::AllUnlabeled)
        ));
    }

    #[test]
    fn zigzag_outlier_is_absorbed() {
        let m = strip(2);
        let l = FaceLabeling::new(vec![0, 1, 0, 0]);
        assert_eq!(smooth_labels(&m, &l, 10.0).unwrap().labels(), &[0, 0, 0, 0]);
        assert_eq!(smooth_labels(&m, &l, 0.0).unwrap().labels(), &[0, 1, 2, 2]);
    }

    #[test]
    fn flat_edges_are_expensive_and_creases_cheap() {
        let cube = shapes::cube(1.0);
        let w = edge_weights(&cube);
        let convex_right = -(0.1 * 0.5f64 + 1e-6).ln();
        for &(_, _, x) in &w {
            let flat = -(1e-6f64).ln();
            assert!((x - flat).abs() < 1e-9 || (x - convex_right).abs() < 1e-9);
        }
        let concave = -(0.5f64 + 1e-6).ln();
        assert!(concave < convex_right);
    }

    #[test]
    fn lambda_search_examples() {
        let grid = [1.0, 5.0, 10.0, 15.0];
        let counts = [9, 7, 5, 3];
        let run = |l: f64| Ok((counts[grid.iter().position(|&g| g == l).unwrap()], ()));
        assert_eq!(lambda_search(&grid, 5, 0, run).unwrap().0, 10.0);
        assert_eq!(lambda_search(&grid, 5, usize::MAX, run).unwrap().0, 1.0);
        assert_eq!(lambda_search(&grid, 9, 0, run).unwrap().0, 1.0);
        assert_eq!(lambda_search(&grid, 4, 0, run).unwrap().0, 10.0);
        assert_eq!(default_lambda_grid().len(), 15);
    }
}
