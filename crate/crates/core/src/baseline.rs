//! Shape-diameter baseline segmenter: cluster normalized thickness values
//! with a 1D Gaussian mixture, smooth the clusters with a graph cut and
//! split the result into connected parts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{connected_components, FaceLabeling, TriMesh};
use crate::postprocess::{alpha_expansion, edge_weights, CutEnergy};
use crate::sdf::SdfField;

pub const VARIANCE_FLOOR: f64 = 1e-6;
const TOLERANCE: f64 = 1e-7;
const MAX_ITERATIONS: usize = 300;
const POSTERIOR_FLOOR: f64 = 1e-12;

/// Fitted mixture with components sorted by mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gmm1D {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub log_likelihood: f64,
    /// Log-likelihood at the initial parameters and after every EM step.
    pub trace: Vec<f64>,
}

impl Gmm1D {
    pub fn k(&self) -> usize {
        self.means.len()
    }

    /// `ln(w_c · N(x; μ_c, σ²_c))` per component.
    fn log_joint(&self, x: f64, out: &mut [f64]) {
        for c in 0..self.k() {
            let v = self.variances[c];
            out[c] = self.weights[c].ln() - 0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - self.means[c]).powi(2) / v);
        }
    }

    /// Component posteriors at `x`.
    pub fn posterior(&self, x: f64) -> Vec<f64> {
        let mut lj = vec![0.0; self.k()];
        self.log_joint(x, &mut lj);
        let lse = log_sum_exp(&lj);
        lj.iter().map(|&l| (l - lse).exp()).collect()
    }

    pub fn log_likelihood_of(&self, values: &[f64]) -> f64 {
        let mut lj = vec![0.0; self.k()];
        values
            .iter()
            .map(|&x| {
                self.log_joint(x, &mut lj);
                log_sum_exp(&lj)
            })
            .sum()
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// EM fit of a `k`-component mixture.
///
/// Means start at the `(i + 0.5)/k` quantiles with equal weights and the
/// global variance divided by `k`. The seed only perturbs coinciding
/// initial means. Stops when the log-likelihood gains less than 1e−7 or
/// after 300 steps.
pub fn fit_gmm_1d(values: &[f64], k: usize, seed: u64) -> Result<Gmm1D> {
    if k == 0 || values.len() < k {
        return Err(Error::TooFewValues { k, got: values.len() });
    }
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;

    let mut means: Vec<f64> = (0..k)
        .map(|i| {
            let q = (i as f64 + 0.5) / k as f64;
            sorted[((q * n) as usize).min(sorted.len() - 1)]
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = var.sqrt().max(1e-3);
    for i in 1..k {
        if means[..i].contains(&means[i]) {
            means[i] += spread * 1e-3 * rng.random_range(0.5..1.0);
        }
    }
    let mut gmm = Gmm1D {
        weights: vec![1.0 / k as f64; k],
        means,
        variances: vec![(var / k as f64).max(VARIANCE_FLOOR); k],
        log_likelihood: 0.0,
        trace: Vec::new(),
    };
    gmm.log_likelihood = gmm.log_likelihood_of(values);
    gmm.trace.push(gmm.log_likelihood);

    let mut resp = vec![0.0; values.len() * k];
    let mut lj = vec![0.0; k];
    for _ in 0..MAX_ITERATIONS {
        for (i, &x) in values.iter().enumerate() {
            gmm.log_joint(x, &mut lj);
            let lse = log_sum_exp(&lj);
            for c in 0..k {
                resp[i * k + c] = (lj[c] - lse).exp();
            }
        }
        for c in 0..k {
            let nk: f64 = (0..values.len()).map(|i| resp[i * k + c]).sum();
            gmm.weights[c] = nk / n;
            if nk <= f64::MIN_POSITIVE {
                continue;
            }
            let mu = (0..values.len()).map(|i| resp[i * k + c] * values[i]).sum::<f64>() / nk;
            let v = (0..values.len()).map(|i| resp[i * k + c] * (values[i] - mu).powi(2)).sum::<f64>() / nk;
            gmm.means[c] = mu;
            gmm.variances[c] = v.max(VARIANCE_FLOOR);
        }
        let ll = gmm.log_likelihood_of(values);
        let gain = ll - gmm.log_likelihood;
        gmm.log_likelihood = ll;
        gmm.trace.push(ll);
        if gain < TOLERANCE {
            break;
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| gmm.means[a].total_cmp(&gmm.means[b]));
    gmm.weights = order.iter().map(|&c| gmm.weights[c]).collect();
    gmm.means = order.iter().map(|&c| gmm.means[c]).collect();
    gmm.variances = order.iter().map(|&c| gmm.variances[c]).collect();
    Ok(gmm)
}

/// Baseline segmentation of `mesh` from its normalized thickness field.
///
/// Unary cost is `−ln(posterior + 1e−12)` per mixture component; the
/// boundary term matches the postprocess smoothing. One expansion sweep
/// starts from the most probable component per face, then parts are split
/// into connected pieces and numbered densely.
pub fn sdf_segment(mesh: &TriMesh, field: &SdfField, k: usize, lambda: f64, seed: u64) -> Result<FaceLabeling> {
    let values = field
        .normalized()
        .ok_or_else(|| Error::InvalidConfig("thickness field is not normalized".into()))?;
    if values.len() != mesh.num_faces() {
        return Err(Error::LengthMismatch {
            expected: mesh.num_faces(),
            got: values.len(),
        });
    }
    let gmm = fit_gmm_1d(values, k, seed)?;
    let mut unary = Vec::with_capacity(values.len() * k);
    let mut init = Vec::with_capacity(values.len());
    for &x in values {
        let post = gmm.posterior(x);
        let best = (0..k).fold(0, |b, c| if post[c] > post[b] { c } else { b });
        init.push(best as u32);
        unary.extend(post.iter().map(|p| (-(p + POSTERIOR_FLOOR).ln()).max(0.0)));
    }
    let energy = CutEnergy {
        num_labels: k,
        unary,
        edges: edge_weights(mesh),
        lambda,
    };
    let cut = alpha_expansion(&energy, &FaceLabeling::new(init), 1)?;
    connected_components(mesh, &cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::Bvh;
    use crate::sdf::{shape_diameter, SdfParams};
    use crate::shapes;

    fn normal_sample(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
        // Box–Muller.
        let (u1, u2): (f64, f64) = (rng.random_range(f64::EPSILON..1.0), rng.random());
        mean + sd * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn single_component_is_the_sample_moments() {
        let v = [0.1, 0.4, 0.35, 0.9, 0.6];
        let g = fit_gmm_1d(&v, 1, 0).unwrap();
        let mean = v.iter().sum::<f64>() / 5.0;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 5.0;
        assert!((g.means[0] - mean).abs() < 1e-12);
        assert!((g.variances[0] - var).abs() < 1e-12);
        assert_eq!(g.weights, vec![1.0]);
        let flat = fit_gmm_1d(&[0.5; 4], 1, 0).unwrap();
        assert_eq!(flat.variances[0], VARIANCE_FLOOR);
    }

    #[test]
    fn separated_spikes_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut v: Vec<f64> = (0..500).map(|_| normal_sample(&mut rng, 0.2, 0.01)).collect();
        v.extend((0..500).map(|_| normal_sample(&mut rng, 0.8, 0.01)));
        let g = fit_gmm_1d(&v, 2, 0).unwrap();
        assert!((g.means[0] - 0.2).abs() < 0.01 && (g.means[1] - 0.8).abs() < 0.01);
        assert!((g.weights[0] - 0.5).abs() < 0.05);
        assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_likelihood_never_decreases() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..300).map(|_| rng.random::<f64>().powi(2)).collect();
            let g = fit_gmm_1d(&v, 4, seed).unwrap();
            assert!(g.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9), "seed {seed}");
            assert!(g.variances.iter().all(|&x| x >= VARIANCE_FLOOR));
        }
    }

    #[test]
    fn too_few_values() {
        assert!(matches!(fit_gmm_1d(&[0.1, 0.2], 3, 0), Err(Error::TooFewValues { k: 3, got: 2 })));
    }

    #[test]
    fn dumbbell_splits_into_two_bells_and_a_neck() {
        let s = shapes::dumbbell();
        let field = shape_diameter(&s.mesh, &Bvh::build(&s.mesh), &SdfParams::default()).unwrap();
        let labels = sdf_segment(&s.mesh, &field, 2, 15.0, 0).unwrap();
        assert_eq!(labels.num_labels(), 3);
        assert!(labels.is_dense());
        let heavy = sdf_segment(&s.mesh, &field, 2, 1e4, 0).unwrap();
        assert!(heavy.num_labels() <= labels.num_labels());
    }

    #[test]
    fn constant_field_gives_one_part() {
        let m = shapes::icosphere(2);
        let field = SdfField {
            raw: vec![2.0; m.num_faces()],
            normalized: Some(vec![0.0; m.num_faces()]),
            alpha: Some(4.0),
        };
        assert_eq!(sdf_segment(&m, &field, 1, 15.0, 0).unwrap().num_labels(), 1);
    }
}
