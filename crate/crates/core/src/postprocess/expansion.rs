//! Multi-label Potts energy and its minimization by alpha-expansion moves.

use super::maxflow::FlowGraph;
use crate::error::{Error, Result};
use crate::mesh::FaceLabeling;

/// `E(L) = Σ_f unary[f][L_f] + lambda · Σ_{(f,g,w): L_f ≠ L_g} w`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutEnergy {
    pub num_labels: usize,
    /// Row-major `num_faces × num_labels`; `+∞` forbids a label.
    pub unary: Vec<f64>,
    /// `(f, g, w)` with `w ≥ 0`, one entry per adjacent pair.
    pub edges: Vec<(usize, usize, f64)>,
    pub lambda: f64,
}

impl CutEnergy {
    pub fn num_faces(&self) -> usize {
        if self.num_labels == 0 {
            0
        } else {
            self.unary.len() / self.num_labels
        }
    }

    #[inline]
    pub fn unary(&self, face: usize, label: usize) -> f64 {
        self.unary[face * self.num_labels + label]
    }

    pub fn energy(&self, labels: &[u32]) -> f64 {
        let data: f64 = labels.iter().enumerate().map(|(f, &l)| self.unary(f, l as usize)).sum();
        let smooth: f64 = self
            .edges
            .iter()
            .filter(|&&(f, g, _)| labels[f] != labels[g])
            .map(|&(_, _, w)| w)
            .sum();
        data + self.lambda * smooth
    }

    fn validate(&self, init: &FaceLabeling) -> Result<()> {
        let n = self.num_faces();
        if self.unary.len() != n * self.num_labels {
            return Err(Error::LengthMismatch {
                expected: n * self.num_labels,
                got: self.unary.len(),
            });
        }
        if init.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: init.len() });
        }
        if let Some(&l) = init.labels().iter().find(|&&l| l as usize >= self.num_labels) {
            return Err(Error::InvalidConfig(format!(
                "initial label {l} outside the {} energy labels",
                self.num_labels
            )));
        }
        if !(self.lambda >= 0.0) || self.edges.iter().any(|&(f, g, w)| !(w >= 0.0) || f >= n || g >= n) {
            return Err(Error::InvalidConfig("pairwise weights and lambda must be non-negative".into()));
        }
        for f in 0..n {
            if (0..self.num_labels).all(|l| !self.unary(f, l).is_finite()) {
                return Err(Error::InfeasibleUnary(f));
            }
            if (0..self.num_labels).any(|l| self.unary(f, l) < 0.0 || self.unary(f, l).is_nan()) {
                return Err(Error::InvalidConfig(format!("negative or NaN unary cost at face {f}")));
            }
        }
        Ok(())
    }
}

/// Runs up to `sweeps` passes of expansion moves over labels `0..L`,
/// stopping early after a pass that changes nothing. Each move is solved
/// exactly by min-cut and kept only if it does not raise the energy.
pub fn alpha_expansion(energy: &CutEnergy, init: &FaceLabeling, sweeps: usize) -> Result<FaceLabeling> {
    Ok(alpha_expansion_traced(energy, init, sweeps)?.0)
}

/// [`alpha_expansion`] plus the energy before the first move and after
/// every move.
pub fn alpha_expansion_traced(energy: &CutEnergy, init: &FaceLabeling, sweeps: usize) -> Result<(FaceLabeling, Vec<f64>)> {
    energy.validate(init)?;
    let mut labels = init.labels().to_vec();
    let mut current = energy.energy(&labels);
    let mut trace = vec![current];
    let big = forbidden_cost(energy);
    for _ in 0..sweeps {
        let mut changed = false;
        for alpha in 0..energy.num_labels as u32 {
            let proposal = expansion_move(energy, &labels, alpha, big);
            if proposal != labels {
                let e = energy.energy(&proposal);
                if e <= current {
                    changed = true;
                    labels = proposal;
                    current = e;
                }
            }
            trace.push(current);
        }
        if !changed {
            break;
        }
    }
    Ok((FaceLabeling::new(labels), trace))
}

/// Stand-in for infinite unaries: larger than any finite labeling's energy.
fn forbidden_cost(energy: &CutEnergy) -> f64 {
    let finite: f64 = energy.unary.iter().filter(|c| c.is_finite()).sum();
    let pairwise: f64 = energy.edges.iter().map(|e| e.2).sum();
    1.0 + 2.0 * (finite + energy.lambda * pairwise)
}

/// Best labeling reachable from `labels` by switching any subset of faces to
/// `alpha`. Binary variable 0 keeps the current label (source side), 1
/// switches (sink side); among optimal moves the fewest faces switch.
fn expansion_move(energy: &CutEnergy, labels: &[u32], alpha: u32, big: f64) -> Vec<u32> {
    let n = labels.len();
    let (s, t) = (n, n + 1);
    let cost = |f: usize, l: u32| {
        let c = energy.unary(f, l as usize);
        if c.is_finite() { c } else { big }
    };
    // Costs of keeping (e0) and switching (e1).
    let mut e0: Vec<f64> = (0..n).map(|f| cost(f, labels[f])).collect();
    let mut e1: Vec<f64> = (0..n).map(|f| cost(f, alpha)).collect();
    let mut graph = FlowGraph::new(n + 2);
    for &(p, q, w) in &energy.edges {
        let w = energy.lambda * w;
        if w == 0.0 {
            continue;
        }
        let (lp, lq) = (labels[p], labels[q]);
        match (lp == alpha, lq == alpha) {
            (true, true) => {}
            (true, false) => e0[q] += w,
            (false, true) => e0[p] += w,
            (false, false) => {
                // Pair table: A = E(0,0), B = E(0,1), C = E(1,0), D = E(1,1).
                let a = if lp != lq { w } else { 0.0 };
                let (b, c, d) = (w, w, 0.0);
                // E = A + (C − A)·x_p + (D − C)·x_q + (B + C − A − D)·(1 − x_p)·x_q
                e0[p] += a;
                e1[p] += c;
                e1[q] += d - c;
                graph.add_edge(p, q, b + c - a - d, 0.0);
            }
        }
    }
    for f in 0..n {
        if labels[f] == alpha {
            continue;
        }
        let m = e0[f].min(e1[f]);
        graph.add_edge(s, f, e1[f] - m, 0.0);
        graph.add_edge(f, t, e0[f] - m, 0.0);
    }
    graph.max_flow(s, t);
    let switch = graph.sink_side(t);
    (0..n).map(|f| if switch[f] { alpha } else { labels[f] }).collect()
}
