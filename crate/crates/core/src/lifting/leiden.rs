//! Leiden community detection (local moving, refinement, aggregation) for
//! the constant Potts model and modularity.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    /// Constant Potts model: `Σ_c e_c − γ·n_c(n_c − 1)/2`.
    Cpm,
    /// Modularity: `(1/m)·Σ_c e_c − γ·K_c²/(4m)`.
    Modularity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LeidenParams {
    pub resolution: f64,
    pub quality: Quality,
    pub seed: u64,
    /// Upper bound on full Leiden passes; stops earlier once a pass changes
    /// nothing.
    pub max_iterations: usize,
    /// Independent runs with derived seeds; the best quality wins, ties to
    /// the earliest run.
    pub restarts: usize,
}

impl Default for LeidenParams {
    fn default() -> Self {
        LeidenParams {
            resolution: 0.0,
            quality: Quality::Cpm,
            seed: 0,
            max_iterations: 10,
            restarts: 8,
        }
    }
}

/// Quality of `membership` on the graph `(n, edges)`. Duplicate edges add
/// their weights; self-loops count once.
pub fn partition_quality(n: usize, edges: &[(usize, usize, f64)], membership: &[usize], params: &LeidenParams) -> f64 {
    assert_eq!(membership.len(), n);
    let mut internal: HashMap<usize, f64> = HashMap::new();
    let mut strength: HashMap<usize, f64> = HashMap::new();
    let mut sizes: HashMap<usize, f64> = HashMap::new();
    let mut total = 0.0;
    for &(a, b, w) in edges {
        total += w;
        if membership[a] == membership[b] {
            *internal.entry(membership[a]).or_default() += w;
        }
        *strength.entry(membership[a]).or_default() += w;
        *strength.entry(membership[b]).or_default() += w;
    }
    for &c in membership {
        *sizes.entry(c).or_default() += 1.0;
    }
    let e: f64 = internal.values().sum();
    let g = params.resolution;
    match params.quality {
        Quality::Cpm => e - g * sizes.values().map(|n| n * (n - 1.0) / 2.0).sum::<f64>(),
        Quality::Modularity => {
            if total == 0.0 {
                return 0.0;
            }
            (e - g * strength.values().map(|k| k * k).sum::<f64>() / (4.0 * total)) / total
        }
    }
}

/// Graph at one aggregation level.
#[derive(Clone, Debug)]
struct Level {
    /// Neighbour lists without self-loops, merged per neighbour.
    adj: Vec<Vec<(usize, f64)>>,
    /// Node size for CPM or strength for modularity.
    weight: Vec<f64>,
}

impl Level {
    fn len(&self) -> usize {
        self.adj.len()
    }
}

struct Objective {
    /// Gain of adding node `v` to community `B` is `w(v, B) − factor·s_v·S_B`.
    factor: f64,
}

/// Community membership per node; community IDs are dense and ordered by
/// their smallest node.
pub fn leiden(n: usize, edges: &[(usize, usize, f64)], params: &LeidenParams) -> Vec<usize> {
    leiden_traced(n, edges, params).0
}

/// [`leiden`] plus the quality after each full pass of the winning run.
pub fn leiden_traced(n: usize, edges: &[(usize, usize, f64)], params: &LeidenParams) -> (Vec<usize>, Vec<f64>) {
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut adj_maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    let mut strength = vec![0.0; n];
    let mut total = 0.0;
    for &(a, b, w) in edges {
        assert!(a < n && b < n, "edge endpoint out of range");
        total += w;
        strength[a] += w;
        strength[b] += w;
        if a != b {
            *adj_maps[a].entry(b).or_default() += w;
            *adj_maps[b].entry(a).or_default() += w;
        }
    }
    let (weight, factor) = match params.quality {
        Quality::Cpm => (vec![1.0; n], params.resolution),
        Quality::Modularity => {
            let f = if total > 0.0 { params.resolution / (2.0 * total) } else { 0.0 };
            (strength, f)
        }
    };
    let base = Level {
        adj: adj_maps.into_iter().map(|m| m.into_iter().collect()).collect(),
        weight,
    };
    let obj = Objective { factor };
    let mut best: Option<(Vec<usize>, Vec<f64>)> = None;
    for run in 0..params.restarts.max(1) as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(run);
        let mut membership: Vec<usize> = (0..n).collect();
        let mut trace = vec![partition_quality(n, edges, &membership, params)];
        for _ in 0..params.max_iterations.max(1) {
            let next = renumber(&leiden_pass(&base, &obj, &membership, &mut rng));
            trace.push(partition_quality(n, edges, &next, params));
            if next == membership {
                break;
            }
            membership = next;
        }
        if best.as_ref().is_none_or(|(_, t)| trace.last() > t.last()) {
            best = Some((membership, trace));
        }
    }
    best.expect("at least one run")
}

/// One full Leiden run starting from `initial`.
fn leiden_pass(base: &Level, obj: &Objective, initial: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut level = base.clone();
    // Base node -> node of the current level.
    let mut node_of: Vec<usize> = (0..base.len()).collect();
    let mut partition = renumber(initial);
    loop {
        move_nodes_fast(&level, obj, &mut partition, rng);
        partition = renumber(&partition);
        let communities = partition.iter().max().map_or(0, |&m| m + 1);
        if communities == level.len() {
            break;
        }
        let refined = refine(&level, obj, &partition, rng);
        let refined_count = refined.iter().max().map_or(0, |&m| m + 1);
        // Refinement that merges nothing would stall; aggregate by the
        // partition itself instead.
        let grouping = if refined_count < level.len() { refined } else { partition.clone() };
        let (next, groups) = aggregate(&level, &grouping);
        let mut next_partition = vec![0; next.len()];
        for (g, &first) in groups.iter().enumerate() {
            next_partition[g] = partition[first];
        }
        for v in node_of.iter_mut() {
            *v = grouping[*v];
        }
        level = next;
        partition = renumber(&next_partition);
    }
    node_of.iter().map(|&v| partition[v]).collect()
}

/// Queue-based local moving; each node moves to the neighbouring (or an
/// empty) community with the largest strictly positive gain.
fn move_nodes_fast(level: &Level, obj: &Objective, partition: &mut [usize], rng: &mut ChaCha8Rng) {
    let n = level.len();
    let mut comm_weight = vec![0.0; n];
    let mut comm_size = vec![0usize; n];
    for v in 0..n {
        comm_weight[partition[v]] += level.weight[v];
        comm_size[partition[v]] += 1;
    }
    let mut empty: Vec<usize> = (0..n).filter(|&c| comm_size[c] == 0).rev().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut queue: VecDeque<usize> = order.into_iter().collect();
    let mut queued = vec![true; n];
    let mut links: HashMap<usize, f64> = HashMap::new();

    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let own = partition[v];
        let sv = level.weight[v];
        links.clear();
        for &(u, w) in &level.adj[v] {
            *links.entry(partition[u]).or_default() += w;
        }
        comm_weight[own] -= sv;
        comm_size[own] -= 1;
        let gain = |c: usize, links: &HashMap<usize, f64>| {
            links.get(&c).copied().unwrap_or(0.0) - obj.factor * sv * comm_weight[c]
        };
        let stay = gain(own, &links);
        let (mut best, mut best_gain) = (own, stay);
        let mut candidates: Vec<usize> = links.keys().copied().collect();
        candidates.sort_unstable();
        for c in candidates {
            let g = gain(c, &links);
            if g > best_gain {
                best = c;
                best_gain = g;
            }
        }
        if comm_size[own] > 0 && best_gain < 0.0 {
            if let Some(&e) = empty.last() {
                best = e;
            }
        }
        comm_weight[best] += sv;
        comm_size[best] += 1;
        if best != own {
            if empty.last() == Some(&best) {
                empty.pop();
            }
            if comm_size[own] == 0 {
                empty.push(own);
            }
            partition[v] = best;
            for &(u, _) in &level.adj[v] {
                if !queued[u] && partition[u] != best {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
}

/// Greedy refinement: inside each community, well-connected singletons merge
/// into the well-connected sub-community with the best positive gain.
fn refine(level: &Level, obj: &Objective, partition: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = level.len();
    let mut refined: Vec<usize> = (0..n).collect();
    let mut sub_weight: Vec<f64> = level.weight.clone();
    let mut sub_size = vec![1usize; n];
    // External link weight of each sub-community to the rest of its community.
    let mut sub_external = vec![0.0; n];
    let mut comm_weight: HashMap<usize, f64> = HashMap::new();
    for v in 0..n {
        *comm_weight.entry(partition[v]).or_default() += level.weight[v];
        sub_external[v] = level.adj[v]
            .iter()
            .filter(|&&(u, _)| partition[u] == partition[v])
            .map(|&(_, w)| w)
            .sum();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut links: HashMap<usize, f64> = HashMap::new();
    for v in order {
        if sub_size[refined[v]] != 1 {
            continue;
        }
        let c = partition[v];
        let total_c = comm_weight[&c];
        let sv = level.weight[v];
        if sub_external[v] < obj.factor * sv * (total_c - sv) {
            continue;
        }
        links.clear();
        for &(u, w) in &level.adj[v] {
            if partition[u] == c && u != v {
                *links.entry(refined[u]).or_default() += w;
            }
        }
        let mut candidates: Vec<usize> = links.keys().copied().collect();
        candidates.sort_unstable();
        let own = refined[v];
        let mut best: Option<(usize, f64)> = None;
        for t in candidates {
            if t == own {
                continue;
            }
            let st = sub_weight[t];
            if sub_external[t] < obj.factor * st * (total_c - st) {
                continue;
            }
            let g = links[&t] - obj.factor * sv * st;
            if g > 0.0 && best.is_none_or(|(_, bg)| g > bg) {
                best = Some((t, g));
            }
        }
        if let Some((t, _)) = best {
            let into_t = links[&t];
            refined[v] = t;
            sub_weight[t] += sv;
            sub_size[t] += 1;
            sub_size[own] = 0;
            // Links between v and t become internal.
            sub_external[t] += sub_external[v] - 2.0 * into_t;
        }
    }
    renumber(&refined)
}

/// Collapses each group to one node. Returns the new level and, per group,
/// its first member.
fn aggregate(level: &Level, grouping: &[usize]) -> (Level, Vec<usize>) {
    let k = grouping.iter().max().map_or(0, |&m| m + 1);
    let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
    let mut weight = vec![0.0; k];
    let mut first = vec![usize::MAX; k];
    for v in 0..level.len() {
        let g = grouping[v];
        weight[g] += level.weight[v];
        if first[g] == usize::MAX {
            first[g] = v;
        }
        for &(u, w) in &level.adj[v] {
            let h = grouping[u];
            if h != g {
                *adj[g].entry(h).or_default() += w;
            }
        }
    }
    let level = Level {
        adj: adj.into_iter().map(|m| m.into_iter().collect()).collect(),
        weight,
    };
    (level, first)
}

/// Dense IDs in order of first appearance.
fn renumber(membership: &[usize]) -> Vec<usize> {
    let mut map: HashMap<usize, usize> = HashMap::new();
    membership
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}
