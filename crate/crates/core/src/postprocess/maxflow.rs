//! Dinic's max-flow on real capacities, sized for graph-cut energy moves.

use std::collections::VecDeque;

/// Residual capacities at or below this are treated as saturated.
const EPS: f64 = 1e-12;

#[derive(Clone, Debug, Default)]
pub struct FlowGraph {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        FlowGraph {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.head.len()
    }

    /// Adds `u → v` with capacity `cap` and `v → u` with `rev_cap`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64, rev_cap: f64) {
        debug_assert!(cap >= 0.0 && rev_cap >= 0.0, "negative capacity");
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(cap);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(rev_cap);
    }

    /// Maximum flow from `s` to `t`; capacities become residuals.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.num_nodes();
        let mut flow = 0.0;
        let mut level = vec![usize::MAX; n];
        let mut next = vec![0usize; n];
        while self.bfs(s, t, &mut level) {
            next.iter_mut().for_each(|x| *x = 0);
            loop {
                let pushed = self.dfs(s, t, f64::INFINITY, &level, &mut next);
                if pushed <= EPS {
                    break;
                }
                flow += pushed;
            }
        }
        flow
    }

    fn bfs(&self, s: usize, t: usize, level: &mut [usize]) -> bool {
        level.iter_mut().for_each(|l| *l = usize::MAX);
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > EPS && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level[t] != usize::MAX
    }

    /// Iterative blocking-flow step: finds one augmenting path in the level
    /// graph and pushes its bottleneck.
    fn dfs(&mut self, s: usize, t: usize, limit: f64, level: &[usize], next: &mut [usize]) -> f64 {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                let bottleneck = path.iter().map(|&e| self.cap[e]).fold(limit, f64::min);
                for &e in &path {
                    self.cap[e] -= bottleneck;
                    self.cap[e ^ 1] += bottleneck;
                }
                return bottleneck;
            }
            let mut advanced = false;
            while next[u] < self.head[u].len() {
                let e = self.head[u][next[u]];
                let v = self.to[e];
                if self.cap[e] > EPS && level[v] == level[u] + 1 {
                    path.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                // Dead end: retreat and skip the edge that led here.
                match path.pop() {
                    Some(e) => {
                        u = self.to[e ^ 1];
                        next[u] += 1;
                    }
                    None => return 0.0,
                }
            }
        }
    }

    /// Nodes reachable from `s` in the residual graph (the source side of a
    /// minimum cut after [`FlowGraph::max_flow`]).
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > EPS && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Nodes that can still reach `t` in the residual graph: the smallest
    /// sink side among all minimum cuts.
    pub fn sink_side(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes()];
        seen[t] = true;
        let mut queue = VecDeque::from([t]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.head[v] {
                // `e ^ 1` runs from `to[e]` into `v`.
                let u = self.to[e];
                if self.cap[e ^ 1] > EPS && !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }
}
