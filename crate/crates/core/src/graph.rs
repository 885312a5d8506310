//! Betweenness, closeness and edge-betweenness centralities on the cyber
//! graph, which mirrors the in-service branch topology one node per bus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::grid::Network;

/// Unweighted, undirected simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyberGraph {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFactors {
    pub bc: Vec<f64>,
    pub cc: Vec<f64>,
    pub ebc: Vec<f64>,
}

impl GraphFactors {
    /// `BC + CC + EBC` for one node.
    pub fn centrality_sum(&self, node: usize) -> f64 {
        self.bc[node] + self.cc[node] + self.ebc[node]
    }
}

impl CyberGraph {
    /// Builds a graph from an edge list; duplicates and self loops are dropped.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range");
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        let edges = adj
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect();
        CyberGraph { adj, edges }
    }

    pub fn from_network(net: &Network) -> Self {
        let edges: Vec<_> = net.active_branches().map(|(_, b)| (b.from_bus, b.to_bus)).collect();
        CyberGraph::new(net.n_buses(), edges)
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    fn edge_index(&self, a: usize, b: usize) -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search(&key).expect("edge present")
    }

    /// BFS hop distances from `s`; `usize::MAX` when unreachable.
    pub fn distances(&self, s: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_nodes()];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Single-source Brandes pass: node and edge dependencies from `s`.
    fn dependencies(&self, s: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_nodes();
        let mut sigma = vec![0.0_f64; n];
        let mut dist = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        let mut delta = vec![0.0_f64; n];
        let mut edge = vec![0.0_f64; self.edges.len()];
        for &w in order.iter().rev() {
            for &v in &self.adj[w] {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                    edge[self.edge_index(v, w)] += c;
                    delta[v] += c;
                }
            }
        }
        delta[s] = 0.0;
        (delta, edge)
    }

    /// Unnormalized node and edge betweenness over unordered pairs.
    fn raw_betweenness(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_nodes();
        let partial: Vec<(Vec<f64>, Vec<f64>)> =
            (0..n).into_par_iter().map(|s| self.dependencies(s)).collect();
        let mut bc = vec![0.0; n];
        let mut ebc = vec![0.0; self.edges.len()];
        for (d, e) in partial {
            bc.iter_mut().zip(d).for_each(|(a, b)| *a += b);
            ebc.iter_mut().zip(e).for_each(|(a, b)| *a += b);
        }
        // each unordered pair was counted from both ends
        bc.iter_mut().for_each(|x| *x /= 2.0);
        ebc.iter_mut().for_each(|x| *x /= 2.0);
        (bc, ebc)
    }

    /// Edge betweenness normalized by the number of unordered node pairs,
    /// aligned with [`CyberGraph::edges`].
    pub fn edge_betweenness(&self) -> Vec<f64> {
        let n = self.n_nodes();
        if n < 2 {
            return vec![0.0; self.edges.len()];
        }
        let pairs = (n * (n - 1)) as f64 / 2.0;
        self.raw_betweenness().1.into_iter().map(|x| x / pairs).collect()
    }
}

/// Node betweenness normalized by `2 / ((n-1)(n-2))`.
pub fn compute_bc(g: &CyberGraph) -> Vec<f64> {
    let n = g.n_nodes();
    if n < 3 {
        return vec![0.0; n];
    }
    let scale = 2.0 / ((n - 1) * (n - 2)) as f64;
    g.raw_betweenness().0.into_iter().map(|x| x * scale).collect()
}

/// Closeness `(r-1) / sum of distances` over the `r` nodes reachable from
/// each node; isolated nodes score zero.
pub fn compute_cc(g: &CyberGraph) -> Vec<f64> {
    (0..g.n_nodes())
        .into_par_iter()
        .map(|v| {
            let (count, total) = g
                .distances(v)
                .into_iter()
                .filter(|&d| d != usize::MAX)
                .fold((0usize, 0usize), |(c, t), d| (c + 1, t + d));
            if total == 0 {
                0.0
            } else {
                (count - 1) as f64 / total as f64
            }
        })
        .collect()
}

/// Per-node maximum of normalized edge betweenness over incident edges.
pub fn compute_ebc(g: &CyberGraph) -> Vec<f64> {
    let scores = g.edge_betweenness();
    let mut node = vec![0.0_f64; g.n_nodes()];
    for (&(a, b), &s) in g.edges().iter().zip(&scores) {
        node[a] = node[a].max(s);
        node[b] = node[b].max(s);
    }
    node
}

pub fn compute_graph_factors(g: &CyberGraph) -> GraphFactors {
    let n = g.n_nodes();
    let (raw_bc, raw_ebc) = g.raw_betweenness();
    let bc = if n < 3 {
        vec![0.0; n]
    } else {
        let scale = 2.0 / ((n - 1) * (n - 2)) as f64;
        raw_bc.into_iter().map(|x| x * scale).collect()
    };
    let mut ebc = vec![0.0_f64; n];
    if n >= 2 {
        let pairs = (n * (n - 1)) as f64 / 2.0;
        for (&(a, b), &s) in g.edges().iter().zip(&raw_ebc) {
            ebc[a] = ebc[a].max(s / pairs);
            ebc[b] = ebc[b].max(s / pairs);
        }
    }
    GraphFactors { bc, cc: compute_cc(g), ebc }
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Brute-force centralities by explicit enumeration of every shortest path.
    use super::*;

    fn all_shortest_paths(g: &CyberGraph, s: usize, t: usize) -> Vec<Vec<usize>> {
        let dt = g.distances(t);
        if dt[s] == usize::MAX {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut stack = vec![vec![s]];
        while let Some(path) = stack.pop() {
            let v = *path.last().unwrap();
            if v == t {
                out.push(path);
                continue;
            }
            for &w in g.neighbors(v) {
                if dt[w] + 1 == dt[v] {
                    let mut p = path.clone();
                    p.push(w);
                    stack.push(p);
                }
            }
        }
        out
    }

    pub fn factors(g: &CyberGraph) -> GraphFactors {
        let n = g.n_nodes();
        let mut bc = vec![0.0; n];
        let mut edge = vec![0.0; g.edges().len()];
        for s in 0..n {
            for t in s + 1..n {
                let paths = all_shortest_paths(g, s, t);
                let total = paths.len() as f64;
                for p in &paths {
                    for &v in &p[1..p.len() - 1] {
                        bc[v] += 1.0 / total;
                    }
                    for w in p.windows(2) {
                        edge[g.edge_index(w[0], w[1])] += 1.0 / total;
                    }
                }
            }
        }
        let bc = if n < 3 {
            vec![0.0; n]
        } else {
            bc.iter().map(|x| x * 2.0 / ((n - 1) * (n - 2)) as f64).collect()
        };
        let mut ebc = vec![0.0_f64; n];
        if n >= 2 {
            let pairs = (n * (n - 1)) as f64 / 2.0;
            for (&(a, b), &s) in g.edges().iter().zip(&edge) {
                ebc[a] = ebc[a].max(s / pairs);
                ebc[b] = ebc[b].max(s / pairs);
            }
        }
        let cc = (0..n)
            .map(|v| {
                let reach: Vec<usize> = (0..n)
                    .filter(|&u| u != v)
                    .filter_map(|u| all_shortest_paths(g, v, u).first().map(|p| p.len() - 1))
                    .collect();
                let total: usize = reach.iter().sum();
                if total == 0 {
                    0.0
                } else {
                    reach.len() as f64 / total as f64
                }
            })
            .collect();
        GraphFactors { bc, cc, ebc }
    }
}
