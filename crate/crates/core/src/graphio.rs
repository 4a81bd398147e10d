//! Labeled directed graphs, their JSON file format, and the two input
//! corruptors: random-walk sampling and ambiguous-node noise.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64`, so a corpus is
//! reproducible from `(graph, parameter, seed)` on any platform.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("dangling edge {0:?}")]
    DanglingEdge((usize, usize, usize)),
    #[error("unknown label id in edge {0:?}")]
    UnknownLabel((usize, usize, usize)),
    #[error("duplicate edge {0:?}")]
    DuplicateEdge((usize, usize, usize)),
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("unvisited counts on missing node {0}")]
    UnvisitedNode(usize),
    #[error("unvisited count for unknown label {1} on node {0}")]
    UnvisitedLabel(usize, usize),
    #[error("ambiguous node {0} does not exist")]
    AmbiguousNode(usize),
    #[error("{0}")]
    Parameter(String),
}

/// Node ids are `0..num_nodes`; edges are `(src, dst, label)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    pub num_nodes: usize,
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize, usize)>,
    /// Per node, outgoing edges known to exist but not observed, by label.
    pub unvisited: BTreeMap<usize, BTreeMap<usize, usize>>,
    pub ambiguous: BTreeSet<usize>,
}

#[derive(Deserialize)]
struct GraphFile {
    nodes: usize,
    labels: Vec<String>,
    edges: Vec<(usize, usize, usize)>,
    #[serde(default)]
    unvisited: BTreeMap<usize, BTreeMap<usize, usize>>,
    #[serde(default)]
    ambiguous: Vec<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub labels: usize,
    pub unvisited_total: usize,
    pub ambiguous_count: usize,
}

impl LabeledGraph {
    pub fn new(num_nodes: usize, labels: Vec<String>, edges: Vec<(usize, usize, usize)>) -> Self {
        LabeledGraph {
            num_nodes,
            labels,
            edges,
            ..LabeledGraph::default()
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let mut names = HashSet::new();
        for l in &self.labels {
            if !names.insert(l) {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        let mut seen = HashSet::with_capacity(self.edges.len());
        for &e in &self.edges {
            if e.0 >= self.num_nodes || e.1 >= self.num_nodes {
                return Err(GraphError::DanglingEdge(e));
            }
            if e.2 >= self.labels.len() {
                return Err(GraphError::UnknownLabel(e));
            }
            if !seen.insert(e) {
                return Err(GraphError::DuplicateEdge(e));
            }
        }
        for (&n, counts) in &self.unvisited {
            if n >= self.num_nodes {
                return Err(GraphError::UnvisitedNode(n));
            }
            if let Some((&l, _)) = counts.iter().find(|(&l, _)| l >= self.labels.len()) {
                return Err(GraphError::UnvisitedLabel(n, l));
            }
        }
        if let Some(&n) = self.ambiguous.iter().find(|&&n| n >= self.num_nodes) {
            return Err(GraphError::AmbiguousNode(n));
        }
        Ok(())
    }

    /// No unvisited counts and no ambiguous nodes.
    pub fn is_complete(&self) -> bool {
        self.unvisited.values().all(|m| m.values().all(|&c| c == 0)) && self.ambiguous.is_empty()
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            nodes: self.num_nodes,
            edges: self.edges.len(),
            labels: self.labels.len(),
            unvisited_total: self.unvisited.values().flat_map(|m| m.values()).sum(),
            ambiguous_count: self.ambiguous.len(),
        }
    }

    /// Outgoing `(dst, label)` pairs per node, in edge order.
    pub fn out_adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(s, d, l) in &self.edges {
            adj[s].push((d, l));
        }
        adj
    }

    pub fn unvisited_count(&self, node: usize, label: usize) -> usize {
        self.unvisited
            .get(&node)
            .and_then(|m| m.get(&label))
            .copied()
            .unwrap_or(0)
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let f: GraphFile = serde_json::from_str(text)?;
        let mut g = LabeledGraph {
            num_nodes: f.nodes,
            labels: f.labels,
            edges: f.edges,
            unvisited: f.unvisited,
            ambiguous: f.ambiguous.into_iter().collect(),
        };
        g.unvisited.retain(|_, m| {
            m.retain(|_, c| *c > 0);
            !m.is_empty()
        });
        g.validate()?;
        Ok(g)
    }

    /// Deterministic serialization: one edge per line, maps in key order.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"nodes\": {},", self.num_nodes);
        let _ = writeln!(out, "  \"labels\": {},", serde_json::to_string(&self.labels).unwrap());
        out.push_str("  \"edges\": [");
        for (i, (s, d, l)) in self.edges.iter().enumerate() {
            let _ = write!(out, "{}\n    [{s},{d},{l}]", if i == 0 { "" } else { "," });
        }
        out.push_str(if self.edges.is_empty() { "],\n" } else { "\n  ],\n" });
        let _ = writeln!(out, "  \"unvisited\": {},", serde_json::to_string(&self.unvisited).unwrap());
        let amb: Vec<usize> = self.ambiguous.iter().copied().collect();
        let _ = writeln!(out, "  \"ambiguous\": {}", serde_json::to_string(&amb).unwrap());
        out.push_str("}\n");
        out
    }

    pub fn load(path: &Path) -> Result<Self, GraphError> {
        LabeledGraph::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Graphviz rendering, for inspection only.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n");
        for n in 0..self.num_nodes {
            let shape = if self.ambiguous.contains(&n) { "box" } else { "ellipse" };
            let _ = writeln!(out, "  n{n} [shape={shape}];");
        }
        for &(s, d, l) in &self.edges {
            let _ = writeln!(out, "  n{s} -> n{d} [label=\"{}\"];", self.labels[l]);
        }
        out.push_str("}\n");
        out
    }

    /// Renumbers nodes by `perm` (old id to new id) and relabels by `label_perm`.
    pub fn permuted(&self, perm: &[usize], label_perm: &[usize]) -> LabeledGraph {
        let mut labels = vec![String::new(); self.labels.len()];
        for (old, name) in self.labels.iter().enumerate() {
            labels[label_perm[old]] = name.clone();
        }
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(s, d, l)| (perm[s], perm[d], label_perm[l]))
            .collect();
        edges.sort_unstable();
        LabeledGraph {
            num_nodes: self.num_nodes,
            labels,
            edges,
            unvisited: self
                .unvisited
                .iter()
                .map(|(&n, m)| (perm[n], m.iter().map(|(&l, &c)| (label_perm[l], c)).collect()))
                .collect(),
            ambiguous: self.ambiguous.iter().map(|&n| perm[n]).collect(),
        }
    }
}

fn require_complete(g: &LabeledGraph) -> Result<(), GraphError> {
    if !g.is_complete() {
        return Err(GraphError::Parameter("input graph must be complete and noise free".into()));
    }
    Ok(())
}

/// Number of edges a walk at `percent` must traverse.
pub fn sample_quota(num_edges: usize, percent: u32) -> usize {
    (percent as usize * num_edges).div_ceil(100)
}

/// Number of edges made noisy at `q` percent noise-free edges (half-up rounding).
pub fn noise_count(num_edges: usize, q: u32) -> usize {
    (2 * (100 - q as usize) * num_edges + 100) / 200
}

/// Random walk that stops once `ceil(p/100 * |E|)` distinct edges are traversed.
///
/// The walk starts at a uniformly random node and follows a uniformly random
/// out-edge while the current node still has an untraversed one. Otherwise it
/// jumps to a random visited node that does, or failing that to a random
/// unvisited node. Visited nodes are renumbered in increasing original id.
pub fn sample_partial(g: &LabeledGraph, percent: u32, seed: u64) -> Result<LabeledGraph, GraphError> {
    if !(1..=100).contains(&percent) {
        return Err(GraphError::Parameter(format!("percentage {percent} outside 1..100")));
    }
    require_complete(g)?;
    if percent == 100 || g.num_nodes == 0 {
        return Ok(g.clone());
    }
    let quota = sample_quota(g.edges.len(), percent);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.num_nodes];
    for (i, &(s, _, _)) in g.edges.iter().enumerate() {
        out[s].push(i);
    }
    let mut remaining: Vec<usize> = out.iter().map(|o| o.len()).collect();
    let mut traversed = vec![false; g.edges.len()];
    let mut visited = vec![false; g.num_nodes];
    let mut count = 0;
    let mut cur = rng.gen_range(0..g.num_nodes);
    visited[cur] = true;
    while count < quota {
        if remaining[cur] > 0 {
            let e = out[cur][rng.gen_range(0..out[cur].len())];
            if !traversed[e] {
                traversed[e] = true;
                remaining[cur] -= 1;
                count += 1;
            }
            cur = g.edges[e].1;
            visited[cur] = true;
            continue;
        }
        let open: Vec<usize> = (0..g.num_nodes).filter(|&n| visited[n] && remaining[n] > 0).collect();
        if !open.is_empty() {
            cur = open[rng.gen_range(0..open.len())];
        } else {
            let fresh: Vec<usize> = (0..g.num_nodes).filter(|&n| !visited[n]).collect();
            cur = fresh[rng.gen_range(0..fresh.len())];
            visited[cur] = true;
        }
    }
    let mut new_id = vec![usize::MAX; g.num_nodes];
    let mut n = 0;
    for v in 0..g.num_nodes {
        if visited[v] {
            new_id[v] = n;
            n += 1;
        }
    }
    let mut result = LabeledGraph {
        num_nodes: n,
        labels: g.labels.clone(),
        ..LabeledGraph::default()
    };
    for (i, &(s, d, l)) in g.edges.iter().enumerate() {
        if traversed[i] {
            result.edges.push((new_id[s], new_id[d], l));
        } else if visited[s] {
            *result
                .unvisited
                .entry(new_id[s])
                .or_default()
                .entry(l)
                .or_insert(0) += 1;
        }
    }
    Ok(result)
}

/// Makes `round((100-q)% of |E|)` edges noisy. A noisy edge `(n, n', l)`
/// becomes `(n, n*, l)` for a fresh ambiguous node `n*`, which receives a copy
/// of every out-edge of `n'` in the input graph.
pub fn corrupt_noise(g: &LabeledGraph, q: u32, seed: u64) -> Result<LabeledGraph, GraphError> {
    if q > 100 {
        return Err(GraphError::Parameter(format!("percentage {q} outside 0..100")));
    }
    require_complete(g)?;
    let k = noise_count(g.edges.len(), q);
    if k == 0 {
        return Ok(g.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = sample(&mut rng, g.edges.len(), k).into_vec();
    chosen.sort_unstable();
    let adj = g.out_adjacency();
    let mut result = g.clone();
    for (i, &e) in chosen.iter().enumerate() {
        let (s, d, l) = g.edges[e];
        let star = g.num_nodes + i;
        result.edges[e] = (s, star, l);
        result.ambiguous.insert(star);
        for &(d2, l2) in &adj[d] {
            result.edges.push((star, d2, l2));
        }
    }
    result.num_nodes = g.num_nodes + k;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> LabeledGraph {
        LabeledGraph::new(3, vec!["a".into(), "b".into()], vec![(0, 1, 0), (1, 2, 0), (2, 0, 1), (0, 2, 1)])
    }

    #[test]
    fn dangling_edge_is_rejected() {
        let text = r#"{"nodes":2,"labels":["a"],"edges":[[0,2,0]]}"#;
        assert!(matches!(LabeledGraph::from_json(text), Err(GraphError::DanglingEdge(_))));
    }

    #[test]
    fn duplicate_edge_is_rejected() {
        let text = r#"{"nodes":2,"labels":["a"],"edges":[[0,1,0],[0,1,0]]}"#;
        let err = LabeledGraph::from_json(text).unwrap_err();
        assert!(err.to_string().contains("duplicate edge"));
    }

    #[test]
    fn json_round_trip_with_annotations() {
        let mut g = triangle();
        g.unvisited.insert(1, BTreeMap::from([(1, 2)]));
        g.ambiguous.insert(2);
        let back = LabeledGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), g.to_json());
    }

    #[test]
    fn empty_graph_stats() {
        let s = LabeledGraph::default().stats();
        assert_eq!((s.nodes, s.edges, s.labels, s.unvisited_total, s.ambiguous_count), (0, 0, 0, 0, 0));
    }

    #[test]
    fn noise_rounding() {
        assert_eq!(noise_count(34, 80), 7);
        assert_eq!(noise_count(10, 95), 1);
        assert_eq!(noise_count(10, 100), 0);
        assert_eq!(sample_quota(2140, 20), 428);
        assert_eq!(sample_quota(34, 60), 21);
    }

    #[test]
    fn single_noisy_edge_adds_copies() {
        let g = triangle();
        let noisy = corrupt_noise(&g, 75, 3).unwrap();
        assert_eq!(noisy.ambiguous.len(), 1);
        assert_eq!(noisy.num_nodes, 4);
        let star = 3;
        let (_, d, _) = *g
            .edges
            .iter()
            .zip(&noisy.edges)
            .find(|(a, b)| a != b)
            .map(|(a, _)| a)
            .unwrap();
        let k = g.edges.iter().filter(|e| e.0 == d).count();
        assert_eq!(noisy.edges.len(), g.edges.len() + k);
        assert_eq!(noisy.edges.iter().filter(|e| e.0 == star).count(), k);
    }
}
