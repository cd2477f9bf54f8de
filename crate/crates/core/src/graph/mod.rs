//! Undirected simple graphs: representation, metrics, neighbourhood balls,
//! generators, rewiring and the plain-text interchange format.

mod generate;
mod io;
mod rewire;

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use thiserror::Error;

use crate::tree::RootedTree;

pub use generate::{generate, GraphKind, NamedGraph};
pub use io::{parse_graph, write_graph};
pub use rewire::{rewire, rewire_with_map, rewiring_schedule, RewireStep};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("ball of radius {depth} around node {root} is not a tree")]
    NotATree { root: usize, depth: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("edge {{{0}, {1}}} already exists")]
    EdgeExists(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Simple undirected graph on nodes `0..n` with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge list, rejecting loops, repeats and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub(crate) fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.node_count();
        for node in [u, v] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { node, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        match self.adjacency[u].binary_search(&v) {
            Ok(_) => return Err(GraphError::DuplicateEdge(u.min(v), u.max(v))),
            Err(pos) => self.adjacency[u].insert(pos, v),
        }
        let pos = self.adjacency[v].binary_search(&u).unwrap_err();
        self.adjacency[v].insert(pos, u);
        self.edge_count += 1;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// `Some(r)` when every node has degree `r`.
    pub fn regular_degree(&self) -> Option<usize> {
        let r = self.adjacency.first().map_or(0, Vec::len);
        self.adjacency.iter().all(|a| a.len() == r).then_some(r)
    }

    /// Breadth-first distances from `source`; `None` for unreachable nodes.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: usize, v: usize) -> Option<usize> {
        self.distances_from(u)[v]
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_forest(&self) -> bool {
        self.edge_count + self.components().len() == self.node_count()
    }

    /// Deletes `removed` and relabels the survivors `0..n'` in their original
    /// order. Returns the new graph and, for each new id, its old id.
    pub fn remove_nodes(&self, removed: &[usize]) -> (Graph, Vec<usize>) {
        let n = self.node_count();
        let mut keep = vec![true; n];
        for &v in removed {
            keep[v] = false;
        }
        let old_ids: Vec<usize> = (0..n).filter(|&v| keep[v]).collect();
        let mut new_id = vec![usize::MAX; n];
        for (i, &v) in old_ids.iter().enumerate() {
            new_id[v] = i;
        }
        let mut g = Graph::empty(old_ids.len());
        for (u, v) in self.edges() {
            if keep[u] && keep[v] {
                g.adjacency[new_id[u]].push(new_id[v]);
                g.adjacency[new_id[v]].push(new_id[u]);
                g.edge_count += 1;
            }
        }
        for adj in &mut g.adjacency {
            adj.sort_unstable();
        }
        (g, old_ids)
    }

    /// Checks the structural invariants: symmetric sorted adjacency, no loops,
    /// no repeated neighbours, consistent edge count.
    pub fn check_invariants(&self) -> bool {
        let mut degree_sum = 0;
        for (u, adj) in self.adjacency.iter().enumerate() {
            degree_sum += adj.len();
            if adj.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            for &v in adj {
                if v == u || v >= self.node_count() || self.adjacency[v].binary_search(&u).is_err() {
                    return false;
                }
            }
        }
        degree_sum == 2 * self.edge_count
    }
}

/// Girth, diameter and maximum degree. `None` stands for an infinite value:
/// girth of a forest, diameter of a disconnected graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct GraphMetrics {
    pub girth: Option<usize>,
    pub diameter: Option<usize>,
    pub max_degree: usize,
}

/// Length of a shortest cycle, `None` for forests.
///
/// A BFS from every root; a non-tree edge `(u, w)` closes a walk of length
/// `d(u) + d(w) + 1` through the root, and the minimum over all roots is the
/// girth.
pub fn girth(g: &Graph) -> Option<usize> {
    (0..g.node_count())
        .into_par_iter()
        .filter_map(|s| shortest_cycle_through(g, s))
        .min()
}

fn shortest_cycle_through(g: &Graph, source: usize) -> Option<usize> {
    let n = g.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut best: Option<usize> = None;
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        if let Some(b) = best {
            if 2 * dist[u] >= b {
                break;
            }
        }
        for &w in g.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                parent[w] = u;
                queue.push_back(w);
            } else if parent[u] != w {
                let len = dist[u] + dist[w] + 1;
                best = Some(best.map_or(len, |b| b.min(len)));
            }
        }
    }
    best
}

pub fn compute_metrics(g: &Graph) -> GraphMetrics {
    let diameter = (0..g.node_count())
        .into_par_iter()
        .map(|s| {
            let d = g.distances_from(s);
            d.iter().try_fold(0usize, |acc, x| x.map(|x| acc.max(x)))
        })
        .try_reduce(|| 0, |a, b| Some(a.max(b)));
    GraphMetrics {
        girth: girth(g),
        diameter,
        max_degree: g.max_degree(),
    }
}

/// Largest radius whose balls are guaranteed to induce trees: a cycle inside a
/// radius-`t` ball has length at most `2t + 1`, so `t = floor(g/2) - 1`.
/// Forests admit any radius.
pub fn safe_depth(metrics: &GraphMetrics) -> Option<usize> {
    metrics.girth.map(|g| (g / 2).saturating_sub(1))
}

/// The radius-`t` ball around `v`, rooted at `v`, provided it induces a tree.
pub fn extract_ball(g: &Graph, v: usize, t: usize) -> Result<RootedTree, GraphError> {
    extract_ball_within(g, v, t, None)
}

/// As [`extract_ball`], restricted to nodes flagged alive. Used for the
/// residual graphs of the cavity elimination.
pub(crate) fn extract_ball_within(
    g: &Graph,
    v: usize,
    t: usize,
    alive: Option<&[bool]>,
) -> Result<RootedTree, GraphError> {
    let n = g.node_count();
    if v >= n {
        return Err(GraphError::NodeOutOfRange { node: v, n });
    }
    let is_alive = |u: usize| alive.map_or(true, |a| a[u]);
    if !is_alive(v) {
        return Err(GraphError::PreconditionViolated(format!("node {v} was deleted")));
    }
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut labels = vec![v];
    let mut parents = vec![None];
    let mut levels = vec![0usize];
    local.insert(v, 0);
    let mut head = 0;
    while head < labels.len() {
        let u = labels[head];
        let lu = levels[head];
        if lu < t {
            for &w in g.neighbors(u) {
                if is_alive(w) && !local.contains_key(&w) {
                    local.insert(w, labels.len());
                    labels.push(w);
                    parents.push(Some(head));
                    levels.push(lu + 1);
                }
            }
        }
        head += 1;
    }
    // A connected induced subgraph on k nodes is a tree iff it has k-1 edges.
    let induced_degree_sum: usize = labels
        .iter()
        .map(|&u| g.neighbors(u).iter().filter(|w| local.contains_key(w)).count())
        .sum();
    if induced_degree_sum != 2 * (labels.len() - 1) {
        return Err(GraphError::NotATree { root: v, depth: t });
    }
    let tree = RootedTree::from_parents(&parents, t)
        .expect("BFS order yields a well-formed tree")
        .with_labels(labels);
    Ok(tree)
}
