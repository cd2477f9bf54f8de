//! Rooted trees of bounded depth and the exact computations performed on
//! them: hard-core marginals under free and fixed boundaries, certified
//! marginal intervals, and coloring marginals.

mod color;
mod decay;
mod ind;

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

pub use color::exact_tree_color_marginal;
pub use decay::{decay_experiment, decay_csv, DecayModel, DecayRow};
pub use ind::{counting_tree_marginal, interval_bounds, marginal_with_boundary, ProbInterval};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("node {0} is not on the boundary")]
    NotBoundary(usize),
    #[error("boundary condition admits no configuration")]
    InfeasibleBoundary,
    #[error("{q} colors is fewer than max degree + 1 = {needed}")]
    TooFewColors { q: usize, needed: usize },
    #[error("color {color} out of range for q = {q}")]
    ColorOutOfRange { color: usize, q: usize },
}

/// A rooted tree whose nodes are numbered so that every parent precedes its
/// children; node 0 is the root. `depth` is the nominal depth `t`: nodes at
/// level exactly `t` form the boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    level: Vec<usize>,
    depth: usize,
    labels: Vec<usize>,
}

impl RootedTree {
    /// Builds a tree from parent pointers. Requires `parents[0] == None` and
    /// `parents[i] < i` otherwise, with every level at most `depth`.
    pub fn from_parents(parents: &[Option<usize>], depth: usize) -> Result<Self, TreeError> {
        if parents.first() != Some(&None) {
            return Err(TreeError::Malformed("node 0 must be the root".into()));
        }
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        let mut level = vec![0; n];
        for (i, p) in parents.iter().enumerate().skip(1) {
            match *p {
                Some(p) if p < i => {
                    children[p].push(i);
                    level[i] = level[p] + 1;
                    if level[i] > depth {
                        return Err(TreeError::Malformed(format!(
                            "node {i} at level {} exceeds depth {depth}",
                            level[i]
                        )));
                    }
                }
                _ => {
                    return Err(TreeError::Malformed(format!(
                        "node {i} needs a parent with a smaller index"
                    )))
                }
            }
        }
        Ok(RootedTree {
            parent: parents.to_vec(),
            children,
            level,
            depth,
            labels: (0..n).collect(),
        })
    }

    pub(crate) fn with_labels(mut self, labels: Vec<usize>) -> Self {
        debug_assert_eq!(labels.len(), self.len());
        self.labels = labels;
        self
    }

    /// Depth-`t` ball of an infinite tree in which every node has degree `r`:
    /// the root has `r` children, every other non-boundary node `r - 1`.
    pub fn regular(r: usize, depth: usize) -> Self {
        Self::build(depth, |lvl| if lvl == 0 { r } else { r.saturating_sub(1) })
    }

    /// Like [`RootedTree::regular`] but the root also has `r - 1` children.
    pub fn regular_branching(r: usize, depth: usize) -> Self {
        Self::build(depth, |_| r.saturating_sub(1))
    }

    fn build(depth: usize, arity: impl Fn(usize) -> usize) -> Self {
        let mut parents = vec![None];
        let mut levels = vec![0];
        let mut i = 0;
        while i < parents.len() {
            if levels[i] < depth {
                for _ in 0..arity(levels[i]) {
                    parents.push(Some(i));
                    levels.push(levels[i] + 1);
                }
            }
            i += 1;
        }
        Self::from_parents(&parents, depth).expect("generated in BFS order")
    }

    /// Random tree with maximum degree `max_degree` and nominal depth
    /// `depth`. Each non-boundary node stops branching with probability
    /// `stop`, otherwise takes a uniform number of children between one and
    /// what the degree cap allows.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_degree: usize, depth: usize, stop: f64) -> Self {
        let mut parents = vec![None];
        let mut levels = vec![0];
        let mut i = 0;
        while i < parents.len() {
            let cap = if i == 0 { max_degree } else { max_degree.saturating_sub(1) };
            if levels[i] < depth && cap > 0 && !rng.gen_bool(stop) {
                for _ in 0..rng.gen_range(1..=cap) {
                    parents.push(Some(i));
                    levels.push(levels[i] + 1);
                }
            }
            i += 1;
        }
        Self::from_parents(&parents, depth).expect("generated in BFS order")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn parent(&self, u: usize) -> Option<usize> {
        self.parent[u]
    }

    pub fn children(&self, u: usize) -> &[usize] {
        &self.children[u]
    }

    pub fn level(&self, u: usize) -> usize {
        self.level[u]
    }

    /// Graph node this tree node was extracted from (identity for synthetic
    /// trees).
    pub fn label(&self, u: usize) -> usize {
        self.labels[u]
    }

    pub fn is_boundary(&self, u: usize) -> bool {
        self.level[u] == self.depth
    }

    /// Nodes at level exactly `depth`.
    pub fn boundary(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&u| self.is_boundary(u))
    }

    pub fn degree(&self, u: usize) -> usize {
        self.children[u].len() + usize::from(self.parent[u].is_some())
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    /// Node indices with children before parents.
    pub(crate) fn bottom_up(&self) -> impl Iterator<Item = usize> {
        (0..self.len()).rev()
    }
}

/// Occupation state of a boundary node for the hard-core model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Occupancy {
    In,
    Out,
}

/// Partial assignment of states to boundary nodes (tree-local indices);
/// unassigned boundary nodes are free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryCondition<S> {
    assignment: BTreeMap<usize, S>,
}

impl<S: Copy> BoundaryCondition<S> {
    pub fn free() -> Self {
        BoundaryCondition { assignment: BTreeMap::new() }
    }

    /// Assigns `state` to every boundary node of `tree`.
    pub fn uniform(tree: &RootedTree, state: S) -> Self {
        tree.boundary().map(|u| (u, state)).collect()
    }

    pub fn get(&self, u: usize) -> Option<S> {
        self.assignment.get(&u).copied()
    }

    pub fn insert(&mut self, u: usize, state: S) {
        self.assignment.insert(u, state);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, S)> + '_ {
        self.assignment.iter().map(|(&u, &s)| (u, s))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub(crate) fn check_domain(&self, tree: &RootedTree) -> Result<(), TreeError> {
        match self.assignment.keys().find(|&&u| u >= tree.len() || !tree.is_boundary(u)) {
            Some(&u) => Err(TreeError::NotBoundary(u)),
            None => Ok(()),
        }
    }
}

impl<S> FromIterator<(usize, S)> for BoundaryCondition<S> {
    fn from_iter<I: IntoIterator<Item = (usize, S)>>(iter: I) -> Self {
        BoundaryCondition { assignment: iter.into_iter().collect() }
    }
}
