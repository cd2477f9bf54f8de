use serde::Serialize;

use super::{BoundaryCondition, Occupancy, RootedTree, TreeError};

/// Closed probability interval `[lo, hi]` with `0 <= lo <= hi <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ProbInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(0.0 <= lo && lo <= hi && hi <= 1.0, "bad interval [{lo}, {hi}]");
        ProbInterval { lo, hi }
    }

    pub fn point(p: f64) -> Self {
        Self::new(p, p)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }

    /// Widens both ends by `slack`, clamped to `[0, 1]`.
    pub fn widen(&self, slack: f64) -> Self {
        Self::new((self.lo - slack).max(0.0), (self.hi + slack).min(1.0))
    }
}

/// Free-boundary probability that the root is unoccupied:
/// `p(u) = 1 / (1 + lambda * prod p(children))`, childless nodes `1/(1+lambda)`.
pub fn counting_tree_marginal(tree: &RootedTree, lambda: f64) -> f64 {
    let mut p = vec![0.0; tree.len()];
    for u in tree.bottom_up() {
        let prod: f64 = tree.children(u).iter().map(|&c| p[c]).product();
        p[u] = 1.0 / (1.0 + lambda * prod);
    }
    p[tree.root()]
}

/// Probability that the root is unoccupied given the boundary condition.
/// IN boundary nodes contribute 0, OUT nodes 1, free nodes the usual value.
pub fn marginal_with_boundary(
    tree: &RootedTree,
    lambda: f64,
    b: &BoundaryCondition<Occupancy>,
) -> Result<f64, TreeError> {
    b.check_domain(tree)?;
    for (u, s) in b.iter() {
        if s == Occupancy::In
            && tree.parent(u).is_some_and(|p| b.get(p) == Some(Occupancy::In))
        {
            return Err(TreeError::InfeasibleBoundary);
        }
    }
    let mut p = vec![0.0; tree.len()];
    for u in tree.bottom_up() {
        p[u] = match b.get(u) {
            Some(Occupancy::In) => 0.0,
            Some(Occupancy::Out) => 1.0,
            None => {
                let prod: f64 = tree.children(u).iter().map(|&c| p[c]).product();
                1.0 / (1.0 + lambda * prod)
            }
        };
    }
    Ok(p[tree.root()])
}

/// Interval containing the root marginal under every boundary condition.
/// Boundary nodes start at `[0, 1]`; the map is decreasing in each child,
/// so `hi` of the children bounds `lo` of the parent and vice versa.
pub fn interval_bounds(tree: &RootedTree, lambda: f64) -> ProbInterval {
    let mut iv = vec![ProbInterval::point(0.0); tree.len()];
    for u in tree.bottom_up() {
        iv[u] = if tree.is_boundary(u) {
            ProbInterval::new(0.0, 1.0)
        } else {
            let (mut lo_prod, mut hi_prod) = (1.0, 1.0);
            for &c in tree.children(u) {
                lo_prod *= iv[c].lo;
                hi_prod *= iv[c].hi;
            }
            ProbInterval::new(1.0 / (1.0 + lambda * hi_prod), 1.0 / (1.0 + lambda * lo_prod))
        };
    }
    iv[tree.root()]
}
