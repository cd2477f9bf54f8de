use std::collections::HashMap;

use crate::graph::Graph;

use super::{
    adjacency_masks, check_cap, full_mask, with_activity, Activity, OracleConfig, OracleError,
    OracleResult, Value, Weight, NAIVE_CAP,
};

/// Exact `Z(lambda, G)`: branch on a maximum-degree node,
/// `Z(G) = Z(G - v) + lambda Z(G - N[v])`, splitting into connected
/// components first and memoizing connected subproblems.
pub fn independence_polynomial(
    g: &Graph,
    lambda: &Activity,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    cfg.check_ind(g)?;
    let adj = adjacency_masks(g);
    let value = with_activity!(lambda, |l| {
        Branching::new(&adj, l.clone()).z(full_mask(adj.len()))
    });
    Ok(OracleResult { value, node_budget: cfg.ind_cap })
}

/// `Z(lambda, G)` by enumerating all `2^n` subsets.
pub fn independence_polynomial_naive(g: &Graph, lambda: &Activity) -> Result<Value, OracleError> {
    check_cap(g.node_count(), NAIVE_CAP)?;
    let counts = count_by_size(&adjacency_masks(g), |_| true);
    Ok(with_activity!(lambda, |l| polynomial(&counts, l)))
}

/// Number of independent sets of each size that satisfy `keep`.
pub(crate) fn count_by_size(adj: &[u64], keep: impl Fn(u64) -> bool) -> Vec<u128> {
    let n = adj.len();
    let mut counts = vec![0u128; n + 1];
    for mask in 0..=full_mask(n) {
        let mut rest = mask;
        let mut independent = true;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if adj[v] & mask != 0 {
                independent = false;
                break;
            }
        }
        if independent && keep(mask) {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    counts
}

/// `sum_k counts[k] * lambda^k` by Horner's rule.
pub(crate) fn polynomial<T: Weight>(counts: &[u128], lambda: &T) -> T {
    counts
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * lambda.clone() + T::from_u128(c))
}

/// `P(v not in I) = Z(G - v) / Z(G)`.
pub fn exact_marginal_ind(
    g: &Graph,
    v: usize,
    lambda: &Activity,
    cfg: &OracleConfig,
) -> Result<Value, OracleError> {
    cfg.check_ind(g)?;
    if v >= g.node_count() {
        return Err(OracleError::PreconditionViolated(format!("node {v} out of range")));
    }
    let adj = adjacency_masks(g);
    let all = full_mask(adj.len());
    Ok(with_activity!(lambda, |l| {
        let mut b = Branching::new(&adj, l.clone());
        b.z(all & !(1 << v)) / b.z(all)
    }))
}

/// `ln Z(lambda, G_k)` for `k = 0..=n`, where `G_k` is `G` with the first
/// `k` nodes of `order` deleted. One memo serves every residual graph.
pub(crate) fn residual_log_partitions(
    g: &Graph,
    lambda: &Activity,
    order: &[usize],
    cfg: &OracleConfig,
) -> Result<Vec<f64>, OracleError> {
    cfg.check_ind(g)?;
    let adj = adjacency_masks(g);
    let mut mask = full_mask(adj.len());
    let mut masks = vec![mask];
    for &v in order {
        mask &= !(1 << v);
        masks.push(mask);
    }
    Ok(match lambda {
        Activity::Rational(l) => {
            let mut b = Branching::new(&adj, l.clone());
            masks.iter().map(|&m| Value::Exact(b.z(m)).ln()).collect()
        }
        Activity::Float(l) => {
            let mut b = Branching::new(&adj, *l);
            masks.iter().map(|&m| b.z(m).ln()).collect()
        }
    })
}

pub(crate) struct Branching<'a, T> {
    adj: &'a [u64],
    lambda: T,
    memo: HashMap<u64, T>,
}

impl<'a, T: Weight> Branching<'a, T> {
    pub(crate) fn new(adj: &'a [u64], lambda: T) -> Self {
        Branching { adj, lambda, memo: HashMap::new() }
    }

    /// Weighted count of independent sets inside `mask`.
    pub(crate) fn z(&mut self, mask: u64) -> T {
        if mask == 0 {
            return T::one();
        }
        let comp = self.component(mask);
        if comp != mask {
            return self.z(comp) * self.z(mask & !comp);
        }
        if let Some(v) = self.memo.get(&mask) {
            return v.clone();
        }
        let (v, deg) = self.pivot(mask);
        let value = if deg == 0 {
            T::one() + self.lambda.clone()
        } else {
            let without = self.z(mask & !(1 << v));
            let with = self.z(mask & !(1 << v) & !self.adj[v]);
            without + self.lambda.clone() * with
        };
        self.memo.insert(mask, value.clone());
        value
    }

    /// Connected component of the lowest node in `mask`.
    fn component(&self, mask: u64) -> u64 {
        let mut seen = mask & mask.wrapping_neg();
        let mut frontier = seen;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = self.adj[v] & mask & !seen;
            seen |= new;
            frontier |= new;
        }
        seen
    }

    /// Node of maximum degree within `mask`; ties to the lowest id.
    fn pivot(&self, mask: u64) -> (usize, u32) {
        let mut best = (usize::MAX, 0);
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let d = (self.adj[v] & mask).count_ones();
            if best.0 == usize::MAX || d > best.1 {
                best = (v, d);
            }
        }
        best
    }
}
