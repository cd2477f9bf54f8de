use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::graph::Graph;

use super::{check_cap, OracleConfig, OracleError, OracleResult, Value};

/// Exact number of proper `q`-colorings. Tree and cycle components use
/// their chromatic polynomials; every other component is enumerated, and
/// must not exceed `cfg.color_cap` nodes.
pub fn count_proper_colorings(g: &Graph, q: usize, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    let qb = BigInt::from(q);
    let mut total = BigInt::one();
    for comp in g.components() {
        let n = comp.len();
        let edges: usize = comp.iter().map(|&v| g.degree(v)).sum::<usize>() / 2;
        let count = if edges + 1 == n {
            &qb * (&qb - 1u32).pow(n as u32 - 1)
        } else if edges == n && comp.iter().all(|&v| g.degree(v) == 2) {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            (&qb - 1u32).pow(n as u32) + sign * (&qb - 1u32)
        } else {
            check_cap(n, cfg.color_cap.min(super::HARD_NODE_LIMIT))?;
            let local = Local::new(g, &comp, None);
            let mut by_k = vec![0u128; n + 1];
            local.enumerate(q, |_, k| by_k[k] += 1);
            combine(&by_k, q)
        };
        if count.is_zero() {
            return Ok(OracleResult { value: Value::Exact(BigRational::zero()), node_budget: cfg.color_cap });
        }
        total *= count;
    }
    Ok(OracleResult { value: Value::Exact(BigRational::from_integer(total)), node_budget: cfg.color_cap })
}

/// `E |C(N(v))|` over uniform proper `q`-colorings of `g - v`, where
/// `N(v)` is the neighborhood of `v` in `g`.
pub fn expected_used_colors(g: &Graph, v: usize, q: usize, cfg: &OracleConfig) -> Result<Value, OracleError> {
    if v >= g.node_count() {
        return Err(OracleError::PreconditionViolated(format!("node {v} out of range")));
    }
    let (rest, old_ids) = g.remove_nodes(&[v]);
    let nbrs: Vec<usize> = (0..rest.node_count()).filter(|&i| g.has_edge(v, old_ids[i])).collect();
    let (count, sum) = color_statistic(&rest, q, cfg, |colors| distinct(nbrs.iter().map(|&u| colors[u])))?;
    if count.is_zero() {
        return Err(OracleError::PreconditionViolated(format!("g - {v} has no proper {q}-coloring")));
    }
    Ok(Value::Exact(BigRational::new(sum, count)))
}

/// Sum of `stat(coloring)` over all proper `q`-colorings of `g`, together
/// with their number. `stat` must be invariant under permuting colors.
pub(crate) fn color_statistic(
    g: &Graph,
    q: usize,
    cfg: &OracleConfig,
    stat: impl Fn(&[usize]) -> u128,
) -> Result<(BigInt, BigInt), OracleError> {
    let n = g.node_count();
    check_cap(n, cfg.color_cap.min(super::HARD_NODE_LIMIT))?;
    let all: Vec<usize> = (0..n).collect();
    let local = Local::new(g, &all, Some(bfs_order(g)));
    let mut by_k = vec![0u128; n + 1];
    let mut stat_by_k = vec![0u128; n + 1];
    local.enumerate(q, |colors, k| {
        by_k[k] += 1;
        stat_by_k[k] += stat(colors);
    });
    Ok((combine(&by_k, q), combine(&stat_by_k, q)))
}

pub(crate) fn distinct(colors: impl Iterator<Item = usize>) -> u128 {
    colors.fold(0u128, |m, c| m | 1 << c).count_ones() as u128
}

/// `sum_k a[k] * q (q-1) ... (q-k+1)`.
fn combine(by_k: &[u128], q: usize) -> BigInt {
    let mut total = BigInt::zero();
    let mut falling = BigInt::one();
    for (k, &a) in by_k.iter().enumerate() {
        if k > q {
            break;
        }
        total += &falling * a;
        falling *= q - k;
    }
    total
}

fn bfs_order(g: &Graph) -> Vec<usize> {
    let mut order = Vec::with_capacity(g.node_count());
    for comp in g.components() {
        let dist = g.distances_from(comp[0]);
        let mut c = comp.clone();
        c.sort_by_key(|&v| (dist[v], v));
        order.extend(c);
    }
    order
}

/// Subgraph on `nodes`, reindexed `0..len` in visiting order.
struct Local {
    /// Earlier-visited neighbors of each position.
    back: Vec<Vec<usize>>,
    /// Original position of each node, for statistics.
    slot: Vec<usize>,
}

impl Local {
    fn new(g: &Graph, nodes: &[usize], order: Option<Vec<usize>>) -> Self {
        let order = order.unwrap_or_else(|| {
            let dist = g.distances_from(nodes[0]);
            let mut o = nodes.to_vec();
            o.sort_by_key(|&v| (dist[v], v));
            o
        });
        let mut pos = std::collections::HashMap::new();
        for (i, &v) in order.iter().enumerate() {
            pos.insert(v, i);
        }
        let back = order
            .iter()
            .enumerate()
            .map(|(i, &v)| g.neighbors(v).iter().filter_map(|w| pos.get(w).copied().filter(|&j| j < i)).collect())
            .collect();
        let index: std::collections::HashMap<usize, usize> =
            nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let slot = order.iter().map(|v| index[v]).collect();
        Local { back, slot }
    }

    /// Visits every proper coloring up to renaming colors exactly once, in
    /// the canonical form where colors appear in order of first use. The
    /// visitor gets colors indexed by position in `nodes` and the number of
    /// colors used.
    fn enumerate(&self, q: usize, mut visit: impl FnMut(&[usize], usize)) {
        let n = self.back.len();
        let mut by_pos = vec![0usize; n];
        let mut by_slot = vec![0usize; n];
        self.rec(0, 0, q, &mut by_pos, &mut by_slot, &mut visit);
    }

    fn rec(
        &self,
        i: usize,
        used: usize,
        q: usize,
        by_pos: &mut [usize],
        by_slot: &mut [usize],
        visit: &mut impl FnMut(&[usize], usize),
    ) {
        if i == self.back.len() {
            visit(by_slot, used);
            return;
        }
        for c in 0..=used.min(q.saturating_sub(1)) {
            if c < used && self.back[i].iter().any(|&j| by_pos[j] == c) {
                continue;
            }
            by_pos[i] = c;
            by_slot[self.slot[i]] = c;
            self.rec(i + 1, used.max(c + 1), q, by_pos, by_slot, visit);
        }
    }
}
