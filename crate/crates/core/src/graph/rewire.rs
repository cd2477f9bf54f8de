use super::{girth, Graph, GraphError};

/// One step of a rewiring schedule. `v1`, `v2` are ids in the graph *before*
/// the step; `graph` is the result, relabelled as in [`Graph::remove_nodes`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewireStep {
    pub v1: usize,
    pub v2: usize,
    pub graph: Graph,
}

/// Deletes `v1`, `v2` and joins the `i`-th neighbour of `v1` to the `j`-th
/// neighbour of `v2` for every `(i, j)` in `pairing` (neighbours in sorted
/// order). `None` pairs them index by index.
pub fn rewire(
    g: &Graph,
    v1: usize,
    v2: usize,
    pairing: Option<&[(usize, usize)]>,
) -> Result<Graph, GraphError> {
    rewire_with_map(g, v1, v2, pairing).map(|(g, _)| g)
}

/// As [`rewire`], also returning the old id of every surviving node.
pub fn rewire_with_map(
    g: &Graph,
    v1: usize,
    v2: usize,
    pairing: Option<&[(usize, usize)]>,
) -> Result<(Graph, Vec<usize>), GraphError> {
    let n = g.node_count();
    for node in [v1, v2] {
        if node >= n {
            return Err(GraphError::NodeOutOfRange { node, n });
        }
    }
    let violated = |msg: String| Err(GraphError::PreconditionViolated(msg));
    if v1 == v2 {
        return violated(format!("rewiring needs two distinct nodes, got {v1} twice"));
    }
    if g.has_edge(v1, v2) {
        return violated(format!("nodes {v1} and {v2} are adjacent"));
    }
    let (n1, n2) = (g.neighbors(v1), g.neighbors(v2));
    if n1.len() != n2.len() {
        return violated(format!(
            "degree mismatch: deg({v1}) = {}, deg({v2}) = {}",
            n1.len(),
            n2.len()
        ));
    }
    if let Some(w) = n1.iter().find(|w| n2.binary_search(w).is_ok()) {
        return violated(format!("nodes {v1} and {v2} share neighbour {w}"));
    }
    let r = n1.len();
    let identity: Vec<(usize, usize)> = (0..r).map(|j| (j, j)).collect();
    let pairing = pairing.unwrap_or(&identity);
    let mut left = vec![false; r];
    let mut right = vec![false; r];
    for &(i, j) in pairing {
        if i >= r || j >= r || std::mem::replace(&mut left[i], true) || std::mem::replace(&mut right[j], true) {
            return violated(format!("pairing is not a perfect matching of {r} neighbours"));
        }
    }
    if pairing.len() != r {
        return violated(format!("pairing is not a perfect matching of {r} neighbours"));
    }
    for &(i, j) in pairing {
        if g.has_edge(n1[i], n2[j]) {
            return Err(GraphError::EdgeExists(n1[i].min(n2[j]), n1[i].max(n2[j])));
        }
    }

    let (mut out, old_ids) = g.remove_nodes(&[v1, v2]);
    let new_id = |old: usize| old - usize::from(old > v1) - usize::from(old > v2);
    for &(i, j) in pairing {
        out.add_edge(new_id(n1[i]), new_id(n2[j]))?;
    }
    Ok((out, old_ids))
}

/// Repeatedly rewires on a pair realising the largest distance (an
/// infinite distance between components counts as largest; ties go to the
/// lexicographically smallest pair) while that distance is at least
/// `2 * girth_target + 1`, for at most `max_steps` steps.
pub fn rewiring_schedule(
    g: &Graph,
    girth_target: usize,
    max_steps: usize,
) -> Result<Vec<RewireStep>, GraphError> {
    if girth_target < 4 {
        return Err(GraphError::PreconditionViolated(format!(
            "girth target must be at least 4, got {girth_target}"
        )));
    }
    if g.regular_degree().is_none() {
        return Err(GraphError::PreconditionViolated("graph is not regular".into()));
    }
    // Every step must keep girth >= target, which is impossible from below.
    if girth(g).is_some_and(|gg| gg < girth_target) {
        return Ok(Vec::new());
    }
    let threshold = 2 * girth_target + 1;
    let mut steps = Vec::new();
    let mut current = g.clone();
    while steps.len() < max_steps {
        let Some((v1, v2)) = farthest_pair(&current, threshold) else {
            break;
        };
        let next = rewire(&current, v1, v2, None)?;
        steps.push(RewireStep { v1, v2, graph: next.clone() });
        current = next;
    }
    Ok(steps)
}

/// Lexicographically smallest pair at maximal distance, if that distance
/// reaches `threshold`.
fn farthest_pair(g: &Graph, threshold: usize) -> Option<(usize, usize)> {
    // `usize::MAX` encodes "different components".
    let mut best: Option<(usize, usize, usize)> = None;
    for u in 0..g.node_count() {
        let dist = g.distances_from(u);
        for (v, d) in dist.iter().enumerate().skip(u + 1) {
            let d = d.unwrap_or(usize::MAX);
            if best.map_or(true, |(bd, _, _)| d > bd) {
                best = Some((d, u, v));
            }
        }
    }
    best.filter(|&(d, _, _)| d >= threshold).map(|(_, u, v)| (u, v))
}
