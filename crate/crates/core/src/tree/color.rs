use super::{BoundaryCondition, RootedTree, TreeError};

/// Exact distribution of the root color over proper `q`-colorings of the
/// tree that extend `b`. Colors are `0..q`.
///
/// Message `m_u(c)` is proportional to the number of colorings of the
/// subtree at `u` with `u` colored `c`; for free nodes
/// `m_u(c) = prod_children (sum(m_child) - m_child(c))`. Messages are
/// normalized at every node.
pub fn exact_tree_color_marginal(
    tree: &RootedTree,
    q: usize,
    b: &BoundaryCondition<usize>,
) -> Result<Vec<f64>, TreeError> {
    let needed = tree.max_degree() + 1;
    if q < needed {
        return Err(TreeError::TooFewColors { q, needed });
    }
    b.check_domain(tree)?;
    if let Some((_, color)) = b.iter().find(|&(_, c)| c >= q) {
        return Err(TreeError::ColorOutOfRange { color, q });
    }
    let mut msg = vec![Vec::new(); tree.len()];
    for u in tree.bottom_up() {
        let mut m = match b.get(u) {
            Some(color) => {
                let mut m = vec![0.0; q];
                m[color] = 1.0;
                m
            }
            None => vec![1.0; q],
        };
        for &child in tree.children(u) {
            let cm: &Vec<f64> = &msg[child];
            let total: f64 = cm.iter().sum();
            for (mc, &x) in m.iter_mut().zip(cm) {
                *mc *= total - x;
            }
        }
        let z: f64 = m.iter().sum();
        if z <= 0.0 {
            return Err(TreeError::InfeasibleBoundary);
        }
        m.iter_mut().for_each(|x| *x /= z);
        msg[u] = m;
        for &child in tree.children(u) {
            msg[child] = Vec::new();
        }
    }
    Ok(std::mem::take(&mut msg[tree.root()]))
}
