//! Exact checks of the telescoping identities behind the counting
//! algorithms and of the rewiring energy-shift identities.

use num_rational::BigRational;
use num_traits::Zero;

use crate::graph::{rewire_with_map, Graph, GraphError};

use super::color::{color_statistic, distinct};
use super::ind::{count_by_size, polynomial, Branching};
use super::{
    adjacency_masks, count_proper_colorings, expected_used_colors, full_mask,
    independence_polynomial, relative_deviation, with_activity, Activity, OracleConfig,
    OracleError, Value, FLOAT_TOLERANCE, NAIVE_CAP,
};

#[derive(Clone, Debug, PartialEq)]
pub struct CavityIdentityReport {
    /// `P(v_k not in I)` in the residual graph `G_{k-1}`, in elimination order.
    pub marginals: Vec<Value>,
    pub product: Value,
    pub exact: Value,
    /// Largest relative gap between a branching-engine marginal and the same
    /// marginal by subset enumeration (0 when enumeration is out of reach).
    pub max_step_deviation: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColorIdentityReport {
    /// `q - E|C(N(v_k, G_{k-1}))|` over colorings of `G_k`, in order.
    pub factors: Vec<Value>,
    pub product: Value,
    pub exact: Value,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyShiftReport {
    /// `Z(rewired) / Z(G)`.
    pub ratio: Value,
    /// `P_G(v1, v2 not in I)`.
    pub both_out: Value,
    /// Probability, in `G - {v1, v2}`, that no rewired pair is fully occupied.
    pub pairs_free: Value,
    pub deviation: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColorEnergyShiftReport {
    /// `Z(q, G) / Z(q, rewired)`.
    pub ratio: Value,
    /// `E[(q - |C(N(v1))|)(q - |C(N(v2))|)]` over colorings of `G - {v1, v2}`.
    pub expected_product: Value,
    /// Probability that every rewired pair gets distinct colors.
    pub pairs_distinct: Value,
    pub holds: bool,
}

fn resolve_order(n: usize, order: Option<&[usize]>) -> Result<Vec<usize>, OracleError> {
    let order = order.map_or_else(|| (0..n).collect(), <[usize]>::to_vec);
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
        return Err(OracleError::PreconditionViolated(format!(
            "order is not a permutation of 0..{n}"
        )));
    }
    Ok(order)
}

fn mul(a: &Value, b: &Value) -> Value {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => Value::Exact(x * y),
        _ => Value::Approx(a.to_f64() * b.to_f64()),
    }
}

fn div(a: &Value, b: &Value) -> Value {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => Value::Exact(x / y),
        _ => Value::Approx(a.to_f64() / b.to_f64()),
    }
}

fn one_like(lambda: &Activity) -> Value {
    match lambda {
        Activity::Rational(_) => Value::Exact(BigRational::from_integer(1.into())),
        Activity::Float(_) => Value::Approx(1.0),
    }
}

fn naive_z(adj: &[u64], lambda: &Activity, keep: impl Fn(u64) -> bool) -> Value {
    let counts = count_by_size(adj, keep);
    with_activity!(lambda, |l| polynomial(&counts, l))
}

/// Deletes nodes in `order` and checks that the product of inverse exact
/// marginals `P_{G_{k-1}}(v_k not in I)^{-1}` equals `Z(lambda, G)`.
pub fn verify_cavity_identity(
    g: &Graph,
    lambda: &Activity,
    order: Option<&[usize]>,
    cfg: &OracleConfig,
) -> Result<CavityIdentityReport, OracleError> {
    cfg.check_ind(g)?;
    let order = resolve_order(g.node_count(), order)?;
    let exact = independence_polynomial(g, lambda, cfg)?.value;
    let mut residual = g.clone();
    let mut ids: Vec<usize> = (0..g.node_count()).collect();
    let mut marginals = Vec::with_capacity(order.len());
    let mut product = one_like(lambda);
    let mut max_step_deviation: f64 = 0.0;
    for &v in &order {
        let local = ids.iter().position(|&x| x == v).expect("each node is deleted once");
        let adj = adjacency_masks(&residual);
        let all = full_mask(adj.len());
        let marginal = with_activity!(lambda, |l| {
            let mut b = Branching::new(&adj, l.clone());
            b.z(all & !(1 << local)) / b.z(all)
        });
        if adj.len() <= NAIVE_CAP {
            let naive = div(&naive_z(&adj, lambda, |m| m >> local & 1 == 0), &naive_z(&adj, lambda, |_| true));
            max_step_deviation = max_step_deviation.max(relative_deviation(&marginal, &naive));
        }
        product = div(&product, &marginal);
        marginals.push(marginal);
        let (next, kept) = residual.remove_nodes(&[local]);
        ids = kept.iter().map(|&i| ids[i]).collect();
        residual = next;
    }
    let holds = product.agrees_with(&exact, FLOAT_TOLERANCE)
        && if exact.is_exact() { max_step_deviation == 0.0 } else { max_step_deviation <= FLOAT_TOLERANCE };
    Ok(CavityIdentityReport { marginals, product, exact, max_step_deviation, holds })
}

/// Deletes nodes in `order` and checks that
/// `prod_k (q - E_{G_k}|C(N(v_k, G_{k-1}))|)` equals the number of proper
/// `q`-colorings of `G`.
pub fn verify_color_identity(
    g: &Graph,
    q: usize,
    order: Option<&[usize]>,
    cfg: &OracleConfig,
) -> Result<ColorIdentityReport, OracleError> {
    let needed = g.max_degree() + 1;
    if q < needed {
        return Err(OracleError::TooFewColors { q, needed });
    }
    super::check_cap(g.node_count(), cfg.color_cap.min(super::HARD_NODE_LIMIT))?;
    let order = resolve_order(g.node_count(), order)?;
    let exact = count_proper_colorings(g, q, cfg)?.value;
    let qv = Value::Exact(BigRational::from_integer(q.into()));
    let mut residual = g.clone();
    let mut ids: Vec<usize> = (0..g.node_count()).collect();
    let mut factors = Vec::with_capacity(order.len());
    let mut product = Value::Exact(BigRational::from_integer(1.into()));
    for &v in &order {
        let local = ids.iter().position(|&x| x == v).expect("each node is deleted once");
        let used = expected_used_colors(&residual, local, q, cfg)?;
        let factor = match (&qv, &used) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
            _ => unreachable!("coloring statistics are exact"),
        };
        product = mul(&product, &factor);
        factors.push(factor);
        let (next, kept) = residual.remove_nodes(&[local]);
        ids = kept.iter().map(|&i| ids[i]).collect();
        residual = next;
    }
    let holds = product == exact;
    Ok(ColorIdentityReport { factors, product, exact, holds })
}

fn graph_precondition(e: GraphError) -> OracleError {
    match e {
        GraphError::PreconditionViolated(msg) => OracleError::PreconditionViolated(msg),
        GraphError::EdgeExists(u, v) => {
            OracleError::PreconditionViolated(format!("rewiring would duplicate edge {u}-{v}"))
        }
        other => OracleError::Graph(other),
    }
}

/// Rewired graph, the reduced graph `G - {v1, v2}` and the rewired pairs in
/// the reduced graph's ids.
fn rewire_parts(g: &Graph, v1: usize, v2: usize) -> Result<(Graph, Graph, Vec<(usize, usize)>), OracleError> {
    let (rewired, old_ids) = rewire_with_map(g, v1, v2, None).map_err(graph_precondition)?;
    let (reduced, _) = g.remove_nodes(&[v1, v2]);
    let new_id = |old: usize| old_ids.binary_search(&old).expect("neighbours survive");
    let pairs = g
        .neighbors(v1)
        .iter()
        .zip(g.neighbors(v2))
        .map(|(&a, &b)| (new_id(a), new_id(b)))
        .collect();
    Ok((rewired, reduced, pairs))
}

/// Checks `Z(G°)/Z(G) = P_G(v1, v2 not in I) * P_{G - {v1,v2}}(no pair
/// fully occupied)` for the rewiring `G°` at `v1`, `v2` with the identity
/// pairing. Both probabilities are obtained by subset enumeration when the
/// graph is small enough, otherwise from the branching engine.
pub fn verify_energy_shift(
    g: &Graph,
    v1: usize,
    v2: usize,
    lambda: &Activity,
    cfg: &OracleConfig,
) -> Result<EnergyShiftReport, OracleError> {
    cfg.check_ind(g)?;
    let (rewired, reduced, pairs) = rewire_parts(g, v1, v2)?;
    let ratio = div(
        &independence_polynomial(&rewired, lambda, cfg)?.value,
        &independence_polynomial(g, lambda, cfg)?.value,
    );
    let adj = adjacency_masks(g);
    let radj = adjacency_masks(&reduced);
    let pair_masks: Vec<u64> = pairs.iter().map(|&(a, b)| 1 << a | 1 << b).collect();
    let pair_ok = |m: u64| pair_masks.iter().all(|&p| m & p != p);
    let (both_out, pairs_free) = if g.node_count() <= NAIVE_CAP {
        let out = 1u64 << v1 | 1u64 << v2;
        (
            div(&naive_z(&adj, lambda, |m| m & out == 0), &naive_z(&adj, lambda, |_| true)),
            div(&naive_z(&radj, lambda, pair_ok), &naive_z(&radj, lambda, |_| true)),
        )
    } else {
        let all = full_mask(adj.len());
        let both_out = with_activity!(lambda, |l| {
            let mut b = Branching::new(&adj, l.clone());
            b.z(all & !(1 << v1) & !(1 << v2)) / b.z(all)
        });
        let pairs_free = div(
            &independence_polynomial(&rewired, lambda, cfg)?.value,
            &independence_polynomial(&reduced, lambda, cfg)?.value,
        );
        (both_out, pairs_free)
    };
    let predicted = mul(&both_out, &pairs_free);
    let deviation = relative_deviation(&predicted, &ratio);
    let holds = predicted.agrees_with(&ratio, 1e-12);
    Ok(EnergyShiftReport { ratio, both_out, pairs_free, deviation, holds })
}

/// Coloring analogue:
/// `Z(q,G)/Z(q,G°) = E[(q - |C(N(v1))|)(q - |C(N(v2))|)] / P(pairs distinct)`,
/// with both statistics over uniform colorings of `G - {v1, v2}`.
pub fn verify_color_energy_shift(
    g: &Graph,
    v1: usize,
    v2: usize,
    q: usize,
    cfg: &OracleConfig,
) -> Result<ColorEnergyShiftReport, OracleError> {
    let needed = g.max_degree() + 1;
    if q < needed {
        return Err(OracleError::TooFewColors { q, needed });
    }
    let (rewired, reduced, pairs) = rewire_parts(g, v1, v2)?;
    let z_g = count_proper_colorings(g, q, cfg)?.value;
    let z_rewired = count_proper_colorings(&rewired, q, cfg)?.value;
    let (Value::Exact(z_g), Value::Exact(z_rewired)) = (z_g, z_rewired) else {
        unreachable!("coloring counts are exact");
    };
    if z_rewired.is_zero() {
        return Err(OracleError::PreconditionViolated("rewired graph has no proper coloring".into()));
    }
    let n1: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let n2: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let qq = q as u128;
    let (count, weighted) = color_statistic(&reduced, q, cfg, |c| {
        (qq - distinct(n1.iter().map(|&u| c[u]))) * (qq - distinct(n2.iter().map(|&u| c[u])))
    })?;
    let (_, distinct_pairs) =
        color_statistic(&reduced, q, cfg, |c| u128::from(pairs.iter().all(|&(a, b)| c[a] != c[b])))?;
    let ratio = BigRational::new(z_g.to_integer(), z_rewired.to_integer());
    let expected_product = BigRational::new(weighted, count.clone());
    let pairs_distinct = BigRational::new(distinct_pairs, count);
    let holds = !pairs_distinct.is_zero() && &expected_product / &pairs_distinct == ratio;
    Ok(ColorEnergyShiftReport {
        ratio: Value::Exact(ratio),
        expected_product: Value::Exact(expected_product),
        pairs_distinct: Value::Exact(pairs_distinct),
        holds,
    })
}
