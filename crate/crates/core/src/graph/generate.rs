use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError};

/// Upper limit on configuration-model restarts before giving up.
const MAX_PAIRING_ATTEMPTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedGraph {
    /// 10 nodes, cubic, girth 5.
    Petersen,
    /// 14 nodes, cubic, girth 6.
    Heawood,
    /// 24 nodes, cubic, girth 7.
    McGee,
    /// 30 nodes, cubic, girth 8.
    TutteCoxeter,
}

/// Graph families understood by [`generate`]. Seeded kinds draw from
/// `ChaCha8Rng::seed_from_u64(seed)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Cycle(usize),
    Path(usize),
    Complete(usize),
    /// Circular ladder `C_n x K_2`: cubic, girth 4 for `n >= 4`.
    Prism(usize),
    RandomRegular { n: usize, r: usize, seed: u64 },
    Named(NamedGraph),
    RandomTree { n: usize, max_degree: usize, seed: u64 },
}

pub fn generate(kind: &GraphKind) -> Result<Graph, GraphError> {
    match *kind {
        GraphKind::Cycle(n) => {
            if n < 3 {
                return Err(GraphError::InvalidParameters(format!("cycle needs n >= 3, got {n}")));
            }
            Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        GraphKind::Path(n) => Graph::from_edges(n, (1..n).map(|i| (i - 1, i))),
        GraphKind::Complete(k) => {
            Graph::from_edges(k, (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))))
        }
        GraphKind::Prism(n) => {
            if n < 3 {
                return Err(GraphError::InvalidParameters(format!("prism needs n >= 3, got {n}")));
            }
            let ring = |offset: usize| (0..n).map(move |i| (offset + i, offset + (i + 1) % n));
            let rungs = (0..n).map(|i| (i, n + i));
            Graph::from_edges(2 * n, ring(0).chain(ring(n)).chain(rungs))
        }
        GraphKind::RandomRegular { n, r, seed } => random_regular(n, r, seed),
        GraphKind::Named(name) => Ok(named(name)),
        GraphKind::RandomTree { n, max_degree, seed } => random_tree(n, max_degree, seed),
    }
}

fn random_regular(n: usize, r: usize, seed: u64) -> Result<Graph, GraphError> {
    if r >= n.max(1) || (n * r) % 2 != 0 {
        return Err(GraphError::InvalidParameters(format!(
            "no simple {r}-regular graph on {n} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(r)).collect();
    'attempt: for _ in 0..MAX_PAIRING_ATTEMPTS {
        stubs.shuffle(&mut rng);
        let mut g = Graph::empty(n);
        for pair in stubs.chunks_exact(2) {
            if g.add_edge(pair[0], pair[1]).is_err() {
                continue 'attempt;
            }
        }
        return Ok(g);
    }
    Err(GraphError::InvalidParameters(format!(
        "configuration model found no simple pairing for n={n}, r={r}"
    )))
}

fn random_tree(n: usize, max_degree: usize, seed: u64) -> Result<Graph, GraphError> {
    let feasible = match n {
        0 | 1 => true,
        2 => max_degree >= 1,
        _ => max_degree >= 2,
    };
    if !feasible {
        return Err(GraphError::InvalidParameters(format!(
            "no tree on {n} nodes with max degree {max_degree}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::empty(n);
    // Nodes that can still accept a child.
    let mut open: Vec<usize> = if n > 0 { vec![0] } else { vec![] };
    for v in 1..n {
        let i = rng.gen_range(0..open.len());
        let u = open[i];
        g.add_edge(u, v)?;
        if g.degree(u) == max_degree {
            open.swap_remove(i);
        }
        if max_degree > 1 {
            open.push(v);
        }
    }
    Ok(g)
}

/// Hamiltonian cycle plus chords `i -- i + shifts[i mod len]`.
fn lcf(n: usize, shifts: &[i64]) -> Graph {
    let mut g = Graph::empty(n);
    for i in 0..n {
        g.add_edge(i, (i + 1) % n).expect("cycle edges are distinct");
    }
    for i in 0..n {
        let j = (i as i64 + shifts[i % shifts.len()]).rem_euclid(n as i64) as usize;
        if !g.has_edge(i, j) {
            g.add_edge(i, j).expect("chord endpoints differ");
        }
    }
    g
}

fn named(name: NamedGraph) -> Graph {
    match name {
        NamedGraph::Petersen => {
            let outer = (0..5).map(|i| (i, (i + 1) % 5));
            let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
            let spokes = (0..5).map(|i| (i, i + 5));
            Graph::from_edges(10, outer.chain(inner).chain(spokes)).expect("petersen is simple")
        }
        NamedGraph::Heawood => lcf(14, &[5, -5]),
        NamedGraph::McGee => lcf(24, &[12, 7, -7]),
        NamedGraph::TutteCoxeter => lcf(30, &[-13, -9, 7, -7, 9, 13]),
    }
}

impl fmt::Display for NamedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NamedGraph::Petersen => "petersen",
            NamedGraph::Heawood => "heawood",
            NamedGraph::McGee => "mcgee",
            NamedGraph::TutteCoxeter => "tutte-coxeter",
        })
    }
}

impl FromStr for NamedGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "petersen" => Ok(NamedGraph::Petersen),
            "heawood" => Ok(NamedGraph::Heawood),
            "mcgee" => Ok(NamedGraph::McGee),
            "tutte-coxeter" | "tutte-8-cage" => Ok(NamedGraph::TutteCoxeter),
            other => Err(GraphError::InvalidParameters(format!("unknown named graph '{other}'"))),
        }
    }
}

/// Parses `cycle:N`, `path:N`, `complete:K`, `prism:N`,
/// `random-regular:N:R:SEED`, `random-tree:N:MAXDEG:SEED` or a graph name.
impl FromStr for GraphKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<u64, GraphError> {
            parts
                .get(i)
                .ok_or_else(|| GraphError::InvalidParameters(format!("'{s}': missing field {i}")))?
                .parse()
                .map_err(|_| GraphError::InvalidParameters(format!("'{s}': field {i} is not a number")))
        };
        let arity = |k: usize| -> Result<(), GraphError> {
            if parts.len() == k + 1 {
                Ok(())
            } else {
                Err(GraphError::InvalidParameters(format!("'{s}': expected {k} parameters")))
            }
        };
        match parts[0] {
            "cycle" => arity(1).and(Ok(GraphKind::Cycle(num(1)? as usize))),
            "path" => arity(1).and(Ok(GraphKind::Path(num(1)? as usize))),
            "complete" => arity(1).and(Ok(GraphKind::Complete(num(1)? as usize))),
            "prism" => arity(1).and(Ok(GraphKind::Prism(num(1)? as usize))),
            "random-regular" => arity(3).and(Ok(GraphKind::RandomRegular {
                n: num(1)? as usize,
                r: num(2)? as usize,
                seed: num(3)?,
            })),
            "random-tree" => arity(3).and(Ok(GraphKind::RandomTree {
                n: num(1)? as usize,
                max_degree: num(2)? as usize,
                seed: num(3)?,
            })),
            "named" => arity(1).and(Ok(GraphKind::Named(parts[1].parse()?))),
            name if parts.len() == 1 => Ok(GraphKind::Named(name.parse()?)),
            other => Err(GraphError::InvalidParameters(format!("unknown graph kind '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{compute_metrics, girth, GraphMetrics};

    #[test]
    fn named_graphs_match_published_invariants() {
        let expect = [
            (NamedGraph::Petersen, 10, 15, 5, 2),
            (NamedGraph::Heawood, 14, 21, 6, 3),
            (NamedGraph::McGee, 24, 36, 7, 4),
            (NamedGraph::TutteCoxeter, 30, 45, 8, 4),
        ];
        for (name, n, m, g, diam) in expect {
            let graph = generate(&GraphKind::Named(name)).unwrap();
            assert!(graph.check_invariants());
            assert_eq!((graph.node_count(), graph.edge_count()), (n, m), "{name}");
            assert_eq!(graph.regular_degree(), Some(3), "{name}");
            let metrics = compute_metrics(&graph);
            assert_eq!(metrics.girth, Some(g), "{name}");
            assert_eq!(metrics.diameter, Some(diam), "{name}");
        }
    }

    #[test]
    fn cycle_five() {
        let g = generate(&"cycle:5".parse().unwrap()).unwrap();
        assert_eq!(
            compute_metrics(&g),
            GraphMetrics { girth: Some(5), diameter: Some(2), max_degree: 2 }
        );
    }

    #[test]
    fn random_regular_is_simple_and_deterministic() {
        let kind = GraphKind::RandomRegular { n: 20, r: 3, seed: 1 };
        let a = generate(&kind).unwrap();
        let b = generate(&kind).unwrap();
        assert_eq!(a, b);
        assert!(a.check_invariants());
        assert_eq!(a.regular_degree(), Some(3));
        assert_eq!(a.edge_count(), 30);
    }

    #[test]
    fn random_regular_rejects_odd_stub_count() {
        assert!(matches!(
            generate(&GraphKind::RandomRegular { n: 5, r: 3, seed: 0 }),
            Err(GraphError::InvalidParameters(_))
        ));
    }

    #[test]
    fn random_tree_respects_degree_cap() {
        for seed in 0..20 {
            let g = generate(&GraphKind::RandomTree { n: 200, max_degree: 3, seed }).unwrap();
            assert!(g.is_forest());
            assert_eq!(g.components().len(), 1);
            assert!(g.max_degree() <= 3);
            assert_eq!(girth(&g), None);
        }
    }

    #[test]
    fn prism_is_cubic_girth_four() {
        let g = generate(&GraphKind::Prism(10)).unwrap();
        assert_eq!(g.regular_degree(), Some(3));
        assert_eq!(girth(&g), Some(4));
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("petersen".parse::<GraphKind>().unwrap(), GraphKind::Named(NamedGraph::Petersen));
        assert_eq!(
            "random-regular:20:3:7".parse::<GraphKind>().unwrap(),
            GraphKind::RandomRegular { n: 20, r: 3, seed: 7 }
        );
        assert!("cycle".parse::<GraphKind>().is_err());
        assert!("cycle:x".parse::<GraphKind>().is_err());
    }
}
