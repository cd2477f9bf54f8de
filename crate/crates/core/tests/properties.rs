use cavity_core::graph::{compute_metrics, extract_ball, generate, girth, rewire, safe_depth};
use cavity_core::oracle::{expected_used_colors, independence_polynomial, verify_cavity_identity};
use cavity_core::tree::{counting_tree_marginal, exact_tree_color_marginal};
use cavity_core::verifier::{grid_search_max, lipschitz_bound, taylor_certify};
use cavity_core::{
    count_independent_sets, Activity, BoundaryCondition, CountOptions, Graph, GraphKind, GridSpec, Method,
    OracleConfig, RootedTree,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random tree plus up to `extra` chords between nodes at tree distance at
/// least 4, so the girth is at least 5.
fn sparse_graph(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    for _ in 0..extra {
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let u = rng.gen_range(0..n);
        let far: Vec<usize> = g
            .distances_from(u)
            .iter()
            .enumerate()
            .filter(|(_, d)| d.map_or(true, |d| d >= 4))
            .map(|(v, _)| v)
            .collect();
        if let Some(&v) = far.get(rng.gen_range(0..far.len().max(1))) {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Shortest cycle by enumerating simple cycles through each edge.
fn brute_girth(g: &Graph) -> Option<usize> {
    fn dfs(g: &Graph, start: usize, u: usize, len: usize, seen: &mut Vec<bool>, best: &mut Option<usize>) {
        for &w in g.neighbors(u) {
            if w == start && len >= 3 {
                *best = Some(best.map_or(len, |b| b.min(len)));
            } else if !seen[w] && w > start {
                seen[w] = true;
                dfs(g, start, w, len + 1, seen, best);
                seen[w] = false;
            }
        }
    }
    let mut best = None;
    for s in 0..g.node_count() {
        let mut seen = vec![false; g.node_count()];
        seen[s] = true;
        dfs(g, s, s, 1, &mut seen, &mut best);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certified_interval_contains_exact_value(n in 5usize..=26, extra in 0usize..8, seed: u64) {
        let g = sparse_graph(n, extra, seed);
        prop_assume!(girth(&g).map_or(true, |g| g >= 5));
        let est = count_independent_sets(&g, 2.0, 1.0, None, &CountOptions::default()).unwrap();
        let exact = independence_polynomial(&g, &Activity::one(), &OracleConfig::default()).unwrap().value.ln();
        prop_assert_eq!(est.method, Method::Cavity);
        let (lo, hi) = est.certified.unwrap();
        prop_assert!(lo <= exact && exact <= hi, "{} not in [{}, {}]", exact, lo, hi);
    }

    #[test]
    fn telescoping_with_exact_marginals(n in 1usize..=12, extra in 0usize..10, seed: u64, num in 1i64..5, den in 1i64..4) {
        let g = sparse_graph(n, extra, seed);
        let rep = verify_cavity_identity(&g, &Activity::from_ratio(num, den), None, &OracleConfig::default()).unwrap();
        prop_assert!(rep.holds);
        prop_assert_eq!(rep.product, rep.exact);
    }

    #[test]
    fn expected_used_colors_stay_in_range(n in 1usize..=9, extra in 0usize..6, seed: u64, v_pick: usize) {
        let g = sparse_graph(n, extra, seed);
        let q = g.max_degree() + 1;
        let v = v_pick % n;
        let used = expected_used_colors(&g, v, q, &OracleConfig::default()).unwrap().to_f64();
        // Neighbors use between one and deg(v) distinct colors.
        let deg = g.degree(v) as f64;
        prop_assert!(used <= deg + 1e-12 && (deg == 0.0 || used >= 1.0 - 1e-12));
    }

    #[test]
    fn girth_matches_cycle_enumeration(n in 1usize..=10, p in 0.0f64..0.8, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.gen_bool(p)).collect();
        let g = Graph::from_edges(n, edges).unwrap();
        prop_assert_eq!(girth(&g), brute_girth(&g));
    }

    #[test]
    fn balls_at_safe_depth_are_trees(n in 8usize..40, extra in 0usize..12, seed: u64) {
        let g = sparse_graph(n, extra, seed);
        let metrics = compute_metrics(&g);
        if let Some(t) = safe_depth(&metrics) {
            for v in 0..n {
                prop_assert!(extract_ball(&g, v, t).is_ok());
            }
        }
    }

    #[test]
    fn rewiring_keeps_regularity(n in 8usize..30, seed: u64) {
        prop_assume!(n % 2 == 0);
        let g = generate(&GraphKind::RandomRegular { n, r: 3, seed }).unwrap();
        let (v1, v2) = (0, (0..n).max_by_key(|&v| g.distances_from(0)[v].unwrap_or(usize::MAX)).unwrap());
        let common = g.neighbors(v1).iter().any(|w| g.neighbors(v2).contains(w) || *w == v2);
        prop_assume!(!common);
        if let Ok(h) = rewire(&g, v1, v2, None) {
            prop_assert!(h.check_invariants());
            prop_assert_eq!(h.node_count(), n - 2);
            prop_assert_eq!(h.regular_degree(), Some(3));
        }
    }

    #[test]
    fn tree_marginals_stay_in_region(depth in 2usize..7, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = RootedTree::random(&mut rng, 4, depth, 0.2);
        let p = counting_tree_marginal(&tree, 1.0);
        prop_assert!((0.5..=1.0).contains(&p));
        let kids = tree.children(tree.root());
        if !kids.is_empty() && kids.iter().all(|&c| !tree.children(c).is_empty()) {
            // Internal children have marginal at least 1/2, so with c of them
            // p <= 1 / (1 + 2^-c); at most three children gives 8/9.
            prop_assert!(p <= 1.0 / (1.0 + 0.5f64.powi(kids.len() as i32)) + 1e-12);
            if kids.len() <= 3 {
                prop_assert!(p <= 8.0 / 9.0 + 1e-12);
            }
        }
    }

    #[test]
    fn color_marginals_sum_to_one(depth in 1usize..5, q in 4usize..7, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = RootedTree::random(&mut rng, 3, depth, 0.2);
        let boundary: BoundaryCondition<usize> = tree.boundary().map(|u| (u, rng.gen_range(0..q))).collect();
        let m = exact_tree_color_marginal(&tree, q, &boundary).unwrap();
        prop_assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn bare_root_color_marginal_is_uniform() {
    let tree = RootedTree::from_parents(&[None], 0).unwrap();
    for q in 2..8 {
        let m = exact_tree_color_marginal(&tree, q, &BoundaryCondition::free()).unwrap();
        assert!(m.iter().all(|&x| x == 1.0 / q as f64));
    }
}

#[test]
fn bounds_dominate_every_grid_maximum() {
    // Every grid maximum is at most the continuous maximum, which every
    // certified bound must dominate, across nested resolutions.
    for k in 1..=3 {
        let dens = [10u64, 20, 40, 80];
        let results: Vec<_> = dens.iter().map(|&d| lipschitz_bound(&GridSpec::new(k).with_resolution(d)).unwrap()).collect();
        for (_, a) in &results {
            for (gm, _) in &results {
                assert!(a.bound >= gm.value_f64(), "k={k}");
            }
        }
        let finest = grid_search_max(&GridSpec::new(k)).unwrap();
        assert!(results.iter().all(|(_, a)| a.bound >= finest.value_f64()));
    }
}

#[test]
fn certification_report_is_monotone() {
    for k in 1..=3 {
        let report = taylor_certify(&GridSpec::new(k).with_resolution(50), 0.0).unwrap_err();
        let cavity_core::VerifierError::CertificationFailed { report, .. } = report else { panic!() };
        assert!(report.certified_bound >= report.attempts[0].grid_max);
        let r = taylor_certify(&GridSpec::new(k), 0.9).unwrap();
        let mins: Vec<f64> = r
            .attempts
            .iter()
            .scan(f64::INFINITY, |m, a| {
                *m = m.min(a.bound);
                Some(*m)
            })
            .collect();
        assert!(mins.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*mins.last().unwrap(), r.certified_bound);
    }
}
