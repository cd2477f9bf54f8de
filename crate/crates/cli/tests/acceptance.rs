//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! to the uncaptured stderr stream, then asserts the criterion.

use std::io::Write;
use std::time::{Duration, Instant};

use cavity_cli::experiment::{experiment_random_regular, mean_per_node, ExperimentConfig, ExperimentModel, Mode};
use cavity_core::analytic::{ind_limit, solve_fixed_point, DEFAULT_TOLERANCE};
use cavity_core::graph::generate;
use cavity_core::oracle::{
    independence_polynomial, transfer_matrix_cycle, verify_cavity_identity, verify_color_identity,
    verify_energy_shift,
};
use cavity_core::tree::{decay_experiment, interval_bounds, marginal_with_boundary, DecayModel};
use cavity_core::verifier::grid_search_max;
use cavity_core::{
    count_colorings, count_independent_sets, Activity, BoundaryCondition, CountOptions, Graph, GraphKind, GridSpec,
    Method, NamedGraph, Occupancy, OracleConfig, RootedTree,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, passed: bool, detail: &str, elapsed: Duration, budget: Duration) -> bool {
    let ok = passed && elapsed <= budget;
    let status = if ok { "PASS" } else { "FAIL" };
    let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), budget.as_secs());
    let _ = writeln!(std::io::stderr(), "acceptance {id:>2} [{status}] {name}: {detail} ({timing})");
    ok
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Erdos-Renyi style graph with `n` nodes and edge probability `p`.
fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn criterion_01_fixed_points_and_limits() {
    let start = Instant::now();
    let x2 = solve_fixed_point(2, 1.0, DEFAULT_TOLERANCE).unwrap().x;
    let x3 = solve_fixed_point(3, 1.0, DEFAULT_TOLERANCE).unwrap().x;
    let mut ok = (x2 - 0.6180).abs() <= 1e-3 && (x3 - 0.682).abs() <= 1e-3;
    let mut detail = format!("x(2,1) = {x2:.6}, x(3,1) = {x3:.6}");
    for (r, want) in [(2, 1.618), (3, 1.545), (4, 1.494), (5, 1.453)] {
        let got = ind_limit(r, 1.0).unwrap().exp();
        ok &= (got - want).abs() <= 1e-3;
        detail.push_str(&format!(", e^limit(r={r}) = {got:.4}"));
    }
    assert!(report(1, "fixed points and limits", ok, &detail, start.elapsed(), secs(1)));
}

#[test]
fn criterion_02_contraction_grid() {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, want) in [(2, ratio(1089, 2500)), (3, ratio(109, 165)), (4, ratio(825, 943))] {
        let gm = grid_search_max(&GridSpec::new(k)).unwrap();
        let hit = gm.value == want;
        ok &= hit;
        parts.push(format!(
            "k={k} got {} ~ {:.6} at {:?}, expected {want} ~ {:.6}",
            gm.value,
            gm.value_f64(),
            gm.point(),
            cavity_core::oracle::Value::Exact(want.clone()).to_f64()
        ));
    }
    let budget = secs(600);
    assert!(report(2, "contraction grid maxima", ok, &parts.join("; "), start.elapsed(), budget));
}

#[test]
fn criterion_03_cavity_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = OracleConfig::default();
    let lambdas = [ratio(1, 2), ratio(1, 1), ratio(2, 1)];
    let mut checked = 0;
    let mut failures = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=12);
        let p = rng.gen_range(0.1..0.7);
        let g = random_graph(&mut rng, n, p);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for l in &lambdas {
            let rep = verify_cavity_identity(&g, &Activity::Rational(l.clone()), Some(&order), &cfg).unwrap();
            checked += 1;
            if !(rep.holds && rep.product.is_exact() && rep.product == rep.exact) {
                failures += 1;
            }
        }
    }
    let detail = format!("{checked} (graph, lambda) pairs, {failures} mismatches in exact rational arithmetic");
    assert!(report(3, "cavity identity", failures == 0, &detail, start.elapsed(), secs(60)));
}

#[test]
fn criterion_04_coloring_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = OracleConfig::default();
    let mut failures = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=9);
        let p = rng.gen_range(0.1..0.7);
        let g = random_graph(&mut rng, n, p);
        let q = g.max_degree() + 1;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let rep = verify_color_identity(&g, q, Some(&order), &cfg).unwrap();
        if !(rep.holds && rep.product.is_exact() && rep.product == rep.exact) {
            failures += 1;
        }
    }
    let detail = format!("100 graphs with q = max degree + 1, {failures} mismatches");
    assert!(report(4, "coloring identity", failures == 0, &detail, start.elapsed(), secs(120)));
}

#[test]
fn criterion_05_forest_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=1000);
        let max_degree = rng.gen_range(2..=6);
        let g = generate(&GraphKind::RandomTree { n, max_degree, seed: rng.gen() }).unwrap();
        let q = g.max_degree() + 1 + rng.gen_range(0..3);
        let want = (q as f64).ln() + (n - 1) as f64 * ((q - 1) as f64).ln();
        for _ in 0..10 {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let got = count_colorings(&g, q, Some(&order)).unwrap().log_z;
            worst = worst.max((got - want).abs());
        }
    }
    let detail = format!("50 trees x 10 orders, max |error| = {worst:.3e}");
    assert!(report(5, "forest exactness of colorings", worst <= 1e-9, &detail, start.elapsed(), secs(10)));
}

#[test]
fn criterion_06_cycle_convergence() {
    let start = Instant::now();
    let g = generate(&GraphKind::Cycle(60)).unwrap();
    let est = count_independent_sets(&g, 0.2, 1.0, None, &CountOptions::default()).unwrap();
    let exact = transfer_matrix_cycle(60, &Activity::one()).unwrap().value.ln();
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let (lo, hi) = est.certified.unwrap();
    let dev = (est.log_z_per_node() - golden).abs();
    let ok = est.method == Method::Cavity && dev <= 0.02 && lo <= exact && exact <= hi;
    let detail = format!("per-node deviation {dev:.5}, exact {exact:.9} in [{lo:.9}, {hi:.9}]");
    assert!(report(6, "cycle convergence", ok, &detail, start.elapsed(), secs(1)));
}

#[test]
fn criterion_07_certified_soundness() {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    // epsilon above 1 never triggers the exact fallback, so the cavity path runs.
    for name in [NamedGraph::Petersen, NamedGraph::Heawood, NamedGraph::McGee] {
        let g = generate(&GraphKind::Named(name)).unwrap();
        let est = count_independent_sets(&g, 2.0, 1.0, None, &CountOptions::default()).unwrap();
        let exact = independence_polynomial(&g, &Activity::one(), &OracleConfig::default()).unwrap().value.ln();
        let (lo, hi) = est.certified.unwrap();
        ok &= est.method == Method::Cavity && lo <= exact && exact <= hi;
        parts.push(format!("{name}: {exact:.6} in [{lo:.6}, {hi:.6}]"));
    }
    assert!(report(7, "certified soundness", ok, &parts.join("; "), start.elapsed(), secs(300)));
}

#[test]
fn criterion_08_decay_invariant() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut width_failures, mut enclosure_failures, mut worst_ratio) = (0, 0, 0.0f64);
    for _ in 0..1000 {
        let t = rng.gen_range(2..=12);
        let tree = RootedTree::random(&mut rng, 4, t, 0.3);
        let iv = interval_bounds(&tree, 1.0);
        let bound = 0.9f64.powi(t as i32 - 2);
        worst_ratio = worst_ratio.max(iv.width() / bound);
        if iv.width() > bound {
            width_failures += 1;
        }
        let boundary: Vec<usize> = tree.boundary().collect();
        let mut conditions = vec![
            BoundaryCondition::uniform(&tree, Occupancy::In),
            BoundaryCondition::uniform(&tree, Occupancy::Out),
        ];
        for _ in 0..4 {
            conditions.push(
                boundary
                    .iter()
                    .map(|&u| (u, if rng.gen_bool(0.5) { Occupancy::In } else { Occupancy::Out }))
                    .collect(),
            );
        }
        for b in &conditions {
            let p = marginal_with_boundary(&tree, 1.0, b).unwrap();
            if !(iv.lo - 1e-12 <= p && p <= iv.hi + 1e-12) {
                enclosure_failures += 1;
            }
        }
    }
    let ok = width_failures == 0 && enclosure_failures == 0;
    let detail = format!(
        "1000 trees, width violations {width_failures}, enclosure violations {enclosure_failures}, max width / bound {worst_ratio:.4}"
    );
    assert!(report(8, "decay invariant", ok, &detail, start.elapsed(), secs(60)));
}

/// Pairs at distance at least 3, farthest first, then lexicographic.
fn far_pairs(g: &Graph) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for u in 0..g.node_count() {
        for (v, d) in g.distances_from(u).into_iter().enumerate().skip(u + 1) {
            if let Some(d) = d.filter(|&d| d >= 3) {
                pairs.push((d, u, v));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    pairs.into_iter().map(|(_, u, v)| (u, v)).collect()
}

#[test]
fn criterion_09_energy_shift() {
    let start = Instant::now();
    let cfg = OracleConfig::default();
    let mut instances = vec![(generate(&GraphKind::Cycle(12)).unwrap(), 0, 6)];
    let mut seed = 0;
    while instances.len() < 11 {
        let n = [10, 12, 14][seed as usize % 3];
        let g = generate(&GraphKind::RandomRegular { n, r: 3, seed }).unwrap();
        seed += 1;
        // The identity pairing must not duplicate an existing edge.
        let admissible =
            far_pairs(&g).into_iter().find(|&(u, v)| verify_energy_shift(&g, u, v, &Activity::one(), &cfg).is_ok());
        if let Some((u, v)) = admissible {
            instances.push((g, u, v));
        }
    }
    let (mut failures, mut worst_float) = (0, 0.0f64);
    for (g, v1, v2) in &instances {
        let exact = verify_energy_shift(g, *v1, *v2, &Activity::one(), &cfg).unwrap();
        let float = verify_energy_shift(g, *v1, *v2, &Activity::Float(1.0), &cfg).unwrap();
        worst_float = worst_float.max(float.deviation);
        if !(exact.holds && exact.deviation <= 1e-12 && float.deviation <= 1e-9) {
            failures += 1;
        }
    }
    let detail = format!(
        "C_12 antipodal plus 10 cubic graphs (seeds 0..{seed}), {failures} failures, worst float deviation {worst_float:.2e}"
    );
    assert!(report(9, "energy shift", failures == 0, &detail, start.elapsed(), secs(60)));
}

#[test]
fn criterion_10_random_regular_trend() {
    let start = Instant::now();
    let base = ExperimentConfig {
        r: 3,
        model: ExperimentModel::Independent(Activity::one()),
        n_min: 16,
        n_max: 24,
        reps: 20,
        seed: 7,
        mode: Mode::Exact,
        epsilon: 0.1,
        oracle: OracleConfig::default(),
    };
    let ind_rows = experiment_random_regular(&base).unwrap();
    let ind_mean = mean_per_node(&ind_rows);
    let ind_target = 1.545f64.ln();
    let color_cfg = ExperimentConfig { model: ExperimentModel::Coloring(4), n_min: 10, n_max: 14, ..base };
    let color_rows = experiment_random_regular(&color_cfg).unwrap();
    let color_mean = mean_per_node(&color_rows);
    let color_target = (4.0 * 0.75f64.powf(1.5)).ln();
    let (ind_rel, color_rel) =
        ((ind_mean - ind_target).abs() / ind_target, (color_mean - color_target).abs() / color_target);
    let ok = ind_rel <= 0.05 && color_rel <= 0.05;
    let detail = format!(
        "independent sets mean {ind_mean:.5} vs {ind_target:.5} ({:.2}% off, {} graphs); colorings mean {color_mean:.5} vs {color_target:.5} ({:.2}% off, {} graphs)",
        100.0 * ind_rel,
        ind_rows.len(),
        100.0 * color_rel,
        color_rows.len()
    );
    assert!(report(10, "random regular trend", ok, &detail, start.elapsed(), secs(600)));
}

#[test]
fn criterion_11_coloring_decay() {
    let start = Instant::now();
    let rows = decay_experiment(3, 8, DecayModel::Coloring { q: 4 }, 0, 11).unwrap();
    let devs: Vec<f64> = rows.iter().filter(|r| r.depth >= 2).map(|r| r.max_dev).collect();
    let ok = devs.len() == 7 && devs.windows(2).all(|w| w[1] < w[0]);
    let detail = format!("max deviation for t = 2..8: {:?}", devs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>());
    assert!(report(11, "coloring decay", ok, &detail, start.elapsed(), secs(60)));
}
