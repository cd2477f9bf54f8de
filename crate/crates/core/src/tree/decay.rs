use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    counting_tree_marginal, exact_tree_color_marginal, interval_bounds, marginal_with_boundary,
    BoundaryCondition, Occupancy, RootedTree, TreeError,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayModel {
    Independent { lambda: f64 },
    Coloring { q: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub depth: usize,
    pub model: &'static str,
    pub param: f64,
    /// Largest observed deviation of the root marginal: from the free-boundary
    /// value for independent sets, from uniform `1/q` for colorings.
    pub max_dev: f64,
    /// Width of the certified interval; independent sets only.
    pub certified_width: Option<f64>,
}

/// Runs the boundary-influence experiment on the depth-`d` ball of the
/// infinite `r`-regular tree for every `d` in `1..=t`. Besides `samples`
/// random boundaries drawn from `ChaCha8Rng::seed_from_u64(seed)`, the
/// uniform boundaries (all IN / all OUT, or all one color) are always tried.
pub fn decay_experiment(
    r: usize,
    t: usize,
    model: DecayModel,
    samples: usize,
    seed: u64,
) -> Result<Vec<DecayRow>, TreeError> {
    if r < 2 {
        return Err(TreeError::Malformed(format!("degree must be at least 2, got {r}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=t)
        .map(|depth| {
            let tree = RootedTree::regular(r, depth);
            match model {
                DecayModel::Independent { lambda } => {
                    ind_row(&tree, lambda, samples, &mut rng)
                }
                DecayModel::Coloring { q } => color_row(&tree, q, samples, &mut rng),
            }
        })
        .collect()
}

fn ind_row(
    tree: &RootedTree,
    lambda: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DecayRow, TreeError> {
    let free = counting_tree_marginal(tree, lambda);
    let mut boundaries = vec![
        BoundaryCondition::uniform(tree, Occupancy::In),
        BoundaryCondition::uniform(tree, Occupancy::Out),
    ];
    for _ in 0..samples {
        boundaries.push(
            tree.boundary()
                .map(|u| (u, if rng.gen_bool(0.5) { Occupancy::In } else { Occupancy::Out }))
                .collect(),
        );
    }
    let mut max_dev: f64 = 0.0;
    for b in &boundaries {
        max_dev = max_dev.max((marginal_with_boundary(tree, lambda, b)? - free).abs());
    }
    Ok(DecayRow {
        depth: tree.depth(),
        model: "ind",
        param: lambda,
        max_dev,
        certified_width: Some(interval_bounds(tree, lambda).width()),
    })
}

fn color_row(
    tree: &RootedTree,
    q: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DecayRow, TreeError> {
    // By color symmetry one monochromatic boundary covers all of them.
    let mut boundaries = vec![BoundaryCondition::uniform(tree, 0)];
    for _ in 0..samples {
        boundaries.push(tree.boundary().map(|u| (u, rng.gen_range(0..q))).collect());
    }
    let uniform = 1.0 / q as f64;
    let mut max_dev: f64 = 0.0;
    for b in &boundaries {
        let p = exact_tree_color_marginal(tree, q, b)?;
        max_dev = p.iter().fold(max_dev, |m, &x| m.max((x - uniform).abs()));
    }
    Ok(DecayRow {
        depth: tree.depth(),
        model: "color",
        param: q as f64,
        max_dev,
        certified_width: None,
    })
}

/// CSV with header `depth,model,param,max_dev,certified_width`; floats carry
/// 12 significant digits and a missing width is an empty field.
pub fn decay_csv(rows: &[DecayRow]) -> String {
    let mut out = String::from("depth,model,param,max_dev,certified_width\n");
    for row in rows {
        let width = row.certified_width.map(|w| format!("{w:.11e}")).unwrap_or_default();
        writeln!(out, "{},{},{},{:.11e},{}", row.depth, row.model, row.param, row.max_dev, width)
            .unwrap();
    }
    out
}
