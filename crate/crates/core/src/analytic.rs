//! Closed-form limits for regular graphs of large girth: the uniqueness
//! threshold, the tree fixed point, and per-node free energies.

use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Cap on bisection rounds; 200 halvings exhaust f64 precision on [0, 1].
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("degree must be at least 2, got {0}")]
    InvalidDegree(usize),
    #[error("activity {lambda} is not below the threshold {threshold} for degree {r}")]
    AboveThreshold { r: usize, lambda: f64, threshold: f64 },
    #[error("need q >= r + 1 colors, got q = {q}, r = {r}")]
    TooFewColors { q: usize, r: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    Finite(f64),
    Infinite,
}

impl Threshold {
    pub fn admits(&self, lambda: f64) -> bool {
        match *self {
            Threshold::Finite(t) => lambda < t,
            Threshold::Infinite => true,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Threshold::Finite(t) => t,
            Threshold::Infinite => f64::INFINITY,
        }
    }
}

/// `(r-1)^(r-1) / (r-2)^r`, infinite for `r = 2`.
pub fn lambda_threshold(r: usize) -> Result<Threshold, AnalyticError> {
    match r {
        0 | 1 => Err(AnalyticError::InvalidDegree(r)),
        2 => Ok(Threshold::Infinite),
        _ => {
            let (a, b) = ((r - 1) as f64, (r - 2) as f64);
            Ok(Threshold::Finite(a.powi(r as i32 - 1) / b.powi(r as i32)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub r: usize,
    pub lambda: f64,
    /// Root of `x (1 + lambda x^(r-1)) = 1` in `(0, 1]`.
    pub x: f64,
    pub residual: f64,
}

/// Bisection on the increasing function `h(x) = x + lambda x^r - 1`, which
/// has `h(0) = -1 < 0 <= h(1) = lambda`.
pub fn solve_fixed_point(r: usize, lambda: f64, tol: f64) -> Result<FixedPointResult, AnalyticError> {
    if r < 2 {
        return Err(AnalyticError::InvalidDegree(r));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) || !(tol > 0.0) {
        return Err(AnalyticError::InvalidParameters(format!("lambda = {lambda}, tol = {tol}")));
    }
    let residual = |x: f64| (x * (1.0 + lambda * x.powi(r as i32 - 1)) - 1.0).abs();
    let h = |x: f64| x + lambda * x.powi(r as i32) - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x = 1.0;
    for _ in 0..MAX_BISECTIONS {
        if residual(x) <= tol {
            break;
        }
        x = 0.5 * (lo + hi);
        if h(x) < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    Ok(FixedPointResult { r, lambda, x, residual: residual(x) })
}

fn fixed_point_below_threshold(r: usize, lambda: f64) -> Result<f64, AnalyticError> {
    let threshold = lambda_threshold(r)?;
    if !threshold.admits(lambda) {
        return Err(AnalyticError::AboveThreshold { r, lambda, threshold: threshold.as_f64() });
    }
    Ok(solve_fixed_point(r, lambda, DEFAULT_TOLERANCE)?.x)
}

/// Limiting `ln Z / n` for independent sets on `r`-regular graphs of
/// diverging girth.
pub fn ind_limit(r: usize, lambda: f64) -> Result<f64, AnalyticError> {
    let x = fixed_point_below_threshold(r, lambda)?;
    let r = r as f64;
    Ok(-(r / 2.0) * x.ln() - ((r - 2.0) / 2.0) * (2.0 - x).ln())
}

/// Limiting `ln Z / n` for `q`-colorings of `r`-regular graphs of diverging
/// girth: `ln q + (r/2) ln(1 - 1/q)`.
pub fn color_limit(q: usize, r: usize) -> Result<f64, AnalyticError> {
    if q <= r {
        return Err(AnalyticError::TooFewColors { q, r });
    }
    let qf = q as f64;
    Ok(qf.ln() + (r as f64 / 2.0) * (-1.0 / qf).ln_1p())
}

/// Limiting probabilities that the root is unoccupied: `x` for a root of
/// degree `r - 1`, `1 / (2 - x)` for a root of degree `r`.
pub fn kelly_marginals(r: usize, lambda: f64) -> Result<(f64, f64), AnalyticError> {
    let x = fixed_point_below_threshold(r, lambda)?;
    Ok((x, 1.0 / (2.0 - x)))
}

/// Limiting ratio `Z(rewired) / Z(original)` for one rewiring step:
/// `x^r (2 - x)^(r-2)`.
pub fn energy_shift(r: usize, lambda: f64) -> Result<f64, AnalyticError> {
    let x = fixed_point_below_threshold(r, lambda)?;
    Ok(x.powi(r as i32) * (2.0 - x).powi(r as i32 - 2))
}

/// `ln(q - r (1 - 1/e))`, the earlier per-node lower bound on colorings.
pub fn bezakova_bound(q: usize, r: usize) -> Result<f64, AnalyticError> {
    let base = q as f64 - r as f64 * (1.0 - (-1.0f64).exp());
    if base <= 0.0 {
        return Err(AnalyticError::InvalidParameters(format!(
            "q = {q} must exceed r (1 - 1/e) for r = {r}"
        )));
    }
    Ok(base.ln())
}
