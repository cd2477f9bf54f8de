//! Exact partition functions for small graphs, used as ground truth.
//!
//! Independent-set quantities are computed in exact rational arithmetic when
//! the activity is given as a rational, and in `f64` otherwise. Coloring
//! counts are always exact integers.

mod color;
mod ind;
mod verify;

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, GraphError};

pub use color::{count_proper_colorings, expected_used_colors};
pub use ind::{exact_marginal_ind, independence_polynomial, independence_polynomial_naive};
pub(crate) use ind::residual_log_partitions;
pub use verify::{
    verify_cavity_identity, verify_color_energy_shift, verify_color_identity,
    verify_energy_shift, CavityIdentityReport, ColorEnergyShiftReport, ColorIdentityReport,
    EnergyShiftReport,
};

pub const DEFAULT_IND_CAP: usize = 34;
pub const DEFAULT_COLOR_CAP: usize = 16;
/// Bitmask engines index nodes by bits of a `u64`.
pub const HARD_NODE_LIMIT: usize = 64;
/// Largest graph handled by plain subset enumeration.
pub const NAIVE_CAP: usize = 26;
/// Relative tolerance for identity checks in floating point.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("graph has {n} nodes, above the oracle cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{q} colors is fewer than max degree + 1 = {needed}")]
    TooFewColors { q: usize, needed: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Node caps for the exponential-time engines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleConfig {
    pub ind_cap: usize,
    pub color_cap: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { ind_cap: DEFAULT_IND_CAP, color_cap: DEFAULT_COLOR_CAP }
    }
}

impl OracleConfig {
    pub(crate) fn check_ind(&self, g: &Graph) -> Result<(), OracleError> {
        check_cap(g.node_count(), self.ind_cap.min(HARD_NODE_LIMIT))
    }
}

pub(crate) fn check_cap(n: usize, cap: usize) -> Result<(), OracleError> {
    if n > cap {
        Err(OracleError::TooLarge { n, cap })
    } else {
        Ok(())
    }
}

/// Activity for the hard-core model: exact rational or a float.
#[derive(Clone, Debug, PartialEq)]
pub enum Activity {
    Rational(BigRational),
    Float(f64),
}

impl Activity {
    pub fn from_ratio(num: i64, den: i64) -> Self {
        Activity::Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn one() -> Self {
        Activity::from_ratio(1, 1)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Activity::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Activity::Float(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Activity::Rational(r) => r.is_zero(),
            Activity::Float(x) => *x == 0.0,
        }
    }
}

/// Parses `p/q` and plain decimals (`0.25`) exactly; anything else that
/// `f64` accepts (`1e-3`) becomes a float activity. Negative values and
/// non-finite floats are rejected.
impl FromStr for Activity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("invalid activity '{s}'");
        let value = if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Activity::Rational(BigRational::new(p, q))
        } else if let Some(r) = parse_decimal(s) {
            Activity::Rational(r)
        } else {
            let x: f64 = s.parse().map_err(|_| bad())?;
            if !x.is_finite() {
                return Err(bad());
            }
            Activity::Float(x)
        };
        match &value {
            Activity::Rational(r) if r.is_negative() => Err(bad()),
            Activity::Float(x) if *x < 0.0 => Err(bad()),
            _ => Ok(value),
        }
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits = |t: &str| t.chars().all(|c| c.is_ascii_digit());
    if int.is_empty() && frac.is_empty() || !digits(int) || !digits(frac) {
        return None;
    }
    let num: BigInt = format!("{int}{frac}").parse().ok()?;
    Some(BigRational::new(num, BigInt::from(10).pow(frac.len() as u32)))
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activity::Rational(r) => write!(f, "{r}"),
            Activity::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Exact or approximate value of a partition function or probability.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => ratio_to_f64(r),
            Value::Approx(x) => *x,
        }
    }

    /// Natural logarithm, accurate even when the value overflows `f64`.
    pub fn ln(&self) -> f64 {
        match self {
            Value::Exact(r) => ln_big(r.numer()) - ln_big(r.denom()),
            Value::Approx(x) => x.ln(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    /// Exact equality for rationals, relative `tol` otherwise.
    pub fn agrees_with(&self, other: &Value, tol: f64) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            _ => relative_deviation(self, other) <= tol,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// `|a - b| / max(|b|, tiny)`, computed in logs when both are positive so
/// that huge exact values do not overflow.
pub(crate) fn relative_deviation(a: &Value, b: &Value) -> f64 {
    if let (Value::Exact(x), Value::Exact(y)) = (a, b) {
        if y.is_zero() {
            return if x.is_zero() { 0.0 } else { f64::INFINITY };
        }
        return ratio_to_f64(&((x - y) / y).abs());
    }
    let (x, y) = (a.to_f64(), b.to_f64());
    if x > 0.0 && y > 0.0 && (x.is_infinite() || y.is_infinite()) {
        return (a.ln() - b.ln()).exp_m1().abs();
    }
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let l = ln_big(r.numer()) - ln_big(r.denom());
        if r.is_negative() {
            -l.exp()
        } else {
            l.exp()
        }
    })
}

/// `ln |x|` for arbitrarily large integers (`-inf` for zero).
pub fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Arithmetic needed by the generic engines; implemented by `f64` and
/// `BigRational`.
pub(crate) trait Weight:
    Clone
    + One
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + PartialOrd
{
    fn from_u128(x: u128) -> Self;
    fn into_value(self) -> Value;
}

impl Weight for f64 {
    fn from_u128(x: u128) -> Self {
        x as f64
    }
    fn into_value(self) -> Value {
        Value::Approx(self)
    }
}

impl Weight for BigRational {
    fn from_u128(x: u128) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
    fn into_value(self) -> Value {
        Value::Exact(self)
    }
}

/// Evaluates a `Weight`-generic expression at the activity's number type.
macro_rules! with_activity {
    ($lambda:expr, |$l:ident| $body:expr) => {
        match $lambda {
            $crate::oracle::Activity::Rational(r) => {
                let $l: &::num_rational::BigRational = r;
                $crate::oracle::Weight::into_value($body)
            }
            $crate::oracle::Activity::Float(x) => {
                let $l: &f64 = x;
                $crate::oracle::Weight::into_value($body)
            }
        }
    };
}
pub(crate) use with_activity;

/// Value of a partition function together with the node cap in force.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub value: Value,
    pub node_budget: usize,
}

/// Adjacency as bitmasks. Requires `n <= 64`.
pub(crate) fn adjacency_masks(g: &Graph) -> Vec<u64> {
    assert!(g.node_count() <= HARD_NODE_LIMIT);
    (0..g.node_count())
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w))
        .collect()
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn mat_mul<T: Weight>(a: &[[T; 2]; 2], b: &[[T; 2]; 2]) -> [[T; 2]; 2] {
    let e = |i: usize, j: usize| a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone();
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn transfer_trace<T: Weight>(n: usize, lambda: &T) -> T {
    // Row/column 0 is "unoccupied", 1 is "occupied"; entry (s, s') is the
    // weight of moving from state s to s', with lambda charged on entering
    // an occupied node and 1 -> 1 forbidden. Z(C_n) = trace(M^n).
    let m = [[T::one(), T::one()], [lambda.clone(), T::zero()]];
    let mut result = [[T::one(), T::zero()], [T::zero(), T::one()]];
    let mut base = m;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    result[0][0].clone() + result[1][1].clone()
}

/// Exact `Z(lambda, C_n)` as the trace of the `n`-th power of
/// `[[1, 1], [lambda, 0]]`. At `lambda = 1` this is the Lucas number `L_n`.
pub fn transfer_matrix_cycle(n: usize, lambda: &Activity) -> Result<OracleResult, OracleError> {
    if n < 3 {
        return Err(OracleError::PreconditionViolated(format!("cycle needs n >= 3, got {n}")));
    }
    Ok(OracleResult { value: with_activity!(lambda, |l| transfer_trace(n, l)), node_budget: n })
}
