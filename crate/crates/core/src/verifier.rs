//! Exact grid maximization of `g(z) = ||grad f(z)||_1` for
//! `f(z) = 1 / (1 + lambda prod z_j)` and a Lipschitz certificate for its
//! maximum over the continuous box.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Largest number of sorted grid tuples a single search may visit.
pub const MAX_GRID_TUPLES: u128 = 2_000_000_000;

/// Resolution denominators tried by [`taylor_certify`], coarse to fine.
pub const REFINEMENT_LADDER: [u64; 3] = [1000, 2000, 4000];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifierError {
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("bound {:.6} does not certify target {target} (finest resolution 1/{})", .report.certified_bound, .report.resolution_den)]
    CertificationFailed { target: f64, report: Box<CertificationReport> },
}

/// Grid `z_j = m_j / resolution_den` over the box `[1/(1+l), 1/(1+l(1+l)^{-(r-1)})]^k`
/// with `l = lambda_num / lambda_den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub k: usize,
    pub resolution_den: u64,
    pub lambda_num: u64,
    pub lambda_den: u64,
    pub r: usize,
}

impl GridSpec {
    /// Resolution 0.001, lambda = 1, r = 4: the box `[1/2, 8/9]^k`.
    pub fn new(k: usize) -> Self {
        GridSpec { k, resolution_den: 1000, lambda_num: 1, lambda_den: 1, r: 4 }
    }

    pub fn with_resolution(self, resolution_den: u64) -> Self {
        GridSpec { resolution_den, ..self }
    }

    pub fn lambda(&self) -> BigRational {
        BigRational::new(self.lambda_num.into(), self.lambda_den.into())
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda_num as f64 / self.lambda_den as f64
    }

    pub fn resolution(&self) -> f64 {
        1.0 / self.resolution_den as f64
    }

    /// Exact domain endpoints.
    pub fn domain(&self) -> (BigRational, BigRational) {
        let one = BigRational::one();
        let l = self.lambda();
        let lo = (&one / (&one + &l)).clone();
        let shrink = (&one + &l).pow(-(self.r as i32 - 1));
        let hi = &one / (&one + &l * shrink);
        (lo, hi)
    }

    /// Grid numerators `m` with `lo <= m / N <= hi`.
    pub fn grid_range(&self) -> (u64, u64) {
        let (lo, hi) = self.domain();
        let n = BigRational::from_integer(self.resolution_den.into());
        let m_lo = (lo * &n).ceil().to_integer().to_u64().expect("small");
        let m_hi = (hi * &n).floor().to_integer().to_u64().expect("small");
        (m_lo, m_hi)
    }

    /// Number of sorted tuples `m_1 <= ... <= m_k` on the grid.
    pub fn tuple_count(&self) -> u128 {
        let (lo, hi) = self.grid_range();
        let width = (hi - lo + 1) as u128;
        // C(width + k - 1, k)
        (0..self.k as u128).fold(1u128, |acc, i| acc * (width + i) / (i + 1))
    }

    fn validate(&self) -> Result<(), VerifierError> {
        let bad = |m: String| Err(VerifierError::InvalidSpec(m));
        if self.k == 0 {
            return bad("arity k must be at least 1".into());
        }
        if self.resolution_den == 0 || self.lambda_num == 0 || self.lambda_den == 0 {
            return bad("resolution and lambda must be positive".into());
        }
        if self.r < 2 {
            return bad(format!("degree r must be at least 2, got {}", self.r));
        }
        let (lo, hi) = self.grid_range();
        if lo == 0 || lo > hi {
            return bad("grid has no points in the domain".into());
        }
        // Numerator a b S' N^{k+1} and (b N^k + a P)^2 must fit in u128.
        let n = BigUint::from(self.resolution_den);
        let (a, b) = (BigUint::from(self.lambda_num), BigUint::from(self.lambda_den));
        let m = BigUint::from(hi);
        let k = self.k as u32;
        let s = BigUint::from(self.k) * m.pow(k - 1);
        let num = &a * &b * s * n.pow(k + 1);
        let den = (&b * n.pow(k) + &a * m.pow(k)).pow(2);
        if num.bits() > 127 || den.bits() > 127 {
            return bad(format!("grid values overflow 128-bit arithmetic for k = {k}"));
        }
        if self.tuple_count() > MAX_GRID_TUPLES {
            return bad(format!("{} tuples exceed the cap of {MAX_GRID_TUPLES}", self.tuple_count()));
        }
        Ok(())
    }
}

/// `lambda (prod z) (sum 1/z_j) / (1 + lambda prod z)^2`.
pub fn grad_norm_l1(z: &[f64], lambda: f64) -> f64 {
    let p: f64 = z.iter().product();
    let s: f64 = z.iter().map(|x| 1.0 / x).sum();
    lambda * p * s / (1.0 + lambda * p).powi(2)
}

/// Exact maximum of [`grad_norm_l1`] over the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMax {
    pub value: BigRational,
    /// Grid numerators of the lexicographically smallest sorted maximizer.
    pub argmax: Vec<u64>,
    pub resolution_den: u64,
    pub tuples: u128,
}

impl GridMax {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }

    pub fn point(&self) -> Vec<f64> {
        self.argmax.iter().map(|&m| m as f64 / self.resolution_den as f64).collect()
    }
}

#[derive(Clone, Debug)]
struct Best {
    num: u128,
    den: u128,
    approx: f64,
    point: Vec<u64>,
}

impl Best {
    /// Exact comparison of values, then the smaller point wins ties.
    fn better_than(&self, other: &Best) -> bool {
        let lhs = BigUint::from(self.num) * BigUint::from(other.den);
        let rhs = BigUint::from(other.num) * BigUint::from(self.den);
        match lhs.cmp(&rhs) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.point < other.point,
        }
    }

    fn pick(a: Option<Best>, b: Option<Best>) -> Option<Best> {
        match (a, b) {
            (Some(a), Some(b)) => Some(if b.better_than(&a) { b } else { a }),
            (a, b) => a.or(b),
        }
    }
}

struct Scanner {
    k: usize,
    m_hi: u64,
    /// `a b N^{k+1}` and `b N^k` for `lambda = a / b`.
    num_scale: u128,
    den_offset: u128,
    a: u128,
    num_scale_f: f64,
}

impl Scanner {
    /// Scans sorted tuples whose first `prefix.len()` entries are fixed.
    /// `p` is the product of the prefix and `e` its elementary symmetric
    /// polynomial of degree `len - 1`.
    fn scan(&self, prefix: &mut Vec<u64>, p: u128, e: u128, best: &mut Option<Best>) {
        let start = *prefix.last().expect("non-empty prefix");
        if prefix.len() + 1 < self.k {
            for m in start..=self.m_hi {
                prefix.push(m);
                self.scan(prefix, p * m as u128, e * m as u128 + p, best);
                prefix.pop();
            }
            return;
        }
        for m in start..=self.m_hi {
            let (p, e) = (p * m as u128, e * m as u128 + p);
            self.consider(prefix, m, p, e, best);
        }
    }

    #[inline]
    fn consider(&self, prefix: &[u64], m: u64, p: u128, e: u128, best: &mut Option<Best>) {
        let t = self.den_offset + self.a * p;
        let tf = t as f64;
        let approx = self.num_scale_f * e as f64 / (tf * tf);
        if let Some(b) = best.as_ref() {
            if approx < b.approx * (1.0 - 1e-9) {
                return;
            }
        }
        let mut point = prefix.to_vec();
        point.push(m);
        let cand = Best { num: self.num_scale * e, den: t * t, approx, point };
        if best.as_ref().map_or(true, |b| cand.better_than(b)) {
            *best = Some(cand);
        }
    }
}

/// Exact maximum over all sorted grid tuples (the function is symmetric).
pub fn grid_search_max(spec: &GridSpec) -> Result<GridMax, VerifierError> {
    spec.validate()?;
    let (m_lo, m_hi) = spec.grid_range();
    let n = spec.resolution_den as u128;
    let (a, b) = (spec.lambda_num as u128, spec.lambda_den as u128);
    let k = spec.k as u32;
    let num_scale = a * b * n.pow(k + 1);
    let scanner = Scanner {
        k: spec.k,
        m_hi,
        num_scale,
        den_offset: b * n.pow(k),
        a,
        num_scale_f: num_scale as f64,
    };
    let best = (m_lo..=m_hi)
        .into_par_iter()
        .map(|m1| {
            let mut best = None;
            if spec.k == 1 {
                scanner.consider(&[], m1, m1 as u128, 1, &mut best);
            } else {
                scanner.scan(&mut vec![m1], m1 as u128, 1, &mut best);
            }
            best
        })
        .reduce(|| None, Best::pick)
        .expect("grid is non-empty");
    let g = best.num.gcd(&best.den);
    let value = BigRational::new(BigInt::from(best.num / g), BigInt::from(best.den / g));
    Ok(GridMax { value, argmax: best.point, resolution_den: spec.resolution_den, tuples: spec.tuple_count() })
}

/// Rigorous bound on `|d g / d z_j|` over the box `[lo, hi]^k`.
///
/// With `P = prod z`, `e = e_{k-1}(z)`, `E_j = e_{k-2}(z without z_j)` and
/// `P_j = P / z_j`, `d g / d z_j = lambda (E_j (1 + lambda P) - 2 lambda e P_j) / (1 + lambda P)^3`.
/// Both terms are non-negative, so the absolute value is at most the larger
/// one; each is bounded using `z_i <= hi` and `1 + lambda P >= 1 + lambda lo^k`.
pub fn lipschitz_constant(k: usize, lambda: f64, lo: f64, hi: f64) -> f64 {
    let kf = k as f64;
    let d0 = 1.0 + lambda * lo.powi(k as i32);
    let e_j = if k >= 2 { (kf - 1.0) * hi.powi(k as i32 - 2) } else { 0.0 };
    let e = kf * hi.powi(k as i32 - 1);
    let p_j = hi.powi(k as i32 - 1);
    lambda * (e_j / (d0 * d0)).max(2.0 * lambda * e * p_j / (d0 * d0 * d0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Attempt {
    pub resolution_den: u64,
    pub grid_max: f64,
    /// Largest distance from a domain point to the grid, per coordinate.
    pub spacing: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificationReport {
    pub k: usize,
    pub target: f64,
    /// Finest resolution examined.
    pub resolution_den: u64,
    /// Exact grid maximum at that resolution, as `p/q`.
    pub grid_max: String,
    pub grid_argmax: Vec<f64>,
    pub lipschitz: f64,
    /// Smallest rigorous upper bound on the continuous maximum found.
    pub certified_bound: f64,
    pub certified: bool,
    pub attempts: Vec<Attempt>,
}

fn lipschitz_for(spec: &GridSpec) -> f64 {
    let (lo, hi) = spec.domain();
    lipschitz_constant(spec.k, spec.lambda_f64(), lo.to_f64().unwrap(), hi.to_f64().unwrap())
}

/// Grid maximum at a single resolution and the resulting rigorous bound
/// `grid max + k * L * delta` on the continuous maximum.
pub fn lipschitz_bound(spec: &GridSpec) -> Result<(GridMax, Attempt), VerifierError> {
    let gm = grid_search_max(spec)?;
    let (lo, hi) = spec.domain();
    let (lo, hi) = (lo.to_f64().unwrap(), hi.to_f64().unwrap());
    let (m_lo, m_hi) = spec.grid_range();
    let n = spec.resolution_den as f64;
    let spacing = (0.5 / n).max(m_lo as f64 / n - lo).max(hi - m_hi as f64 / n);
    let grid_max = gm.value_f64();
    // Round up by a few ulps to cover the float evaluation of the slack.
    let bound = (grid_max + spec.k as f64 * lipschitz_for(spec) * spacing) * (1.0 + 1e-12);
    let attempt = Attempt { resolution_den: spec.resolution_den, grid_max, spacing, bound };
    Ok((gm, attempt))
}

/// Bounds the continuous maximum of `g` by `grid max + k * L * delta`, where
/// `L` is [`lipschitz_constant`] and `delta` the largest per-coordinate
/// distance from a domain point to the grid. Refines along
/// [`REFINEMENT_LADDER`] (starting at `spec.resolution_den`) until the bound
/// is below `target`; stops early once the grid maximum itself reaches the
/// target, since finer grids only raise it.
pub fn taylor_certify(spec: &GridSpec, target: f64) -> Result<CertificationReport, VerifierError> {
    spec.validate()?;
    let ladder: Vec<u64> = std::iter::once(spec.resolution_den)
        .chain(REFINEMENT_LADDER.iter().copied().filter(|&d| d > spec.resolution_den))
        .collect();
    let mut attempts = Vec::new();
    let mut certified_bound = f64::INFINITY;
    let mut last: Option<GridMax> = None;
    for den in ladder {
        let refined = spec.with_resolution(den);
        if refined.validate().is_err() {
            break;
        }
        let (gm, attempt) = lipschitz_bound(&refined)?;
        certified_bound = certified_bound.min(attempt.bound);
        let grid_max = attempt.grid_max;
        attempts.push(attempt);
        last = Some(gm);
        if certified_bound < target || grid_max >= target {
            break;
        }
    }
    let gm = last.expect("the requested resolution is valid");
    let report = CertificationReport {
        k: spec.k,
        target,
        resolution_den: gm.resolution_den,
        grid_max: gm.value.to_string(),
        grid_argmax: gm.point(),
        lipschitz: lipschitz_for(spec),
        certified_bound,
        certified: certified_bound < target,
        attempts,
    };
    if report.certified {
        Ok(report)
    } else {
        Err(VerifierError::CertificationFailed { target, report: Box::new(report) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use proptest::prelude::*;

    /// Exact g at grid numerators, straight from the definition.
    fn exact_g(point: &[u64], spec: &GridSpec) -> BigRational {
        let n = BigRational::from_integer(spec.resolution_den.into());
        let z: Vec<BigRational> = point.iter().map(|&m| BigRational::from_integer(m.into()) / &n).collect();
        let p = z.iter().fold(BigRational::one(), |acc, x| acc * x);
        let s = z.iter().fold(BigRational::zero(), |acc, x| acc + x.recip());
        let l = spec.lambda();
        let denom = BigRational::one() + &l * &p;
        l * p * s / (&denom * &denom)
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(grad_norm_l1(&[1.0], 1.0), 0.25);
        assert!((grad_norm_l1(&[0.5, 0.5], 1.0) - 16.0 / 25.0).abs() < 1e-15);
    }

    #[test]
    fn domain_for_unit_activity() {
        let spec = GridSpec::new(2);
        let (lo, hi) = spec.domain();
        assert_eq!(lo, BigRational::new(1.into(), 2.into()));
        assert_eq!(hi, BigRational::new(8.into(), 9.into()));
        assert_eq!(spec.grid_range(), (500, 888));
        assert_eq!(GridSpec::new(1).tuple_count(), 389);
        assert_eq!(GridSpec::new(2).tuple_count(), 389 * 390 / 2);
    }

    #[test]
    fn grid_max_matches_brute_force_on_coarse_grids() {
        for k in 1..=3 {
            for den in [20u64, 37, 50] {
                let spec = GridSpec::new(k).with_resolution(den);
                let gm = grid_search_max(&spec).unwrap();
                let (lo, hi) = spec.grid_range();
                // Unsorted brute force over the full product grid.
                let mut best = BigRational::zero();
                let mut idx = vec![lo; k];
                loop {
                    let v = exact_g(&idx, &spec);
                    if v > best {
                        best = v;
                    }
                    let mut i = 0;
                    while i < k && idx[i] == hi {
                        idx[i] = lo;
                        i += 1;
                    }
                    if i == k {
                        break;
                    }
                    idx[i] += 1;
                }
                assert_eq!(gm.value, best, "k={k} den={den}");
                assert_eq!(exact_g(&gm.argmax, &spec), best);
            }
        }
    }

    #[test]
    fn unit_resolution_small_arities() {
        let one = grid_search_max(&GridSpec::new(1)).unwrap();
        assert_eq!(one.value, BigRational::new(4.into(), 9.into()));
        assert_eq!(one.argmax, vec![500]);
        let two = grid_search_max(&GridSpec::new(2)).unwrap();
        assert_eq!(two.argmax, vec![500, 888]);
        assert_eq!(two.value, exact_g(&[500, 888], &GridSpec::new(2)));
    }

    #[test]
    fn lipschitz_bound_dominates_sampled_derivatives() {
        for k in 1..=4 {
            let l = lipschitz_constant(k, 1.0, 0.5, 8.0 / 9.0);
            for i in 0..200 {
                let z: Vec<f64> = (0..k).map(|j| 0.5 + (8.0 / 9.0 - 0.5) * (((i * 7 + j * 13) % 29) as f64 / 28.0)).collect();
                for j in 0..k {
                    let h = 1e-6;
                    let (mut up, mut dn) = (z.clone(), z.clone());
                    up[j] += h;
                    dn[j] -= h;
                    let d = (grad_norm_l1(&up, 1.0) - grad_norm_l1(&dn, 1.0)) / (2.0 * h);
                    // The bound is attained at the lower corner; allow finite-difference error.
                    assert!(d.abs() <= l + 1e-8, "k={k} d={d} l={l}");
                }
            }
        }
    }

    #[test]
    fn certification_small_arities() {
        for k in 1..=2 {
            let report = taylor_certify(&GridSpec::new(k), 0.9).unwrap();
            assert!(report.certified);
            assert!(report.certified_bound >= report.attempts[0].grid_max);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(grid_search_max(&GridSpec::new(0)).is_err());
        assert!(grid_search_max(&GridSpec::new(9)).is_err());
        assert!(grid_search_max(&GridSpec { lambda_num: 0, ..GridSpec::new(2) }).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn matches_finite_differences(z in proptest::collection::vec(0.05f64..2.0, 1..5), lambda in 0.1f64..3.0) {
            let f = |z: &[f64]| 1.0 / (1.0 + lambda * z.iter().product::<f64>());
            let h = 1e-6;
            let fd: f64 = (0..z.len())
                .map(|j| {
                    let (mut up, mut dn) = (z.clone(), z.clone());
                    up[j] += h;
                    dn[j] -= h;
                    ((f(&up) - f(&dn)) / (2.0 * h)).abs()
                })
                .sum();
            prop_assert!((fd - grad_norm_l1(&z, lambda)).abs() < 1e-6);
        }

        #[test]
        fn symmetric(mut z in proptest::collection::vec(0.1f64..1.5, 2..5), lambda in 0.1f64..3.0) {
            let before = grad_norm_l1(&z, lambda);
            z.reverse();
            z.rotate_left(1);
            prop_assert!((before - grad_norm_l1(&z, lambda)).abs() < 1e-14);
        }
    }
}
