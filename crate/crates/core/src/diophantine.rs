//! Nearest-integer norms and the conjectured height bound
//! `q^eps max{q^(1/3), max_r min_i ||r a_i / q||^(-1/2)}`.
//!
//! Every `||r a / q||` equals `d / q` with `d = |signed(r a mod q)|`, so the
//! inner maximum is `(q / b)^(1/2)` with `b = min_r max_i d_i(r)`, and all
//! comparisons reduce to integer arithmetic.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd_u64, mod_inverse, mul_mod, Modulus, Rational};
use crate::exec::Exec;
use crate::{Error, Result};

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn nearest_int_distance(x: f64) -> f64 {
    signed_remainder(x).abs()
}

/// `x - a` for the integer `a` with `x - a` in `(-1/2, 1/2]`.
pub fn signed_remainder(x: f64) -> f64 {
    let f = x - x.floor();
    if f > 0.5 {
        f - 1.0
    } else {
        f
    }
}

pub fn nearest_int_distance_exact(x: &Rational) -> Rational {
    let s = signed_remainder_exact(x);
    if s < Rational::from_integer(0) {
        -s
    } else {
        s
    }
}

pub fn signed_remainder_exact(x: &Rational) -> Rational {
    let f = x - x.floor();
    if f > Rational::new(1, 2) {
        f - 1
    } else {
        f
    }
}

/// Numerator `b` of the signed remainder `b / q` of `r a / q`, with
/// `b` in `(-q/2, q/2]`.
pub fn signed_numerator(r: u64, a: u64, q: u64) -> i64 {
    let b = mul_mod(r % q, a % q, q);
    if 2 * b > q {
        b as i64 - q as i64
    } else {
        b as i64
    }
}

/// Which `r` are scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scan {
    /// `1 <= r <= q - 1`
    Full,
    /// `1 <= r < q^(1/3)`, with the extra term `(q/r)^(1/2)`; requires `a1 = 1`.
    Restricted,
}

/// The maximised quantity `max{q^(1/3), inner}` in exact form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundValue {
    /// `q^(1/3)` is at least the inner maximum.
    Floor,
    /// `(q / b)^(1/2)` with `b^3 < q`.
    Inner { b: u64 },
}

impl BoundValue {
    fn from_denominator(q: u64, b: u64) -> Self {
        if (b as u128).pow(3) >= q as u128 {
            BoundValue::Floor
        } else {
            BoundValue::Inner { b }
        }
    }

    pub fn to_f64(self, q: u64) -> f64 {
        match self {
            BoundValue::Floor => (q as f64).cbrt(),
            BoundValue::Inner { b } => (q as f64 / b as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub q: u64,
    pub alpha: [u64; 3],
    pub epsilon: f64,
    pub scan: Scan,
    /// `q^eps` times the maximised quantity.
    pub rhs_value: f64,
    pub value: BoundValue,
    /// `b = min_r max_i d_i(r)` over the scanned `r`.
    pub inner_denominator: u64,
    /// `(q / b)^(1/2)`
    pub inner_max: f64,
    /// Smallest `r` attaining the inner maximum.
    pub argmax_r: u64,
    /// Numerators of the signed remainders `beta_i = b_i / q` at `argmax_r`.
    pub beta_numerators: [i64; 3],
}

impl ConjectureReport {
    pub fn betas(&self) -> [Rational; 3] {
        self.beta_numerators.map(|b| Rational::new(b as i128, self.q as i128))
    }

    pub fn betas_f64(&self) -> [f64; 3] {
        self.beta_numerators.map(|b| b as f64 / self.q as f64)
    }
}

fn check_alphas(modulus: &Modulus, alpha: [i64; 3]) -> Result<[u64; 3]> {
    for (a, what) in alpha.iter().zip(["alpha1", "alpha2", "alpha3"]) {
        modulus.require_unit(what, *a)?;
    }
    Ok(alpha.map(|a| modulus.reduce(a)))
}

const CHUNK: u64 = 4096;

/// `min_r key(r)` over `range`, smallest `r` on ties.
fn argmin_scan<F>(range: std::ops::Range<u64>, exec: Exec, key: F) -> Option<(u64, u64)>
where
    F: Fn(u64) -> u64 + Sync + Send,
{
    let (lo, hi) = (range.start, range.end);
    if lo >= hi {
        return None;
    }
    let chunks = (hi - lo).div_ceil(CHUNK);
    exec.map_range(0..chunks, |c| {
        let start = lo + c * CHUNK;
        let end = (start + CHUNK).min(hi);
        (start..end).map(|r| (key(r), r)).min().expect("non-empty chunk")
    })
    .into_iter()
    .min()
}

fn report(q: u64, alpha: [u64; 3], eps: f64, scan: Scan, best: (u64, u64)) -> ConjectureReport {
    let (b, r) = best;
    let value = BoundValue::from_denominator(q, b);
    ConjectureReport {
        q,
        alpha,
        epsilon: eps,
        scan,
        rhs_value: (q as f64).powf(eps) * value.to_f64(q),
        value,
        inner_denominator: b,
        inner_max: (q as f64 / b as f64).sqrt(),
        argmax_r: r,
        beta_numerators: alpha.map(|a| signed_numerator(r, a, q)),
    }
}

fn max_distance(r: u64, alpha: &[u64], q: u64) -> u64 {
    alpha
        .iter()
        .map(|&a| signed_numerator(r, a, q).unsigned_abs())
        .max()
        .unwrap_or(0)
}

/// Scans every `1 <= r <= q - 1`.
pub fn conjecture_rhs_full(modulus: &Modulus, alpha: [i64; 3], eps: f64, exec: Exec) -> Result<ConjectureReport> {
    let alpha = check_alphas(modulus, alpha)?;
    let q = modulus.q();
    let best = argmin_scan(1..q, exec, |r| max_distance(r, &alpha, q)).expect("q >= 3");
    Ok(report(q, alpha, eps, Scan::Full, best))
}

/// Largest `r` with `r^3 < q`.
pub fn cube_root_floor_strict(q: u64) -> u64 {
    let mut r = (q as f64).cbrt() as u64 + 1;
    while (r as u128).pow(3) >= q as u128 {
        r -= 1;
    }
    r
}

/// Scans `1 <= r < q^(1/3)` for the form with `a1 = 1`.
pub fn conjecture_rhs_fast(modulus: &Modulus, alpha2: i64, alpha3: i64, eps: f64) -> Result<ConjectureReport> {
    let alpha = check_alphas(modulus, [1, alpha2, alpha3])?;
    let q = modulus.q();
    let top = cube_root_floor_strict(q);
    let best = argmin_scan(1..top + 1, Exec::Serial, |r| r.max(max_distance(r, &alpha[1..], q)))
        .expect("r = 1 is always scanned");
    Ok(report(q, alpha, eps, Scan::Restricted, best))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No non-trivial solution of height at most `N`.
    Applies,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub q: u64,
    pub alpha: [u64; 3],
    pub r: u64,
    pub n: u64,
    pub beta_numerators: [i64; 3],
    pub verdict: Verdict,
}

impl ReductionReport {
    pub fn betas(&self) -> [Rational; 3] {
        self.beta_numerators.map(|b| Rational::new(b as i128, self.q as i128))
    }
}

/// With `r a_i = a_i' q + beta_i q`, any solution satisfies
/// `sum beta_i q x_i^2 = 0 (mod q)`. If the `beta_i` share a strict sign and
/// `max |beta_i| < 1 / (3 N^2)`, the left side is a non-zero integer of
/// absolute value below `q` for every non-trivial `x` in the box.
pub fn heuristic_reduction(modulus: &Modulus, alpha: [i64; 3], r: u64, n: u64) -> Result<ReductionReport> {
    let alpha = check_alphas(modulus, alpha)?;
    let q = modulus.q();
    if r.is_multiple_of(q) {
        return Err(Error::InvalidParameter(format!("r must be nonzero mod q, got r={r}")));
    }
    let betas = alpha.map(|a| signed_numerator(r, a, q));
    let same_sign = betas.iter().all(|&b| b > 0) || betas.iter().all(|&b| b < 0);
    let max_abs = betas.iter().map(|b| b.unsigned_abs() as u128).max().unwrap_or(0);
    let small = 3 * (n as u128).pow(2) * max_abs < q as u128;
    Ok(ReductionReport {
        q,
        alpha,
        r: r % q,
        n,
        beta_numerators: betas,
        verdict: if same_sign && small {
            Verdict::Applies
        } else {
            Verdict::Inconclusive
        },
    })
}

/// Moduli up to this size also return the exceptional residues.
pub const EXCEPTIONAL_LIST_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalCount {
    pub q: u64,
    pub count: u64,
    pub alphas: Option<Vec<u64>>,
}

/// Units `a3` with `||r a3 / q|| < q^(-2/3)` for some `1 <= r < q^(1/3)`.
///
/// For each such `r` and each `b` with `0 < |b| < q^(1/3)`, the solutions of
/// `r a3 = b (mod q)` are listed directly: with `g = gcd(r, q)` there are
/// none unless `g | b`, and otherwise `g` of them.
pub fn exceptional_alpha_count(modulus: &Modulus) -> ExceptionalCount {
    let q = modulus.q();
    let top = cube_root_floor_strict(q) as i64;
    let mut found = Vec::new();
    for r in 1..=top as u64 {
        let g = gcd_u64(r, q);
        let qg = q / g;
        let inv = mod_inverse(r / g, qg).expect("r/g is a unit mod q/g");
        for b in (-top..=top).filter(|&b| b != 0 && b % g as i64 == 0) {
            let b_red = crate::arith::reduce(b / g as i64, qg);
            let base = mul_mod(b_red, inv, qg);
            for k in 0..g {
                let a = base + k * qg;
                if gcd_u64(a, q) == 1 {
                    found.push(a);
                }
            }
        }
    }
    found.sort_unstable();
    found.dedup();
    ExceptionalCount {
        q,
        count: found.len() as u64,
        alphas: (q <= EXCEPTIONAL_LIST_LIMIT).then_some(found),
    }
}
