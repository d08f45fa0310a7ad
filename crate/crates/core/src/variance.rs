//! Variance of the error term over `a3` and its split over characters.
//!
//! `V = sum_{a3 unit} (S(a3) - M)^2 = V1 + V2`, where `V1` collects the
//! order-two characters (Jacobi twists `(./q1)`) and `V2` every character
//! with `chi^2 != chi_0`.

use num_complex::Complex64;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd_u64, jacobi_unchecked, Modulus, Rational};
use crate::characters::CharacterGroup;
use crate::conv;
use crate::counting::{self, coprime_count, main_term_for, BoxCounter, CountMode, MainTerm};
use crate::exec::{pairwise_sum, Exec};
use crate::{Error, Result};

/// `V` from its definition, with every `S(a3)` exact.
///
/// The sum is accumulated as the exact integer `sum (phi S - K L)^2` and
/// divided by `phi^2` once; on 128-bit overflow it falls back to pairwise
/// floating-point summation.
pub fn variance_direct(modulus: &Modulus, alpha2: i64, n: u64, exec: Exec) -> Result<f64> {
    let counter = BoxCounter::new(modulus, alpha2, n, CountMode::CoprimeX3)?;
    let mt = main_term_for(&counter);
    let counts = counter.counts(&modulus.units(), exec)?;
    Ok(variance_from_counts(&counts, &mt))
}

fn variance_from_counts(counts: &[u64], mt: &MainTerm) -> f64 {
    let phi = mt.phi as i128;
    let kl = mt.k as i128 * mt.l as i128;
    let exact = counts.iter().try_fold(0i128, |acc, &s| {
        let d = (s as i128).checked_mul(phi)?.checked_sub(kl)?;
        acc.checked_add(d.checked_mul(d)?)
    });
    match exact {
        Some(total) => counting::rational_to_f64(&Rational::new(total, phi * phi)),
        None => {
            let m = mt.to_f64();
            let terms: Vec<f64> = counts.iter().map(|&s| (s as f64 - m).powi(2)).collect();
            pairwise_sum(&terms)
        }
    }
}

/// `L(q1)` for one divisor `q1 > 1` of `rad(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LTerm {
    pub q1: u64,
    pub q2: u64,
    pub value: i64,
}

fn check_q1(modulus: &Modulus, q1: u64) -> Result<u64> {
    let rad = modulus.radical();
    if q1 <= 1 || !rad.is_multiple_of(q1) {
        return Err(Error::NotDivisor {
            divisor: q1,
            value: rad,
        });
    }
    Ok(rad / q1)
}

/// `sum_{|x1|,|x2| <= N, (Q, q2) = 1} (Q / q1)` with `Q = x1^2 + a2 x2^2`
/// and `q1 q2 = rad(q)`.
pub fn l_sum(modulus: &Modulus, q1: u64, alpha2: i64, n: u64) -> Result<i64> {
    modulus.require_unit("alpha2", alpha2)?;
    check_q1(modulus, q1)?;
    let dist = radical_pair_distribution(modulus, alpha2, n);
    Ok(l_from_distribution(&dist, modulus.radical(), q1))
}

/// Every `L(q1)`, ordered by `q1`.
pub fn l_sums(modulus: &Modulus, alpha2: i64, n: u64) -> Result<Vec<LTerm>> {
    modulus.require_unit("alpha2", alpha2)?;
    let rad = modulus.radical();
    let dist = radical_pair_distribution(modulus, alpha2, n);
    let mut out: Vec<LTerm> = modulus
        .squarefree_divisors()
        .into_iter()
        .map(|(d, _)| d)
        .filter(|&d| d > 1)
        .map(|q1| LTerm {
            q1,
            q2: rad / q1,
            value: l_from_distribution(&dist, rad, q1),
        })
        .collect();
    out.sort_by_key(|t| t.q1);
    Ok(out)
}

fn radical_pair_distribution(modulus: &Modulus, alpha2: i64, n: u64) -> Vec<u64> {
    let rad = modulus.radical();
    let a2 = crate::arith::reduce(alpha2, rad);
    conv::quadratic_pair_distribution(rad, a2, n, None)
}

fn l_from_distribution(dist: &[u64], rad: u64, q1: u64) -> i64 {
    let q2 = rad / q1;
    dist.iter()
        .enumerate()
        .filter(|&(r, &c)| c > 0 && gcd_u64(r as u64, q2) == 1)
        .map(|(r, &c)| c as i64 * jacobi_unchecked(r as u64 % q1, q1) as i64)
        .sum()
}

/// `V1` and `V2` with the per-`q1` terms of `V1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSplit {
    pub v1: f64,
    pub v2: f64,
    pub l_terms: Vec<LTerm>,
    /// Number of characters contributing to `V2`.
    pub v2_characters: u64,
}

/// `V1 = (1/phi) sum_{q1} L(q1)^2 L3^2` and
/// `V2 = (1/phi) sum_{chi^2 != chi_0} |A_chi|^2 |B_chi|^2` with
/// `A_chi = sum chi(x1^2 + a2 x2^2)` and `B_chi = sum_{|x3| <= N} conj(chi)^2(x3)`.
pub fn variance_split(modulus: &Modulus, alpha2: i64, n: u64, exec: Exec) -> Result<VarianceSplit> {
    let counter = BoxCounter::new(modulus, alpha2, n, CountMode::CoprimeX3)?;
    let phi = modulus.phi();

    let l_terms = l_sums(modulus, alpha2, n)?;
    let l3 = coprime_count(modulus, n) as i128;
    let v1_num: i128 = l_terms.iter().map(|t| (t.value as i128).pow(2) * l3 * l3).sum();
    let v1 = counting::rational_to_f64(&Rational::new(v1_num, phi as i128));

    let group = CharacterGroup::new(modulus.clone());
    let pairs = counter.pair_distribution();
    let x3_squares = conv::square_histogram(modulus.q(), 1, n, None);
    let terms: Vec<Option<f64>> = exec.map_range(0..phi, |i| {
        let chi = group.character(i);
        if chi.order() <= 2 {
            return None;
        }
        let a: Complex64 = chi.dot(pairs);
        // conj(chi)^2(x) = conj(chi)(x^2); |B| is unchanged by conjugation
        let b: Complex64 = chi.dot(&x3_squares);
        Some(a.norm_sqr() * b.norm_sqr())
    });
    let v2_terms: Vec<f64> = terms.iter().flatten().copied().collect();
    let v2 = pairwise_sum(&v2_terms) / phi as f64;
    Ok(VarianceSplit {
        v1,
        v2,
        l_terms,
        v2_characters: v2_terms.len() as u64,
    })
}

/// Which `a3` to scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSample {
    All,
    /// `size` distinct units drawn uniformly with a seeded generator.
    Random {
        size: u64,
        seed: u64,
    },
}

impl AlphaSample {
    /// Selected units in increasing order.
    pub fn select(&self, modulus: &Modulus) -> Vec<u64> {
        let units = modulus.units();
        match *self {
            AlphaSample::All => units,
            AlphaSample::Random { size, seed } => {
                if size as usize >= units.len() {
                    return units;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut picked: Vec<u64> = index::sample(&mut rng, units.len(), size as usize)
                    .into_iter()
                    .map(|i| units[i])
                    .collect();
                picked.sort_unstable();
                picked
            }
        }
    }
}

/// Reference value for the relative error `S / M - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MainTermKind {
    #[default]
    Exact,
    Approx,
}

/// `a3` with `|S(a3)/M - 1| > delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalSet {
    pub delta: f64,
    pub main_term: f64,
    pub scanned: u64,
    pub exceptional: Vec<u64>,
    pub fraction: f64,
}

/// Relative deviation `|S/M - 1|`; when `M = 0` it is `0` for `S = 0` and
/// infinite otherwise.
pub fn relative_deviation(count: u64, m: f64) -> f64 {
    if m == 0.0 {
        if count == 0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (count as f64 / m - 1.0).abs()
    }
}

pub fn exceptional_fraction(
    modulus: &Modulus,
    alpha2: i64,
    n: u64,
    delta: f64,
    sample: AlphaSample,
    kind: MainTermKind,
    exec: Exec,
) -> Result<ExceptionalSet> {
    let counter = BoxCounter::new(modulus, alpha2, n, CountMode::CoprimeX3)?;
    let alphas = sample.select(modulus);
    let counts = counter.counts(&alphas, exec)?;
    let m = match kind {
        MainTermKind::Exact => main_term_for(&counter).to_f64(),
        MainTermKind::Approx => counting::main_term_approx(modulus, alpha2, n)?,
    };
    exceptional_from_counts(&alphas, &counts, m, delta)
}

/// Threshold a precomputed scan.
pub fn exceptional_from_counts(alphas: &[u64], counts: &[u64], m: f64, delta: f64) -> Result<ExceptionalSet> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let exceptional: Vec<u64> = alphas
        .iter()
        .zip(counts)
        .filter(|&(_, &s)| relative_deviation(s, m) > delta)
        .map(|(&a, _)| a)
        .collect();
    let scanned = alphas.len() as u64;
    Ok(ExceptionalSet {
        delta,
        main_term: m,
        scanned,
        fraction: if scanned == 0 {
            0.0
        } else {
            exceptional.len() as f64 / scanned as f64
        },
        exceptional,
    })
}

/// `|L(q1)|` against the two size targets for that term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LRatio {
    pub q1: u64,
    pub value: i64,
    /// `|L| / (N q1^2 q^eps)`
    pub ratio_trivial: f64,
    /// `|L| / (Delta^(1/2) N^2 q^-eps)`
    pub ratio_target: f64,
}

/// `V`, `V1`, `V2` against `Delta N^6 / q` with `Delta = q^-eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub q: u64,
    pub alpha2: u64,
    pub n: u64,
    pub epsilon: f64,
    pub v_direct: f64,
    pub v1: f64,
    pub v2: f64,
    pub delta_target: f64,
    pub target: f64,
    pub ratio_v: f64,
    pub ratio_v1: f64,
    pub ratio_v2: f64,
    pub l_ratios: Vec<LRatio>,
    pub exceptional: ExceptionalSet,
}

fn ratio(x: f64, target: f64) -> f64 {
    if target > 0.0 {
        x / target
    } else if x == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn variance_bound_report(
    modulus: &Modulus,
    alpha2: i64,
    n: u64,
    eps: f64,
    delta: f64,
    exec: Exec,
) -> Result<VarianceReport> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and >= 0, got {eps}"
        )));
    }
    let counter = BoxCounter::new(modulus, alpha2, n, CountMode::CoprimeX3)?;
    let mt = main_term_for(&counter);
    let units = modulus.units();
    let counts = counter.counts(&units, exec)?;
    let v_direct = variance_from_counts(&counts, &mt);
    let exceptional = exceptional_from_counts(&units, &counts, mt.to_f64(), delta)?;
    let split = variance_split(modulus, alpha2, n, exec)?;
    let q = modulus.q() as f64;
    let nf = n as f64;
    let delta_target = q.powf(-eps);
    let target = delta_target * nf.powi(6) / q;
    let l_ratios = split
        .l_terms
        .iter()
        .map(|t| {
            let abs = t.value.unsigned_abs() as f64;
            LRatio {
                q1: t.q1,
                value: t.value,
                ratio_trivial: ratio(abs, nf * (t.q1 as f64).powi(2) * q.powf(eps)),
                ratio_target: ratio(abs, delta_target.sqrt() * nf * nf * q.powf(-eps)),
            }
        })
        .collect();
    Ok(VarianceReport {
        q: modulus.q(),
        alpha2: modulus.reduce(alpha2),
        n,
        epsilon: eps,
        v_direct,
        v1: split.v1,
        v2: split.v2,
        delta_target,
        target,
        ratio_v: ratio(v_direct, target),
        ratio_v1: ratio(split.v1, target),
        ratio_v2: ratio(split.v2, target),
        l_ratios,
        exceptional,
    })
}
