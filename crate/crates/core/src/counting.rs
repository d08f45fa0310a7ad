//! Box counts for `x1^2 + a2 x2^2 + a3 x3^2 = 0 (mod q)`.
//!
//! The fast path never loops over triples. With
//! `D[r] = #{(x1, x2) : x1^2 + a2 x2^2 = r}` and
//! `H[t] = #{x3 : x3^2 = t}` the count is `sum_t H[t] D[-a3 t]`, so once `D`
//! is built every additional `a3` costs `O(min(q, N))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd_u64, jacobi_unchecked, mul_mod, Modulus, Rational};
use crate::conv;
use crate::exec::Exec;
use crate::{Error, Result};

/// Box radius limit for [`count_solutions_bruteforce`].
pub const BRUTE_FORCE_LIMIT: u64 = 300;
/// Largest modulus accepted by the histogram counters.
pub const MAX_COUNT_MODULUS: u64 = 10_000_000;
/// Largest height cap accepted by [`smallest_solution`].
pub const MAX_HEIGHT_CAP: u64 = 10_000;

/// Which solutions are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    /// `gcd(x3, q) = 1`
    #[default]
    CoprimeX3,
    /// `gcd(x1 x2 x3, q) = 1`
    CoprimeAll,
    /// `(x1, x2, x3) != (0, 0, 0)`
    Nontrivial,
}

impl CountMode {
    pub const ALL: [CountMode; 3] = [CountMode::CoprimeX3, CountMode::CoprimeAll, CountMode::Nontrivial];

    fn restricts_pair(self) -> bool {
        self == CountMode::CoprimeAll
    }

    fn restricts_x3(self) -> bool {
        self != CountMode::Nontrivial
    }

    /// Whether `|x_i| = a` is allowed in position `i` (0-based).
    fn admits(self, i: usize, a: u64, q: u64) -> bool {
        match self {
            CountMode::CoprimeX3 => i != 2 || gcd_u64(a, q) == 1,
            CountMode::CoprimeAll => gcd_u64(a, q) == 1,
            CountMode::Nontrivial => true,
        }
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMode::CoprimeX3 => "coprime-x3",
            CountMode::CoprimeAll => "coprime-all",
            CountMode::Nontrivial => "nontrivial",
        })
    }
}

impl FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coprime-x3" => Ok(CountMode::CoprimeX3),
            "coprime-all" => Ok(CountMode::CoprimeAll),
            "nontrivial" => Ok(CountMode::Nontrivial),
            other => Err(Error::InvalidParameter(format!("unknown counting mode '{other}'"))),
        }
    }
}

/// `a1 x1^2 + a2 x2^2 + a3 x3^2` modulo `q`, with all coefficients units.
///
/// The form is normalised to `a1 = 1` by dividing through by `a1`; this
/// leaves the solution set unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TernaryForm {
    modulus: Modulus,
    alpha: [u64; 3],
    alpha2: u64,
    alpha3: u64,
}

impl TernaryForm {
    pub fn new(modulus: Modulus, alpha1: i64, alpha2: i64, alpha3: i64) -> Result<Self> {
        modulus.require_unit("alpha1", alpha1)?;
        modulus.require_unit("alpha2", alpha2)?;
        modulus.require_unit("alpha3", alpha3)?;
        let q = modulus.q();
        let inv = modulus.inverse(alpha1).expect("alpha1 is a unit");
        let alpha = [modulus.reduce(alpha1), modulus.reduce(alpha2), modulus.reduce(alpha3)];
        Ok(TernaryForm {
            alpha2: mul_mod(alpha[1], inv, q),
            alpha3: mul_mod(alpha[2], inv, q),
            alpha,
            modulus,
        })
    }

    /// `x1^2 + a2 x2^2 + a3 x3^2`.
    pub fn diagonal(modulus: Modulus, alpha2: i64, alpha3: i64) -> Result<Self> {
        Self::new(modulus, 1, alpha2, alpha3)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn q(&self) -> u64 {
        self.modulus.q()
    }

    /// Coefficients as given, reduced modulo `q`.
    pub fn alpha(&self) -> [u64; 3] {
        self.alpha
    }

    /// Normalised `a2 / a1`.
    pub fn alpha2(&self) -> u64 {
        self.alpha2
    }

    /// Normalised `a3 / a1`.
    pub fn alpha3(&self) -> u64 {
        self.alpha3
    }

    pub fn is_solution(&self, x: [i64; 3]) -> bool {
        let q = self.q();
        let s = |v: i64| arith::reduce(v, q);
        let v = (mul_mod(s(x[0]), s(x[0]), q)
            + mul_mod(self.alpha2, mul_mod(s(x[1]), s(x[1]), q), q)
            + mul_mod(self.alpha3, mul_mod(s(x[2]), s(x[2]), q), q))
            % q;
        v == 0
    }
}

fn check_box(modulus: &Modulus, n: u64) -> Result<()> {
    if modulus.q() > MAX_COUNT_MODULUS {
        return Err(Error::OutOfRange {
            what: "modulus",
            value: modulus.q(),
            limit: MAX_COUNT_MODULUS,
        });
    }
    if n > modulus.q() {
        return Err(Error::OutOfRange {
            what: "box radius N (must be <= q)",
            value: n,
            limit: modulus.q(),
        });
    }
    Ok(())
}

/// Oracle count: loops over `(x1, x2)` and looks up the number of matching
/// `x3` in a residue table.
pub fn count_solutions_bruteforce(form: &TernaryForm, n: u64, mode: CountMode) -> Result<u64> {
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::OutOfRange {
            what: "brute-force box radius",
            value: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let q = form.q();
    let ni = n as i64;
    let mut x3_by_residue = vec![0u64; q as usize];
    for x3 in -ni..=ni {
        if mode.admits(2, x3.unsigned_abs(), q) {
            let s = mul_mod(form.alpha3, arith::reduce(x3 * x3, q), q);
            x3_by_residue[s as usize] += 1;
        }
    }
    let mut total = 0u64;
    for x1 in -ni..=ni {
        if !mode.admits(0, x1.unsigned_abs(), q) {
            continue;
        }
        for x2 in -ni..=ni {
            if !mode.admits(1, x2.unsigned_abs(), q) {
                continue;
            }
            let r = (arith::reduce(x1 * x1, q) + mul_mod(form.alpha2, arith::reduce(x2 * x2, q), q)) % q;
            total += x3_by_residue[((q - r) % q) as usize];
        }
    }
    if mode == CountMode::Nontrivial {
        total -= 1;
    }
    Ok(total)
}

/// Pair distribution for fixed `(q, a2, N)` reused across many `a3`.
#[derive(Debug, Clone)]
pub struct BoxCounter {
    modulus: Modulus,
    alpha2: u64,
    n: u64,
    mode: CountMode,
    pairs: Vec<u64>,
    x3_squares: Vec<(u64, u64)>,
}

impl BoxCounter {
    pub fn new(modulus: &Modulus, alpha2: i64, n: u64, mode: CountMode) -> Result<Self> {
        modulus.require_unit("alpha2", alpha2)?;
        check_box(modulus, n)?;
        let q = modulus.q();
        let a2 = modulus.reduce(alpha2);
        let pair_filter = mode.restricts_pair().then_some(q);
        let pairs = conv::quadratic_pair_distribution(q, a2, n, pair_filter);
        let x3_filter = mode.restricts_x3().then_some(q);
        let x3_squares = conv::square_histogram(q, 1, n, x3_filter)
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(t, c)| (t as u64, c))
            .collect();
        Ok(BoxCounter {
            modulus: modulus.clone(),
            alpha2: a2,
            n,
            mode,
            pairs,
            x3_squares,
        })
    }

    pub fn for_form(form: &TernaryForm, n: u64, mode: CountMode) -> Result<Self> {
        Self::new(form.modulus(), form.alpha2() as i64, n, mode)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha2(&self) -> u64 {
        self.alpha2
    }

    pub fn mode(&self) -> CountMode {
        self.mode
    }

    /// `D[r]` over residues `r` modulo `q`.
    pub fn pair_distribution(&self) -> &[u64] {
        &self.pairs
    }

    /// `S(a3)` for the normalised coefficient `a3`.
    pub fn count(&self, alpha3: i64) -> Result<u64> {
        self.modulus.require_unit("alpha3", alpha3)?;
        Ok(self.count_reduced(self.modulus.reduce(alpha3)))
    }

    fn count_reduced(&self, alpha3: u64) -> u64 {
        let q = self.modulus.q();
        let neg = q - alpha3;
        let total: u64 = self
            .x3_squares
            .iter()
            .map(|&(t, c)| c * self.pairs[mul_mod(neg, t, q) as usize])
            .sum();
        if self.mode == CountMode::Nontrivial {
            total - 1
        } else {
            total
        }
    }

    /// `S(a3)` for each unit in `alphas`, in order.
    pub fn counts(&self, alphas: &[u64], exec: Exec) -> Result<Vec<u64>> {
        if let Some(&bad) = alphas
            .iter()
            .find(|&&a| gcd_u64(a % self.modulus.q(), self.modulus.q()) != 1)
        {
            return Err(Error::NotCoprime {
                what: "alpha3",
                value: bad as i64,
                modulus: self.modulus.q(),
            });
        }
        Ok(exec.map(alphas, |&a| self.count_reduced(a % self.modulus.q())))
    }

    /// `K = #{(x1, x2) : gcd(x1^2 + a2 x2^2, q) = 1}`; only defined when the
    /// pair variables are unrestricted.
    pub fn k(&self) -> Option<u64> {
        (!self.mode.restricts_pair()).then(|| unit_mass(&self.modulus, &self.pairs))
    }
}

fn unit_mass(modulus: &Modulus, dist: &[u64]) -> u64 {
    let q = modulus.q();
    dist.iter()
        .enumerate()
        .filter(|&(r, _)| gcd_u64(r as u64, q) == 1)
        .map(|(_, &c)| c)
        .sum()
}

/// Fast count via residue histograms and one cyclic convolution.
pub fn count_solutions(form: &TernaryForm, n: u64, mode: CountMode) -> Result<u64> {
    let counter = BoxCounter::for_form(form, n, mode)?;
    Ok(counter.count_reduced(form.alpha3()))
}

/// `L = #{|x3| <= N : gcd(x3, q) = 1} = sum_{d | q} mu(d) (2 floor(N/d) + 1)`.
pub fn coprime_count(modulus: &Modulus, n: u64) -> u64 {
    let total: i64 = modulus
        .squarefree_divisors()
        .iter()
        .map(|&(d, mu)| mu as i64 * (2 * (n / d) as i64 + 1))
        .sum();
    total as u64
}

/// `M = K L / phi(q)` together with its factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainTerm {
    pub k: u64,
    pub l: u64,
    pub phi: u64,
    #[serde(with = "rational_serde")]
    pub value: Rational,
}

impl MainTerm {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.value)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

mod rational_serde {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        (r.numer().to_string(), r.denom().to_string()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let (n, m): (String, String) = Deserialize::deserialize(d)?;
        let n = n.parse().map_err(serde::de::Error::custom)?;
        let m = m.parse().map_err(serde::de::Error::custom)?;
        Ok(Rational::new(n, m))
    }
}

pub fn main_term_exact(modulus: &Modulus, alpha2: i64, n: u64) -> Result<MainTerm> {
    let counter = BoxCounter::new(modulus, alpha2, n, CountMode::CoprimeX3)?;
    Ok(main_term_for(&counter))
}

/// Main term from an existing coprime-x3 (or nontrivial) counter.
pub fn main_term_for(counter: &BoxCounter) -> MainTerm {
    let modulus = counter.modulus();
    let k = counter.k().expect("pair variables unrestricted");
    let l = coprime_count(modulus, counter.n());
    let phi = modulus.phi();
    MainTerm {
        k,
        l,
        phi,
        value: Rational::new(k as i128 * l as i128, phi as i128),
    }
}

/// `C_q = prod_{p | q} (1 - 1/p) (1 - (-a2/p)/p)`.
pub fn local_constant(modulus: &Modulus, alpha2: i64) -> Result<Rational> {
    modulus.require_unit("alpha2", alpha2)?;
    let mut c = Rational::from_integer(1);
    for p in modulus.primes() {
        let chi = jacobi_unchecked(arith::reduce(-alpha2, p), p) as i128;
        let p = p as i128;
        c *= Rational::new(p - 1, p) * Rational::new(p - chi, p);
    }
    Ok(c)
}

/// `C_q (2N)^3 / q`.
pub fn main_term_approx(modulus: &Modulus, alpha2: i64, n: u64) -> Result<f64> {
    let c = local_constant(modulus, alpha2)?;
    Ok(rational_to_f64(&c) * (2.0 * n as f64).powi(3) / modulus.q() as f64)
}

/// `q^(11/24 + eps)`, the lower end of the range where the asymptotic count
/// is proven for almost all `a3`.
pub fn proven_lower_radius(q: u64, eps: f64) -> f64 {
    (q as f64).powf(11.0 / 24.0 + eps)
}

/// One `(q, a2, a3, N)` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionStats {
    pub q: u64,
    pub alpha2: u64,
    pub alpha3: u64,
    pub n: u64,
    pub mode: CountMode,
    pub count: u64,
    pub main_term: MainTerm,
    pub error: f64,
}

pub fn solution_stats(form: &TernaryForm, n: u64, mode: CountMode) -> Result<SolutionStats> {
    let counter = BoxCounter::for_form(form, n, mode)?;
    let count = counter.count_reduced(form.alpha3());
    let main_term = main_term_exact(form.modulus(), form.alpha2() as i64, n)?;
    let error = signed_difference(count, &main_term.value);
    Ok(SolutionStats {
        q: form.q(),
        alpha2: form.alpha2(),
        alpha3: form.alpha3(),
        n,
        mode,
        count,
        main_term,
        error,
    })
}

/// `S - M` evaluated exactly, then rounded once.
pub fn signed_difference(count: u64, m: &Rational) -> f64 {
    rational_to_f64(&(Rational::from_integer(count as i128) - m))
}

/// `E(a3) = S(a3) - M` in the coprime-x3 mode.
pub fn error_term(form: &TernaryForm, n: u64) -> Result<f64> {
    Ok(solution_stats(form, n, CountMode::CoprimeX3)?.error)
}

/// A solution with minimal height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallSolution {
    pub x: [i64; 3],
    pub height: u64,
}

/// `ceil(q^(5/8 + 0.1))`, clamped to [`MAX_HEIGHT_CAP`].
pub fn default_height_cap(q: u64) -> u64 {
    ((q as f64).powf(0.725).ceil() as u64).clamp(1, MAX_HEIGHT_CAP)
}

/// Sorted `(a^2 mod q, a)` pairs for `0 <= a <= cap`.
struct SquareRoots {
    entries: Vec<(u64, u64)>,
}

impl SquareRoots {
    fn new(q: u64, cap: u64) -> Self {
        let mut entries: Vec<(u64, u64)> = (0..=cap).map(|a| (mul_mod(a % q, a % q, q), a)).collect();
        entries.sort_unstable();
        SquareRoots { entries }
    }

    /// Increasing `a` with `a^2 = t (mod q)`.
    fn roots(&self, t: u64) -> impl Iterator<Item = u64> + '_ {
        let lo = self.entries.partition_point(|&(r, _)| r < t);
        self.entries[lo..]
            .iter()
            .take_while(move |&&(r, _)| r == t)
            .map(|&(_, a)| a)
    }
}

/// Minimal-height admissible solution, searching shells `h = 1, 2, ...` up
/// to `height_cap` (default [`default_height_cap`]). Among solutions of
/// minimal height the one with lexicographically smallest
/// `(|x1|, |x2|, |x3|)` is returned, with non-negative signs.
pub fn smallest_solution(
    form: &TernaryForm,
    mode: CountMode,
    height_cap: Option<u64>,
) -> Result<Option<SmallSolution>> {
    let q = form.q();
    let cap = height_cap.unwrap_or_else(|| default_height_cap(q));
    if cap > MAX_HEIGHT_CAP {
        return Err(Error::OutOfRange {
            what: "height cap",
            value: cap,
            limit: MAX_HEIGHT_CAP,
        });
    }
    let roots = SquareRoots::new(q, cap);
    let inv2 = form.modulus().inverse(form.alpha2() as i64).expect("unit");
    let inv3 = form.modulus().inverse(form.alpha3() as i64).expect("unit");
    let (a2, a3) = (form.alpha2(), form.alpha3());
    let sq = |a: u64| mul_mod(a % q, a % q, q);
    let neg = |v: u64| (q - v % q) % q;
    // smallest admissible root of t in position i not exceeding `bound`
    let first_root = |t: u64, i: usize, bound: u64| {
        roots
            .roots(t)
            .take_while(|&a| a <= bound)
            .find(|&a| mode.admits(i, a, q))
    };
    for h in 1..=cap {
        let h_sq = sq(h);
        for a1 in (0..=h).filter(|&a| mode.admits(0, a, q)) {
            let s1 = sq(a1);
            let found = if a1 < h {
                let with_x3_on_shell = if mode.admits(2, h, q) {
                    let t = mul_mod(neg(s1 + mul_mod(a3, h_sq, q)), inv2, q);
                    first_root(t, 1, h - 1).map(|a2v| [a1, a2v, h])
                } else {
                    None
                };
                with_x3_on_shell.or_else(|| {
                    if !mode.admits(1, h, q) {
                        return None;
                    }
                    let t = mul_mod(neg(s1 + mul_mod(a2, h_sq, q)), inv3, q);
                    first_root(t, 2, h).map(|a3v| [a1, h, a3v])
                })
            } else {
                (0..=h).filter(|&b| mode.admits(1, b, q)).find_map(|b| {
                    let t = mul_mod(neg(s1 + mul_mod(a2, sq(b), q)), inv3, q);
                    first_root(t, 2, h).map(|a3v| [a1, b, a3v])
                })
            };
            if let Some([x1, x2, x3]) = found {
                return Ok(Some(SmallSolution {
                    x: [x1 as i64, x2 as i64, x3 as i64],
                    height: h,
                }));
            }
        }
    }
    Ok(None)
}
