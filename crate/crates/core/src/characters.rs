//! Dirichlet characters modulo an odd integer.
//!
//! Every unit group `(Z/p^e)^*` with `p` odd is cyclic, so a character is an
//! exponent vector against one fixed generator per prime-power factor and is
//! evaluated through discrete-log tables. Values are kept as exact rational
//! angles ([`UnitRoot`]) and only turned into floating point when summed.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Mul;
use std::sync::OnceLock;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd_u64, mul_mod, pow_mod, Modulus};
use crate::conv;
use crate::{Error, Result};

/// Default `epsilon` in the bound comparators.
pub const DEFAULT_EPSILON: f64 = 0.05;

const NO_LOG: u32 = u32::MAX;
const ROOT_TABLE_LIMIT: u64 = 1 << 21;

/// `e(k/m) = exp(2 pi i k/m)` stored as a reduced angle, or zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnitRoot {
    k: u64,
    m: u64,
    zero: bool,
}

impl UnitRoot {
    pub const ZERO: UnitRoot = UnitRoot { k: 0, m: 1, zero: true };
    pub const ONE: UnitRoot = UnitRoot {
        k: 0,
        m: 1,
        zero: false,
    };

    /// `e(k/m)`; the angle is reduced into `[0, 1)` and to lowest terms.
    pub fn new(k: i64, m: u64) -> Self {
        assert!(m > 0, "angle denominator must be positive");
        let k = arith::reduce(k, m);
        Self::reduced(k, m)
    }

    fn reduced(k: u64, m: u64) -> Self {
        let g = gcd_u64(k, m);
        UnitRoot {
            k: k / g,
            m: m / g,
            zero: false,
        }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.zero
    }

    #[inline]
    pub fn is_one(self) -> bool {
        !self.zero && self.k == 0
    }

    /// `(k, m)` with value `e(k/m)`, or `None` for zero.
    pub fn angle(self) -> Option<(u64, u64)> {
        (!self.zero).then_some((self.k, self.m))
    }

    /// Multiplicative order; `None` for zero.
    pub fn order(self) -> Option<u64> {
        (!self.zero).then_some(self.m)
    }

    pub fn conj(self) -> Self {
        if self.zero || self.k == 0 {
            return self;
        }
        UnitRoot {
            k: self.m - self.k,
            ..self
        }
    }

    pub fn pow(self, e: u64) -> Self {
        if self.zero {
            return if e == 0 { Self::ONE } else { self };
        }
        Self::reduced(mul_mod(self.k, e, self.m), self.m)
    }

    pub fn to_complex(self) -> Complex64 {
        if self.zero {
            return Complex64::new(0.0, 0.0);
        }
        unit_angle(self.k, self.m)
    }
}

impl Mul for UnitRoot {
    type Output = UnitRoot;

    fn mul(self, rhs: UnitRoot) -> UnitRoot {
        if self.zero || rhs.zero {
            return UnitRoot::ZERO;
        }
        let l = self.m.lcm(&rhs.m);
        let k = (self.k as u128 * (l / self.m) as u128 + rhs.k as u128 * (l / rhs.m) as u128) % l as u128;
        UnitRoot::reduced(k as u64, l)
    }
}

impl fmt::Debug for UnitRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            write!(f, "0")
        } else {
            write!(f, "e({}/{})", self.k, self.m)
        }
    }
}

/// `e(k/m)` in double precision.
#[inline]
pub fn unit_angle(k: u64, m: u64) -> Complex64 {
    let (s, c) = (TAU * (k % m) as f64 / m as f64).sin_cos();
    Complex64::new(c, s)
}

#[derive(Debug, Clone)]
struct UnitComponent {
    prime: u64,
    power: u32,
    modulus: u64,
    generator: u64,
    order: u64,
    log: Vec<u32>,
}

impl UnitComponent {
    fn new(prime: u64, power: u32) -> Self {
        let modulus = prime.pow(power);
        let order = modulus / prime * (prime - 1);
        let generator = smallest_primitive_root(prime, modulus, order);
        let mut log = vec![NO_LOG; modulus as usize];
        let mut x = 1u64;
        for i in 0..order {
            log[x as usize] = i as u32;
            x = mul_mod(x, generator, modulus);
        }
        UnitComponent {
            prime,
            power,
            modulus,
            generator,
            order,
            log,
        }
    }

    #[inline]
    fn log_of(&self, n: u64) -> Option<u64> {
        let l = self.log[(n % self.modulus) as usize];
        (l != NO_LOG).then_some(l as u64)
    }
}

fn smallest_primitive_root(prime: u64, modulus: u64, order: u64) -> u64 {
    let order_primes: Vec<u64> = arith::factorize(order)
        .expect("order is positive")
        .into_iter()
        .map(|(l, _)| l)
        .collect();
    (2..modulus)
        .chain(std::iter::once(1))
        .find(|&g| g % prime != 0 && order_primes.iter().all(|&l| pow_mod(g, order / l, modulus) != 1))
        .expect("unit group modulo an odd prime power is cyclic")
}

/// The full character group modulo odd `q`.
#[derive(Debug)]
pub struct CharacterGroup {
    modulus: Modulus,
    components: Vec<UnitComponent>,
    exponent: u64,
    roots: OnceLock<Vec<Complex64>>,
}

impl CharacterGroup {
    pub fn new(modulus: Modulus) -> Self {
        let components: Vec<UnitComponent> = modulus
            .factors()
            .iter()
            .map(|&(p, e)| UnitComponent::new(p, e))
            .collect();
        let exponent = components.iter().fold(1u64, |acc, c| acc.lcm(&c.order));
        CharacterGroup {
            modulus,
            components,
            exponent,
            roots: OnceLock::new(),
        }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn q(&self) -> u64 {
        self.modulus.q()
    }

    /// Number of characters, `phi(q)`.
    pub fn size(&self) -> u64 {
        self.modulus.phi()
    }

    /// Least common multiple of the component orders; every value is an
    /// `exponent`-th root of unity.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// `(p^e, generator)` per prime-power factor.
    pub fn generators(&self) -> Vec<(u64, u64)> {
        self.components.iter().map(|c| (c.modulus, c.generator)).collect()
    }

    pub fn component_orders(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.order).collect()
    }

    /// Per-component discrete logarithms of `n`, or `None` if `n` is not a
    /// unit.
    pub fn discrete_log(&self, n: i64) -> Option<Vec<u64>> {
        let n = self.modulus.reduce(n);
        self.components.iter().map(|c| c.log_of(n)).collect()
    }

    pub fn principal(&self) -> DirichletCharacter<'_> {
        DirichletCharacter {
            group: self,
            exponents: vec![0; self.components.len()],
        }
    }

    pub fn from_exponents(&self, exponents: Vec<u64>) -> Result<DirichletCharacter<'_>> {
        if exponents.len() != self.components.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} exponents, got {}",
                self.components.len(),
                exponents.len()
            )));
        }
        let exponents = exponents
            .iter()
            .zip(&self.components)
            .map(|(&a, c)| a % c.order)
            .collect();
        Ok(DirichletCharacter { group: self, exponents })
    }

    /// The character with mixed-radix index `index` (first component least
    /// significant). Index 0 is principal.
    pub fn character(&self, index: u64) -> DirichletCharacter<'_> {
        let mut rest = index % self.size();
        let exponents = self
            .components
            .iter()
            .map(|c| {
                let a = rest % c.order;
                rest /= c.order;
                a
            })
            .collect();
        DirichletCharacter { group: self, exponents }
    }

    pub fn characters(&self) -> impl Iterator<Item = DirichletCharacter<'_>> + '_ {
        (0..self.size()).map(move |i| self.character(i))
    }

    /// `e(t / exponent)` from a lazily built table.
    #[inline]
    pub fn root(&self, t: u64) -> Complex64 {
        if self.exponent <= ROOT_TABLE_LIMIT {
            let table = self
                .roots
                .get_or_init(|| (0..self.exponent).map(|t| unit_angle(t, self.exponent)).collect());
            table[(t % self.exponent) as usize]
        } else {
            unit_angle(t, self.exponent)
        }
    }

    /// All characters with `chi^2 = chi_0`, `chi != chi_0`, ordered by the
    /// Jacobi modulus `q1`.
    pub fn order_two_characters(&self) -> Vec<OrderTwoCharacter<'_>> {
        let w = self.components.len();
        let radical = self.modulus.radical();
        let mut out: Vec<OrderTwoCharacter<'_>> = (1u64..(1 << w))
            .map(|mask| {
                let mut q1 = 1;
                let exponents = self
                    .components
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        if mask >> j & 1 == 1 {
                            q1 *= c.prime;
                            c.order / 2
                        } else {
                            0
                        }
                    })
                    .collect();
                OrderTwoCharacter {
                    q1,
                    q2: radical / q1,
                    character: DirichletCharacter { group: self, exponents },
                }
            })
            .collect();
        out.sort_by_key(|c| c.q1);
        out
    }
}

/// A character `chi(n) = (n / q1) * [gcd(n, q2) = 1]` with `q1 q2 = rad(q)`.
#[derive(Debug, Clone)]
pub struct OrderTwoCharacter<'g> {
    pub q1: u64,
    pub q2: u64,
    pub character: DirichletCharacter<'g>,
}

#[derive(Clone)]
pub struct DirichletCharacter<'g> {
    group: &'g CharacterGroup,
    exponents: Vec<u64>,
}

impl fmt::Debug for DirichletCharacter<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi[mod {}; {:?}]", self.group.q(), self.exponents)
    }
}

impl PartialEq for DirichletCharacter<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.group, other.group) && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter<'_> {}

impl<'g> DirichletCharacter<'g> {
    pub fn group(&self) -> &'g CharacterGroup {
        self.group
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&a| a == 0)
    }

    /// Inverse of [`CharacterGroup::character`].
    pub fn index(&self) -> u64 {
        self.exponents
            .iter()
            .zip(&self.group.components)
            .rev()
            .fold(0, |acc, (&a, c)| acc * c.order + a)
    }

    pub fn order(&self) -> u64 {
        self.exponents
            .iter()
            .zip(&self.group.components)
            .fold(1u64, |acc, (&a, c)| acc.lcm(&(c.order / gcd_u64(a, c.order))))
    }

    /// `t` such that `chi(n) = e(t / exponent)`, or `None` off the units.
    #[inline]
    pub fn angle_index(&self, n: i64) -> Option<u64> {
        self.angle_index_reduced(self.group.modulus.reduce(n))
    }

    #[inline]
    fn angle_index_reduced(&self, n: u64) -> Option<u64> {
        let d = self.group.exponent as u128;
        let mut t: u128 = 0;
        for (&a, c) in self.exponents.iter().zip(&self.group.components) {
            let l = c.log_of(n)?;
            t += a as u128 * l as u128 * (self.group.exponent / c.order) as u128;
        }
        Some((t % d) as u64)
    }

    pub fn evaluate(&self, n: i64) -> UnitRoot {
        match self.angle_index(n) {
            Some(t) => UnitRoot::new(t as i64, self.group.exponent),
            None => UnitRoot::ZERO,
        }
    }

    /// `chi(n)` as a complex number.
    #[inline]
    pub fn value(&self, n: i64) -> Complex64 {
        match self.angle_index(n) {
            Some(t) => self.group.root(t),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `chi(r)` for every residue `0 <= r < q`.
    pub fn values(&self) -> Vec<Complex64> {
        (0..self.group.q())
            .map(|r| match self.angle_index_reduced(r) {
                Some(t) => self.group.root(t),
                None => Complex64::new(0.0, 0.0),
            })
            .collect()
    }

    /// Angle indices for every residue, `None` off the units.
    pub fn index_table(&self) -> Vec<Option<u64>> {
        (0..self.group.q()).map(|r| self.angle_index_reduced(r)).collect()
    }

    pub fn conj(&self) -> Self {
        self.pow_signed(-1)
    }

    pub fn pow(&self, k: u64) -> Self {
        self.pow_signed(k as i64)
    }

    fn pow_signed(&self, k: i64) -> Self {
        let exponents = self
            .exponents
            .iter()
            .zip(&self.group.components)
            .map(|(&a, c)| (a as i128 * k as i128).rem_euclid(c.order as i128) as u64)
            .collect();
        DirichletCharacter {
            group: self.group,
            exponents,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let exponents = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .zip(&self.group.components)
            .map(|((&a, &b), c)| (a + b) % c.order)
            .collect();
        DirichletCharacter {
            group: self.group,
            exponents,
        }
    }

    /// Conductor `q1` and the primitive character inducing `chi`.
    pub fn conductor(&self) -> Conductor {
        let mut parts = Vec::new();
        for (&a, c) in self.exponents.iter().zip(&self.group.components) {
            if a == 0 {
                continue;
            }
            // chi_p is trivial on 1 + p^f Z exactly when p^(e - f) | a
            let mut v = 0;
            let mut rest = a;
            while rest % c.prime == 0 {
                rest /= c.prime;
                v += 1;
            }
            parts.push((c, a, c.power - v));
        }
        let q1: u64 = parts.iter().map(|(c, _, f)| c.prime.pow(*f)).product();
        let q = self.group.q();
        let primitive = (q1 > 1).then(|| {
            let group = CharacterGroup::new(Modulus::new(q1).expect("odd divisor of q"));
            let exponents = group
                .components
                .iter()
                .zip(&parts)
                .map(|(small, (big, a, f))| {
                    debug_assert_eq!(small.prime, big.prime);
                    let shrink = big.prime.pow(big.power - f);
                    let log = big.log_of(small.generator).expect("generator is a unit");
                    ((*a as u128 * log as u128 / shrink as u128) % small.order as u128) as u64
                })
                .collect();
            PrimitiveCharacter { group, exponents }
        });
        Conductor {
            conductor: q1,
            cofactor: q / q1,
            primitive,
        }
    }

    /// `sum_{m < n <= m + len} chi(n)`.
    pub fn sum_interval(&self, m: u64, len: u64) -> Complex64 {
        let q = self.group.q();
        let periods = len / q;
        let mut acc = if periods > 0 && self.is_principal() {
            Complex64::new((periods * self.group.size()) as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let start = (m + periods * q) % q;
        let mut r = (start + 1) % q;
        for _ in 0..len % q {
            if let Some(t) = self.angle_index_reduced(r) {
                acc += self.group.root(t);
            }
            r += 1;
            if r == q {
                r = 0;
            }
        }
        acc
    }

    /// `sum_{|x1|,|x2| <= n} chi(x1^2 + alpha2 x2^2)`.
    pub fn sum_quadratic_box(&self, alpha2: i64, n: u64) -> Result<Complex64> {
        let modulus = &self.group.modulus;
        modulus.require_unit("alpha2", alpha2)?;
        let dist = conv::quadratic_pair_distribution(modulus.q(), modulus.reduce(alpha2), n, None);
        Ok(self.dot(&dist))
    }

    /// `sum_r weights[r] chi(r)` over residues.
    pub fn dot(&self, weights: &[u64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, &w) in weights.iter().enumerate() {
            if w != 0 {
                if let Some(t) = self.angle_index_reduced(r as u64) {
                    acc += self.group.root(t) * w as f64;
                }
            }
        }
        acc
    }
}

/// A primitive character owning its (smaller) character group.
#[derive(Debug)]
pub struct PrimitiveCharacter {
    group: CharacterGroup,
    exponents: Vec<u64>,
}

impl PrimitiveCharacter {
    pub fn character(&self) -> DirichletCharacter<'_> {
        DirichletCharacter {
            group: &self.group,
            exponents: self.exponents.clone(),
        }
    }
}

/// `chi = chi1 * chi2` with `chi1` primitive modulo `conductor` and `chi2`
/// principal modulo `cofactor = q / conductor`.
#[derive(Debug)]
pub struct Conductor {
    pub conductor: u64,
    pub cofactor: u64,
    /// `None` when the conductor is 1 (principal `chi`).
    pub primitive: Option<PrimitiveCharacter>,
}

impl Conductor {
    /// `chi1(n)`; the trivial character modulo 1 is identically 1.
    pub fn evaluate_primitive(&self, n: i64) -> UnitRoot {
        match &self.primitive {
            Some(p) => p.character().evaluate(n),
            None => UnitRoot::ONE,
        }
    }
}

pub fn build_character_group(q: &Modulus) -> CharacterGroup {
    CharacterGroup::new(q.clone())
}

pub fn evaluate(chi: &DirichletCharacter<'_>, n: i64) -> UnitRoot {
    chi.evaluate(n)
}

pub fn conductor(chi: &DirichletCharacter<'_>) -> Conductor {
    chi.conductor()
}

pub fn char_sum_interval(chi: &DirichletCharacter<'_>, m: u64, n: u64) -> Complex64 {
    chi.sum_interval(m, n)
}

pub fn char_sum_quadratic_box(chi: &DirichletCharacter<'_>, alpha2: i64, n: u64) -> Result<Complex64> {
    chi.sum_quadratic_box(alpha2, n)
}

/// Empirical size of a character sum against a bound shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRatio {
    pub empirical: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// `N^(1 - 1/r) q^((r + 1)/(4 r^2) + eps)`.
pub fn burgess_bound(n: u64, q: u64, r: u32, eps: f64) -> f64 {
    let r = r as f64;
    (n as f64).powf(1.0 - 1.0 / r) * (q as f64).powf((r + 1.0) / (4.0 * r * r) + eps)
}

/// `N^(1/2) q^eps`, the comparator available under Lindelöf.
pub fn lindelof_bound(n: u64, q: u64, eps: f64) -> f64 {
    (n as f64).sqrt() * (q as f64).powf(eps)
}

/// `sqrt(q) ln q`.
pub fn polya_vinogradov_bound(q: u64) -> f64 {
    (q as f64).sqrt() * (q as f64).ln()
}

/// `max_{1 <= N <= q} |sum_{n <= N} chi(n)|`.
pub fn polya_vinogradov_max(chi: &DirichletCharacter<'_>) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut best = 0.0f64;
    for n in 1..=chi.group.q() {
        if let Some(t) = chi.angle_index_reduced(n % chi.group.q()) {
            acc += chi.group.root(t);
        }
        best = best.max(acc.norm());
    }
    best
}

pub fn burgess_ratio(chi: &DirichletCharacter<'_>, m: u64, n: u64, r: u32, eps: f64) -> Result<BoundRatio> {
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    if !(2..=3).contains(&r) {
        return Err(Error::InvalidParameter(format!("Burgess r must be 2 or 3, got {r}")));
    }
    if n == 0 {
        return Err(Error::Zero);
    }
    let empirical = chi.sum_interval(m, n).norm();
    let bound = burgess_bound(n, chi.group.q(), r, eps);
    Ok(BoundRatio {
        empirical,
        bound,
        ratio: empirical / bound,
    })
}

/// Integral binary form `a x^2 + b x y + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BinaryForm {
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (x, y) = (x as i128, y as i128);
        self.a as i128 * x * x + self.b as i128 * x * y + self.c as i128 * y * y
    }
}

/// Integer points of the closed disc of radius `r` around `center`, in
/// lexicographic order.
pub fn disc_points(center: (f64, f64), r: f64) -> impl Iterator<Item = (i64, i64)> {
    let (x0, y0) = center;
    let r2 = r * r;
    let xs = (x0 - r).ceil() as i64..=(x0 + r).floor() as i64;
    xs.flat_map(move |x| {
        let dx = x as f64 - x0;
        let rest = r2 - dx * dx;
        let h = if rest >= 0.0 { rest.sqrt() } else { -1.0 };
        let lo = (y0 - h).ceil() as i64;
        let hi = (y0 + h).floor() as i64;
        (lo..=hi)
            .filter(move |&y| {
                let dy = y as f64 - y0;
                dx * dx + dy * dy <= r2
            })
            .map(move |y| (x, y))
    })
}

/// Which of the two binary-form bounds covers a radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HbRegime {
    /// `q1^(1/4 + 1/(2r)) <= R <= q1^(5/12 + 1/(2r))`
    SmallR,
    /// `R > q1^(7/12)`
    LargeR,
    Uncovered,
}

impl fmt::Display for HbRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HbRegime::SmallR => "small_r",
            HbRegime::LargeR => "large_r",
            HbRegime::Uncovered => "uncovered",
        })
    }
}

pub fn hb_regime(radius: f64, q1: u64, r: u32) -> HbRegime {
    let q1 = q1 as f64;
    let r = r as f64;
    if radius > q1.powf(7.0 / 12.0) {
        HbRegime::LargeR
    } else if q1.powf(0.25 + 0.5 / r) <= radius && radius <= q1.powf(5.0 / 12.0 + 0.5 / r) {
        HbRegime::SmallR
    } else {
        HbRegime::Uncovered
    }
}

/// `R^(2 - 1/r) q1^((r + 2)/(4 r^2)) q0^eps`.
pub fn hb_bound_small_r(radius: f64, q1: u64, q0: u64, r: u32, eps: f64) -> f64 {
    let r = r as f64;
    radius.powf(2.0 - 1.0 / r) * (q1 as f64).powf((r + 2.0) / (4.0 * r * r)) * (q0 as f64).powf(eps)
}

/// `(R^(5/3) q1^(5/36) + R^2 q1^(-1/18)) q0^eps`.
pub fn hb_bound_large_r(radius: f64, q1: u64, q0: u64, eps: f64) -> f64 {
    let q1 = q1 as f64;
    (radius.powf(5.0 / 3.0) * q1.powf(5.0 / 36.0) + radius * radius * q1.powf(-1.0 / 18.0)) * (q0 as f64).powf(eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbAudit {
    pub empirical: f64,
    pub conductor: u64,
    pub regime: HbRegime,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub points: u64,
}

/// Character sum of a binary form over a disc, compared with the bound for
/// whichever radius range applies.
pub fn hb_ratio(
    chi: &DirichletCharacter<'_>,
    form: BinaryForm,
    center: (f64, f64),
    radius: f64,
    r: u32,
    eps: f64,
) -> Result<HbAudit> {
    let modulus = chi.group.modulus();
    if !modulus.is_squarefree() {
        return Err(Error::NotSquarefree { value: modulus.q() });
    }
    modulus.require_unit("discriminant", form.discriminant())?;
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    if r < 3 {
        return Err(Error::InvalidParameter(format!("r must be at least 3, got {r}")));
    }
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::InvalidParameter(format!("invalid radius {radius}")));
    }
    let q = modulus.q();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut points = 0u64;
    for (x, y) in disc_points(center, radius) {
        let v = form.eval(x, y).rem_euclid(q as i128) as u64;
        if let Some(t) = chi.angle_index_reduced(v) {
            acc += chi.group.root(t);
        }
        points += 1;
    }
    let q1 = chi.conductor().conductor;
    let regime = hb_regime(radius, q1, r);
    let bound = match regime {
        HbRegime::SmallR => Some(hb_bound_small_r(radius, q1, q, r, eps)),
        HbRegime::LargeR => Some(hb_bound_large_r(radius, q1, q, eps)),
        HbRegime::Uncovered => None,
    };
    let empirical = acc.norm();
    Ok(HbAudit {
        empirical,
        conductor: q1,
        regime,
        bound,
        ratio: bound.map(|b| empirical / b),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::jacobi_symbol;

    fn group(q: u64) -> CharacterGroup {
        CharacterGroup::new(Modulus::new(q).unwrap())
    }

    fn odd_moduli(max: u64) -> impl Iterator<Item = u64> {
        (3..=max).step_by(2)
    }

    /// The character mod `p^k` (inside `g`) that agrees with the Legendre
    /// symbol mod `p` on units.
    fn legendre_in<'g>(g: &'g CharacterGroup, p: u64) -> DirichletCharacter<'g> {
        g.order_two_characters()
            .into_iter()
            .find(|c| c.q1 == p)
            .unwrap()
            .character
    }

    #[test]
    fn group_sizes() {
        assert_eq!(group(9).characters().count(), 6);
        assert_eq!(group(15).characters().count(), 8);
        assert_eq!(group(3).characters().count(), 2);
        assert!(Modulus::new(4).is_err());
    }

    #[test]
    fn generators_are_primitive_roots() {
        for q in odd_moduli(225) {
            let g = group(q);
            for c in &g.components {
                let mut seen = vec![false; c.modulus as usize];
                let mut x = 1;
                for _ in 0..c.order {
                    assert!(!seen[x as usize]);
                    seen[x as usize] = true;
                    x = mul_mod(x, c.generator, c.modulus);
                }
                assert_eq!(x, 1);
                let units = (0..c.modulus).filter(|&r| r % c.prime != 0).count() as u64;
                assert_eq!(units, c.order);
            }
            assert_eq!(g.component_orders().iter().product::<u64>(), g.size());
        }
        assert_eq!(group(7).generators(), vec![(7, 3)]);
        assert_eq!(group(9).generators(), vec![(9, 2)]);
    }

    #[test]
    fn evaluate_examples() {
        let g = group(15);
        assert!(g.principal().evaluate(7).is_one());
        for chi in g.characters() {
            assert!(chi.evaluate(5).is_zero());
        }
        let g5 = group(5);
        let leg = legendre_in(&g5, 5);
        assert_eq!(leg.evaluate(2), UnitRoot::new(1, 2));
        assert!((leg.value(2) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn characters_are_multiplicative_and_periodic() {
        for q in [9u64, 15, 21, 25, 45, 63] {
            let g = group(q);
            let q = q as i64;
            for chi in g.characters() {
                for n in 0..q {
                    assert_eq!(chi.evaluate(n), chi.evaluate(n + q));
                    assert_eq!(chi.evaluate(n).is_zero(), !g.modulus().is_unit(n));
                    for m in 0..q {
                        assert_eq!(chi.evaluate(n * m), chi.evaluate(n) * chi.evaluate(m));
                    }
                    if let Some(ord) = chi.evaluate(n).order() {
                        assert_eq!(chi.order() % ord, 0);
                    }
                }
                assert_eq!(chi.index(), g.character(chi.index()).index());
            }
        }
    }

    /// Exact zero-sum certificate: the multiset of values is uniform over
    /// the d-th roots of unity for some d > 1.
    fn uniform_on_roots(values: &[UnitRoot]) -> bool {
        if values.iter().any(|v| v.is_zero()) {
            return values.iter().all(|v| v.is_zero());
        }
        let d = values.iter().fold(1u64, |acc, v| acc.lcm(&v.order().unwrap()));
        if d == 1 {
            return false;
        }
        let mut counts = vec![0usize; d as usize];
        for v in values {
            let (k, m) = v.angle().unwrap();
            counts[(k * (d / m)) as usize] += 1;
        }
        counts.iter().all(|&c| c == counts[0])
    }

    #[test]
    fn orthogonality_exact() {
        for q in odd_moduli(45) {
            let g = group(q);
            let chars: Vec<_> = g.characters().collect();
            for a in 0..q as i64 {
                for b in 0..q as i64 {
                    let vals: Vec<UnitRoot> = chars
                        .iter()
                        .map(|chi| chi.evaluate(a) * chi.evaluate(b).conj())
                        .collect();
                    let units = g.modulus().is_unit(a * b);
                    if units && a == b {
                        assert!(vals.iter().all(|v| v.is_one()));
                        assert_eq!(vals.len() as u64, g.size());
                    } else {
                        assert!(uniform_on_roots(&vals), "q={q} a={a} b={b}");
                    }
                }
            }
        }
    }

    #[test]
    fn full_period_sums_vanish() {
        for q in odd_moduli(225) {
            let g = group(q);
            for chi in g.characters() {
                let s = chi.sum_interval(0, q);
                if chi.is_principal() {
                    assert!((s.re - g.size() as f64).abs() < 1e-9);
                } else {
                    assert!(s.norm() < 1e-9, "q={q} {chi:?} {s}");
                }
            }
        }
    }

    #[test]
    fn interval_sum_examples() {
        let g = group(5);
        let leg = legendre_in(&g, 5);
        assert!((leg.sum_interval(0, 3) - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((leg.sum_interval(0, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // wraps across periods and offsets
        let direct: Complex64 = (8..=8 + 12).map(|n| leg.value(n)).sum();
        assert!((leg.sum_interval(7, 13) - direct).norm() < 1e-12);
        assert!(leg.sum_interval(3, 40).norm() <= 40.0);
    }

    #[test]
    fn order_two_matches_brute_force() {
        for q in odd_moduli(225) {
            let g = group(q);
            let mut brute: Vec<Vec<u64>> = g
                .characters()
                .filter(|c| c.order() == 2)
                .map(|c| c.exponents().to_vec())
                .collect();
            let found = g.order_two_characters();
            assert_eq!(found.len(), (1usize << g.modulus().omega()) - 1);
            let mut got: Vec<Vec<u64>> = found.iter().map(|c| c.character.exponents().to_vec()).collect();
            brute.sort();
            got.sort();
            assert_eq!(brute, got, "q={q}");
            for c in &found {
                assert_eq!(c.q1 * c.q2, g.modulus().radical());
                for n in 0..q as i64 {
                    let expected = if arith::gcd_u64(arith::reduce(n, c.q2), c.q2) == 1 {
                        jacobi_symbol(n, c.q1).unwrap()
                    } else {
                        0
                    };
                    let v = c.character.value(n);
                    assert!((v.re - expected as f64).abs() < 1e-12 && v.im.abs() < 1e-12);
                }
            }
        }
        let counts: Vec<usize> = [15u64, 9, 105]
            .iter()
            .map(|&q| group(q).order_two_characters().len())
            .collect();
        assert_eq!(counts, vec![3, 1, 7]);
        let q1s: Vec<u64> = group(15).order_two_characters().iter().map(|c| c.q1).collect();
        assert_eq!(q1s, vec![3, 5, 15]);
    }

    fn induced_by_divisor(chi: &DirichletCharacter<'_>, d: u64) -> bool {
        // chi is induced mod d iff chi(n) = 1 for every unit n = 1 mod d
        let q = chi.group.q();
        (1..q)
            .filter(|&n| n % d == 1 % d && chi.group.modulus.is_unit(n as i64))
            .all(|n| chi.evaluate(n as i64).is_one())
    }

    #[test]
    fn conductor_is_minimal_inducing_modulus() {
        for q in odd_moduli(225) {
            let g = group(q);
            let divisors = g.modulus().divisors();
            for chi in g.characters() {
                let c = chi.conductor();
                let brute = *divisors.iter().find(|&&d| induced_by_divisor(&chi, d)).unwrap();
                assert_eq!(c.conductor, brute, "q={q} {chi:?}");
                assert_eq!(c.conductor * c.cofactor, q);
                for n in (1..q as i64).filter(|&n| g.modulus().is_unit(n)) {
                    assert_eq!(chi.evaluate(n), c.evaluate_primitive(n));
                }
                if let Some(p) = &c.primitive {
                    // primitive: its own conductor is its modulus
                    assert_eq!(p.character().conductor().conductor, c.conductor);
                }
            }
        }
    }

    #[test]
    fn conductor_examples() {
        let g9 = group(9);
        assert_eq!(g9.principal().conductor().conductor, 1);
        assert_eq!(legendre_in(&g9, 3).conductor().conductor, 3);
        let g7 = group(7);
        assert_eq!(legendre_in(&g7, 7).conductor().conductor, 7);
    }

    #[test]
    fn quadratic_box_examples() {
        let g = group(3);
        let leg = legendre_in(&g, 3);
        assert!(leg.sum_quadratic_box(1, 1).unwrap().norm() < 1e-12);
        assert!((g.principal().sum_quadratic_box(1, 1).unwrap().re - 8.0).abs() < 1e-12);
        let g = group(35);
        for chi in g.characters().filter(|c| !c.is_principal()) {
            assert!(chi.sum_quadratic_box(2, 0).unwrap().norm() < 1e-12);
            let direct: Complex64 = (-4i64..=4)
                .flat_map(|x| (-4i64..=4).map(move |y| x * x + 3 * y * y))
                .map(|v| chi.value(v))
                .sum();
            assert!((chi.sum_quadratic_box(3, 4).unwrap() - direct).norm() < 1e-9);
            assert!(chi.sum_quadratic_box(3, 4).unwrap().norm() <= 81.0 + 1e-9);
        }
        assert!(g.principal().sum_quadratic_box(5, 2).is_err());
    }

    #[test]
    fn polya_vinogradov_holds_for_small_primes() {
        for p in (3..=499u64).filter(|&p| arith::is_prime(p)) {
            let g = group(p);
            let bound = polya_vinogradov_bound(p);
            for chi in g.characters().filter(|c| !c.is_principal()) {
                assert!(polya_vinogradov_max(&chi) <= bound);
            }
        }
    }

    #[test]
    fn burgess_examples() {
        let b = burgess_bound(100, 10007, 2, 0.05);
        let expected = 10.0 * 10007f64.powf(0.2375);
        assert!((b - expected).abs() < 1e-9 * expected);
        assert!((b - 89.0).abs() < 0.5);
        let g = group(5);
        let leg = legendre_in(&g, 5);
        let r = burgess_ratio(&leg, 0, 5, 2, 0.0).unwrap();
        assert!(r.empirical < 1e-12);
        assert!(r.ratio >= 0.0 && r.ratio.is_finite());
        assert_eq!(
            burgess_ratio(&g.principal(), 0, 5, 2, 0.0),
            Err(Error::PrincipalCharacter)
        );
        assert!(burgess_ratio(&leg, 0, 5, 4, 0.0).is_err());
    }

    #[test]
    fn disc_and_hb() {
        assert_eq!(disc_points((0.0, 0.0), 2.5).count(), 21);
        assert_eq!(disc_points((0.5, 0.5), 0.0).count(), 0);
        assert_eq!(disc_points((1.0, -2.0), 0.0).collect::<Vec<_>>(), vec![(1, -2)]);
        let lb = hb_bound_large_r(1000.0, 10007, 10007, 0.05);
        let expected = (1000f64.powf(5.0 / 3.0) * 10007f64.powf(5.0 / 36.0) + 1e6 * 10007f64.powf(-1.0 / 18.0))
            * 10007f64.powf(0.05);
        assert!((lb - expected).abs() < 1e-9 * expected);

        let g = group(1001);
        let form = BinaryForm { a: 1, b: 0, c: 1 };
        for chi in g.characters().filter(|c| !c.is_principal()).take(20) {
            let a = hb_ratio(&chi, form, (3.0, 4.0), 0.0, 3, 0.05).unwrap();
            assert!(a.empirical == 0.0 || (a.empirical - 1.0).abs() < 1e-12);
            assert_eq!(a.points, 1);
            let a = hb_ratio(&chi, form, (0.0, 0.0), 40.0, 3, 0.05).unwrap();
            if let Some(r) = a.ratio {
                assert!(r.is_finite() && r >= 0.0);
            }
        }
        let g = group(45);
        let chi = g.character(1);
        assert!(matches!(
            hb_ratio(&chi, form, (0.0, 0.0), 3.0, 3, 0.05),
            Err(Error::NotSquarefree { .. })
        ));
        let g = group(15);
        let chi = g.character(1);
        // disc = 9 - 4 = 5 shares a factor with 15
        let bad = BinaryForm { a: 1, b: 3, c: 1 };
        assert!(matches!(
            hb_ratio(&chi, bad, (0.0, 0.0), 3.0, 3, 0.05),
            Err(Error::NotCoprime { .. })
        ));
    }

    #[test]
    fn hb_regimes() {
        let q1 = 10_007u64;
        // r = 3: small range is [q1^(5/12), q1^(7/12)]
        assert_eq!(hb_regime(100.0, q1, 3), HbRegime::SmallR);
        assert_eq!(hb_regime(1000.0, q1, 3), HbRegime::LargeR);
        assert_eq!(hb_regime(5.0, q1, 3), HbRegime::Uncovered);
        // r = 6: small range tops out at q1^(1/2), leaving a gap below q1^(7/12)
        assert_eq!(hb_regime(150.0, q1, 6), HbRegime::Uncovered);
    }

    #[test]
    fn unit_root_arithmetic() {
        let a = UnitRoot::new(1, 3);
        let b = UnitRoot::new(1, 6);
        assert_eq!(a * b, UnitRoot::new(1, 2));
        assert_eq!(a.pow(3), UnitRoot::ONE);
        assert_eq!(a.conj(), UnitRoot::new(2, 3));
        assert_eq!(UnitRoot::new(-1, 4), UnitRoot::new(3, 4));
        assert_eq!(UnitRoot::new(2, 4).angle(), Some((1, 2)));
        assert!((UnitRoot::new(1, 4).to_complex() - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((a * UnitRoot::ZERO).is_zero());
    }
}
