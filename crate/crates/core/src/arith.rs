//! Integer substrate: factorisation, Jacobi symbols and the standard
//! multiplicative functions, all exact on 64-bit inputs.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exact rational carrier for main terms and local densities.
pub type Rational = num_rational::Ratio<i128>;

/// Largest argument accepted by the factorisation routines.
pub const MAX_ARG: u64 = 1 << 62;

const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

/// An odd modulus `q >= 3` together with its factorisation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modulus {
    q: u64,
    factors: Vec<(u64, u32)>,
    phi: u64,
    radical: u64,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q < 3 || q.is_multiple_of(2) {
            return Err(Error::InvalidModulus { value: q, min: 3 });
        }
        let factors = factorize(q)?;
        let phi = factors.iter().map(|&(p, e)| p.pow(e - 1) * (p - 1)).product();
        let radical = factors.iter().map(|&(p, _)| p).product();
        Ok(Modulus {
            q,
            factors,
            phi,
            radical,
        })
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    #[inline]
    pub fn phi(&self) -> u64 {
        self.phi
    }

    #[inline]
    pub fn radical(&self) -> u64 {
        self.radical
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    #[inline]
    pub fn is_unit(&self, n: i64) -> bool {
        gcd_u64(reduce(n, self.q), self.q) == 1
    }

    /// The reduced residue system `{1 <= s <= q : gcd(s, q) = 1}` in
    /// increasing order (the value `q` itself is never a unit).
    pub fn units(&self) -> Vec<u64> {
        (1..self.q).filter(|&s| gcd_u64(s, self.q) == 1).collect()
    }

    /// Positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        divisors_from_factors(&self.factors)
    }

    /// Divisors `d` of `q` with `mu(d) != 0`, paired with `mu(d)`.
    pub fn squarefree_divisors(&self) -> Vec<(u64, i8)> {
        let mut out = vec![(1u64, 1i8)];
        for &(p, _) in &self.factors {
            let len = out.len();
            for i in 0..len {
                let (d, m) = out[i];
                out.push((d * p, -m));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn reduce(&self, n: i64) -> u64 {
        reduce(n, self.q)
    }

    /// Inverse of `a` modulo `q`, if it exists.
    pub fn inverse(&self, a: i64) -> Option<u64> {
        mod_inverse(reduce(a, self.q), self.q)
    }

    pub fn require_unit(&self, what: &'static str, a: i64) -> Result<()> {
        if self.is_unit(a) {
            Ok(())
        } else {
            Err(Error::NotCoprime {
                what,
                value: a,
                modulus: self.q,
            })
        }
    }
}

/// `n mod m` in `[0, m)`.
#[inline]
pub fn reduce(n: i64, m: u64) -> u64 {
    (n as i128).rem_euclid(m as i128) as u64
}

#[inline]
pub(crate) fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`; exists iff `gcd(a, m) = 1`.
pub(crate) fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let e = (a as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho. `n` must be odd and composite.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut q, mut g) = (2u64, 2u64, 1u64, 1u64);
        let mut r = 1u64;
        let mut ys = 2u64;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_large(d, out);
    split_large(n / d, out);
}

/// Prime factorisation as `(prime, exponent)` pairs with increasing primes.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(Error::Zero);
    }
    if n > MAX_ARG {
        return Err(Error::OutOfRange {
            what: "factorisation argument",
            value: n,
            limit: MAX_ARG,
        });
    }
    let mut primes = Vec::new();
    let mut m = n;
    while m.is_multiple_of(2) {
        primes.push(2);
        m /= 2;
    }
    let mut p = 3u64;
    while p <= TRIAL_DIVISION_LIMIT && p * p <= m {
        while m.is_multiple_of(p) {
            primes.push(p);
            m /= p;
        }
        p += 2;
    }
    if m > 1 {
        if p * p > m {
            primes.push(m);
        } else {
            split_large(m, &mut primes);
        }
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    Ok(out)
}

fn divisors_from_factors(factors: &[(u64, u32)]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in factors {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Jacobi symbol `(a / c)` for odd positive `c`.
pub fn jacobi_symbol(a: i64, c: u64) -> Result<i8> {
    if c == 0 || c.is_multiple_of(2) {
        return Err(Error::InvalidModulus { value: c, min: 1 });
    }
    Ok(jacobi_unchecked(reduce(a, c), c))
}

/// Binary Jacobi algorithm; `c` odd, `a` already reduced.
pub(crate) fn jacobi_unchecked(mut a: u64, mut c: u64) -> i8 {
    let mut sign = 1i8;
    a %= c;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (c % 8 == 3 || c % 8 == 5) {
            sign = -sign;
        }
        if a % 4 == 3 && c % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut c);
        a %= c;
    }
    if c == 1 {
        sign
    } else {
        0
    }
}

pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factorize(n)?.iter().map(|&(p, e)| p.pow(e - 1) * (p - 1)).product())
}

pub fn mobius(n: u64) -> Result<i8> {
    let f = factorize(n)?;
    if f.iter().any(|&(_, e)| e > 1) {
        Ok(0)
    } else if f.len() % 2 == 0 {
        Ok(1)
    } else {
        Ok(-1)
    }
}

pub fn radical(n: u64) -> Result<u64> {
    Ok(factorize(n)?.iter().map(|&(p, _)| p).product())
}

pub fn divisors(n: u64) -> Result<Vec<u64>> {
    Ok(divisors_from_factors(&factorize(n)?))
}

pub fn is_squarefree(n: u64) -> Result<bool> {
    Ok(factorize(n)?.iter().all(|&(_, e)| e == 1))
}
