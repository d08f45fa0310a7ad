//! Cyclic convolution of residue histograms.
//!
//! `(a * b)[r] = sum over s of a[s] b[(r - s) mod q]`. Used to combine the
//! `x1^2` and `a2 x2^2` histograms into the distribution of
//! `x1^2 + a2 x2^2 (mod q)` over a box.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Lengths at or below this use the exact schoolbook product.
pub const SCHOOLBOOK_LIMIT: usize = 4096;

/// Dispatches to the schoolbook product for short inputs and to the
/// floating-point FFT otherwise.
pub fn cyclic_convolution(a: &[u64], b: &[u64]) -> Vec<u64> {
    assert_eq!(a.len(), b.len(), "histograms must share a modulus");
    if a.len() <= SCHOOLBOOK_LIMIT {
        cyclic_convolution_schoolbook(a, b)
    } else {
        cyclic_convolution_fft(a, b)
    }
}

/// Exact `O(q * support)` product. Skips zero entries of `a`, which are
/// the majority for square histograms.
pub fn cyclic_convolution_schoolbook(a: &[u64], b: &[u64]) -> Vec<u64> {
    let q = a.len();
    let mut out = vec![0u64; q];
    for (s, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (t, &y) in b.iter().enumerate() {
            if y != 0 {
                let r = if s + t >= q { s + t - q } else { s + t };
                out[r] += x * y;
            }
        }
    }
    out
}

/// FFT product rounded to the nearest integer.
///
/// # Panics
///
/// If any output lies further than 0.25 from an integer, which means the
/// inputs are too large for exact recovery in double precision.
pub fn cyclic_convolution_fft(a: &[u64], b: &[u64]) -> Vec<u64> {
    let q = a.len();
    if q == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(q);
    let inv = planner.plan_fft_inverse(q);
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / q as f64;
    fa.iter()
        .map(|z| {
            let v = z.re * scale;
            let r = v.round();
            assert!(
                (v - r).abs() < 0.25 && r >= 0.0,
                "FFT convolution lost integer precision ({v})"
            );
            r as u64
        })
        .collect()
}

/// `h[r] = #{ |x| <= n : coeff * x^2 = r (mod q) }`, optionally keeping
/// only `x` coprime to `coprime_to`.
pub fn square_histogram(q: u64, coeff: u64, n: u64, coprime_to: Option<u64>) -> Vec<u64> {
    let mut h = vec![0u64; q as usize];
    let keep = |x: u64| coprime_to.is_none_or(|m| crate::arith::gcd_u64(x, m) == 1);
    let coeff = coeff % q;
    for x in 0..=n {
        if !keep(x) {
            continue;
        }
        let r = crate::arith::mul_mod(crate::arith::mul_mod(x % q, x % q, q), coeff, q);
        h[r as usize] += if x == 0 { 1 } else { 2 };
    }
    h
}

/// `d[r] = #{ |x1|, |x2| <= n : x1^2 + alpha2 x2^2 = r (mod q) }`, with
/// both variables optionally restricted to be coprime to `coprime_to`.
pub fn quadratic_pair_distribution(q: u64, alpha2: u64, n: u64, coprime_to: Option<u64>) -> Vec<u64> {
    let a = square_histogram(q, 1, n, coprime_to);
    let b = square_histogram(q, alpha2, n, coprime_to);
    cyclic_convolution(&a, &b)
}
