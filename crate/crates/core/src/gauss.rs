//! Quadratic Gauss sums modulo odd squarefree `c`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd_u64, jacobi_unchecked, mul_mod};
use crate::characters::{unit_angle, UnitRoot};
use crate::conv;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussMethod {
    /// `sum_{n=1}^{c} e(a n^2 / c)`
    Direct,
    /// `(a/c) eps_c sqrt(c)`
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussValue {
    pub value: Complex64,
    pub method: GaussMethod,
}

fn require_odd_squarefree(c: u64) -> Result<()> {
    if c == 0 || c.is_multiple_of(2) {
        return Err(Error::InvalidModulus { value: c, min: 1 });
    }
    if !arith::is_squarefree(c)? {
        return Err(Error::NotSquarefree { value: c });
    }
    Ok(())
}

/// `1` if `c = 1 (mod 4)`, `i` if `c = 3 (mod 4)`.
pub fn epsilon_c(c: u64) -> Result<UnitRoot> {
    if c.is_multiple_of(2) {
        return Err(Error::InvalidModulus { value: c, min: 1 });
    }
    Ok(if c % 4 == 1 { UnitRoot::ONE } else { UnitRoot::new(1, 4) })
}

pub fn gauss_sum(a: i64, c: u64, method: GaussMethod) -> Result<GaussValue> {
    require_odd_squarefree(c)?;
    let a_red = arith::reduce(a, c);
    let value = match method {
        GaussMethod::Direct => (1..=c)
            .map(|n| unit_angle(mul_mod(a_red, mul_mod(n, n, c), c), c))
            .sum(),
        GaussMethod::Closed => {
            if gcd_u64(a_red, c) != 1 {
                return Err(Error::NotCoprime {
                    what: "a",
                    value: a,
                    modulus: c,
                });
            }
            let sign = jacobi_unchecked(a_red, c) as f64;
            epsilon_c(c)?.to_complex() * (sign * (c as f64).sqrt())
        }
    };
    Ok(GaussValue { value, method })
}

/// `(1 / (eps_c sqrt c)) sum_{k=1}^{c} (k/c) e(n k / c)`, which recovers the
/// Jacobi symbol `(n/c)`.
pub fn jacobi_via_gauss(n: i64, c: u64) -> Result<Complex64> {
    require_odd_squarefree(c)?;
    let n = arith::reduce(n, c);
    let sum: Complex64 = (1..=c)
        .filter_map(|k| match jacobi_unchecked(k, c) {
            0 => None,
            s => Some(unit_angle(mul_mod(n, k, c), c) * s as f64),
        })
        .sum();
    Ok(sum / (epsilon_c(c)?.to_complex() * (c as f64).sqrt()))
}

/// `T(q1) = sum_{a1, a2 mod q1} ((a1^2 + alpha2 a2^2) / q1)`.
///
/// Summands are in `{-1, 0, 1}`, so the result is an exact integer.
pub fn t_sum(q1: u64, alpha2: i64) -> Result<i64> {
    if q1 < 3 {
        return Err(Error::InvalidModulus { value: q1, min: 3 });
    }
    require_odd_squarefree(q1)?;
    let alpha = arith::reduce(alpha2, q1);
    if gcd_u64(alpha, q1) != 1 {
        return Err(Error::NotCoprime {
            what: "alpha2",
            value: alpha2,
            modulus: q1,
        });
    }
    // residues mod q1 of a over one full period
    let mut h1 = vec![0u64; q1 as usize];
    let mut h2 = vec![0u64; q1 as usize];
    for a in 0..q1 {
        let s = mul_mod(a, a, q1);
        h1[s as usize] += 1;
        h2[mul_mod(s, alpha, q1) as usize] += 1;
    }
    let dist = conv::cyclic_convolution(&h1, &h2);
    Ok(dist
        .iter()
        .enumerate()
        .map(|(r, &count)| count as i64 * jacobi_unchecked(r as u64, q1) as i64)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn gauss_examples() {
        let g = gauss_sum(1, 1, GaussMethod::Direct).unwrap().value;
        assert!(close(g, Complex64::new(1.0, 0.0), 1e-12));
        let g = gauss_sum(1, 3, GaussMethod::Direct).unwrap().value;
        assert!(close(g, Complex64::new(0.0, 3f64.sqrt()), 1e-12));
        let g = gauss_sum(2, 5, GaussMethod::Direct).unwrap().value;
        assert!(close(g, Complex64::new(-(5f64.sqrt()), 0.0), 1e-12));
        let g = gauss_sum(2, 5, GaussMethod::Closed).unwrap().value;
        assert!(close(g, Complex64::new(-(5f64.sqrt()), 0.0), 1e-12));
    }

    #[test]
    fn gauss_rejects_bad_moduli() {
        assert!(gauss_sum(1, 4, GaussMethod::Direct).is_err());
        assert!(gauss_sum(1, 9, GaussMethod::Direct).is_err());
        assert!(gauss_sum(3, 15, GaussMethod::Closed).is_err());
        // direct sum is defined for non-coprime a
        assert!(gauss_sum(3, 15, GaussMethod::Direct).is_ok());
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon_c(5).unwrap(), UnitRoot::ONE);
        assert_eq!(epsilon_c(3).unwrap(), UnitRoot::new(1, 4));
        assert_eq!(epsilon_c(1).unwrap(), UnitRoot::ONE);
        assert!(epsilon_c(6).is_err());
    }

    #[test]
    fn relation_examples() {
        assert!(jacobi_via_gauss(0, 15).unwrap().norm() < 1e-12);
        assert!(close(jacobi_via_gauss(1, 5).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
        assert!(close(jacobi_via_gauss(2, 3).unwrap(), Complex64::new(-1.0, 0.0), 1e-12));
        assert!(jacobi_via_gauss(1, 27).is_err());
    }

    #[test]
    fn gauss_magnitude() {
        for c in (1..=99u64).step_by(2).filter(|&c| arith::is_squarefree(c).unwrap()) {
            for a in (1..c as i64).filter(|&a| gcd_u64(a as u64, c) == 1) {
                let g = gauss_sum(a, c, GaussMethod::Direct).unwrap().value;
                assert!((g.norm() - (c as f64).sqrt()).abs() <= 1e-9 * (c as f64).sqrt());
            }
        }
    }

    #[test]
    fn t_sum_examples() {
        assert_eq!(t_sum(3, 1).unwrap(), 0);
        assert_eq!(t_sum(15, 2).unwrap(), 0);
        assert_eq!(t_sum(5, 1).unwrap(), 0);
        assert!(t_sum(15, 5).is_err());
        assert!(t_sum(9, 1).is_err());
    }

    #[test]
    fn t_sum_matches_double_loop() {
        for q1 in [3u64, 7, 15, 21, 35] {
            for alpha in 1..q1 as i64 {
                if gcd_u64(alpha as u64, q1) != 1 {
                    continue;
                }
                let direct: i64 = (0..q1 as i64)
                    .flat_map(|a| (0..q1 as i64).map(move |b| a * a + alpha * b * b))
                    .map(|v| arith::jacobi_symbol(v, q1).unwrap() as i64)
                    .sum();
                assert_eq!(t_sum(q1, alpha).unwrap(), direct);
            }
        }
    }
}
