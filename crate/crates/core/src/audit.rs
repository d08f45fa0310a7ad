//! Identity suites and sampled bound tables shared by the CLI and the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd_u64, Modulus};
use crate::characters::{
    burgess_ratio, hb_ratio, lindelof_bound, polya_vinogradov_bound, polya_vinogradov_max, BinaryForm, CharacterGroup,
    HbRegime,
};
use crate::exec::Exec;
use crate::gauss::{gauss_sum, jacobi_via_gauss, t_sum, GaussMethod};
use crate::{Error, Result};

/// Tolerance for both floating-point Gauss identities.
pub const GAUSS_TOLERANCE: f64 = 1e-6;

/// Results of the Gauss-sum identities for one modulus `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussAuditRow {
    pub c: u64,
    pub closed_form_cases: u64,
    /// `max |direct - closed| / sqrt(c)`
    pub closed_form_max_dev: f64,
    pub relation_cases: u64,
    /// `max |jacobi_via_gauss - jacobi|`
    pub relation_max_dev: f64,
    pub t_sum_cases: u64,
    pub t_sum_nonzero: u64,
    pub failures: u64,
}

/// Closed form, Jacobi relation and `T(q1) = 0` for every odd squarefree
/// `c <= max_c`.
pub fn gauss_audit(max_c: u64, exec: Exec) -> Result<Vec<GaussAuditRow>> {
    let cs: Vec<u64> = (1..=max_c)
        .step_by(2)
        .filter(|&c| arith::is_squarefree(c).unwrap_or(false))
        .collect();
    let rows = exec.map(&cs, |&c| gauss_audit_one(c));
    rows.into_iter().collect()
}

fn gauss_audit_one(c: u64) -> Result<GaussAuditRow> {
    let sqrt_c = (c as f64).sqrt();
    let mut row = GaussAuditRow {
        c,
        closed_form_cases: 0,
        closed_form_max_dev: 0.0,
        relation_cases: 0,
        relation_max_dev: 0.0,
        t_sum_cases: 0,
        t_sum_nonzero: 0,
        failures: 0,
    };
    for a in (1..=c).filter(|&a| gcd_u64(a, c) == 1) {
        let direct = gauss_sum(a as i64, c, GaussMethod::Direct)?.value;
        let closed = gauss_sum(a as i64, c, GaussMethod::Closed)?.value;
        let dev = (direct - closed).norm() / sqrt_c;
        row.closed_form_cases += 1;
        row.closed_form_max_dev = row.closed_form_max_dev.max(dev);
        if dev > GAUSS_TOLERANCE {
            row.failures += 1;
        }
    }
    for n in 0..c {
        let via = jacobi_via_gauss(n as i64, c)?;
        let exact = arith::jacobi_symbol(n as i64, c)? as f64;
        let dev = (via - exact).norm();
        row.relation_cases += 1;
        row.relation_max_dev = row.relation_max_dev.max(dev);
        if dev > GAUSS_TOLERANCE {
            row.failures += 1;
        }
    }
    if c >= 3 {
        for a2 in (1..c).filter(|&a| gcd_u64(a, c) == 1) {
            row.t_sum_cases += 1;
            if t_sum(c, a2 as i64)? != 0 {
                row.t_sum_nonzero += 1;
                row.failures += 1;
            }
        }
    }
    Ok(row)
}

/// One sampled interval sum against the Burgess shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurgessRow {
    pub q: u64,
    pub chi_index: u64,
    pub chi_order: u64,
    pub m: u64,
    pub n: u64,
    pub r: u32,
    pub epsilon: f64,
    pub empirical: f64,
    pub bound: f64,
    pub ratio: f64,
    pub lindelof_bound: f64,
    pub polya_vinogradov_max: f64,
    pub polya_vinogradov_bound: f64,
}

fn random_nonprincipal(group: &CharacterGroup, rng: &mut ChaCha8Rng) -> u64 {
    // index 0 is the principal character
    rng.gen_range(1..group.size())
}

/// `configs` seeded `(chi, M, N)` draws, each reported for `r = 2` and `r = 3`.
pub fn burgess_table(modulus: &Modulus, configs: usize, seed: u64, eps: f64) -> Result<Vec<BurgessRow>> {
    let group = CharacterGroup::new(modulus.clone());
    let q = modulus.q();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(2 * configs);
    for _ in 0..configs {
        let index = random_nonprincipal(&group, &mut rng);
        let m = rng.gen_range(0..q);
        let n = rng.gen_range(1..=q);
        let chi = group.character(index);
        let pv = polya_vinogradov_max(&chi);
        for r in [2u32, 3] {
            let b = burgess_ratio(&chi, m, n, r, eps)?;
            rows.push(BurgessRow {
                q,
                chi_index: index,
                chi_order: chi.order(),
                m,
                n,
                r,
                epsilon: eps,
                empirical: b.empirical,
                bound: b.bound,
                ratio: b.ratio,
                lindelof_bound: lindelof_bound(n, q, eps),
                polya_vinogradov_max: pv,
                polya_vinogradov_bound: polya_vinogradov_bound(q),
            });
        }
    }
    Ok(rows)
}

/// One sampled disc sum of a binary form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbRow {
    pub q: u64,
    pub chi_index: u64,
    pub conductor: u64,
    pub form: BinaryForm,
    pub center: (f64, f64),
    pub radius: f64,
    pub r: u32,
    pub epsilon: f64,
    pub points: u64,
    pub empirical: f64,
    pub regime: HbRegime,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
}

/// `configs` seeded `(chi, center, R)` draws. `R` is drawn uniformly from
/// `[q1^(1/4 + 1/(2r)), 2 q1^(7/12)]`, so for `r = 3` every draw falls in a
/// covered range.
pub fn hb_table(
    modulus: &Modulus,
    form: BinaryForm,
    configs: usize,
    seed: u64,
    r: u32,
    eps: f64,
) -> Result<Vec<HbRow>> {
    if !modulus.is_squarefree() {
        return Err(Error::NotSquarefree { value: modulus.q() });
    }
    if r < 3 {
        return Err(Error::InvalidParameter(format!("r must be at least 3, got {r}")));
    }
    let group = CharacterGroup::new(modulus.clone());
    let q = modulus.q();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(configs);
    for _ in 0..configs {
        let index = random_nonprincipal(&group, &mut rng);
        let chi = group.character(index);
        let q1 = chi.conductor().conductor as f64;
        let lo = q1.powf(0.25 + 0.5 / r as f64);
        let hi = (2.0 * q1.powf(7.0 / 12.0)).max(lo);
        let radius = rng.gen_range(lo..=hi);
        let span = q as i64;
        let center = (
            rng.gen_range(-span..=span) as f64 / 2.0,
            rng.gen_range(-span..=span) as f64 / 2.0,
        );
        let audit = hb_ratio(&chi, form, center, radius, r, eps)?;
        rows.push(HbRow {
            q,
            chi_index: index,
            conductor: audit.conductor,
            form,
            center,
            radius,
            r,
            epsilon: eps,
            points: audit.points,
            empirical: audit.empirical,
            regime: audit.regime,
            bound: audit.bound,
            ratio: audit.ratio,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_audit_small() {
        let rows = gauss_audit(35, Exec::Serial).unwrap();
        assert_eq!(rows.first().unwrap().c, 1);
        assert!(rows.iter().all(|r| r.failures == 0));
        assert!(rows.iter().all(|r| r.c != 9 && r.c != 25 && r.c != 27));
        let r15 = rows.iter().find(|r| r.c == 15).unwrap();
        assert_eq!((r15.closed_form_cases, r15.relation_cases, r15.t_sum_cases), (8, 15, 8));
    }

    #[test]
    fn burgess_table_is_seeded() {
        let m = Modulus::new(1009).unwrap();
        let a = burgess_table(&m, 4, 3, 0.05).unwrap();
        let b = burgess_table(&m, 4, 3, 0.05).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        for row in &a {
            assert!(row.chi_index > 0);
            assert!(row.ratio.is_finite() && row.ratio >= 0.0);
            assert!(row.polya_vinogradov_max <= row.polya_vinogradov_bound);
        }
    }

    #[test]
    fn hb_table_covered() {
        let m = Modulus::new(1001).unwrap();
        let form = BinaryForm { a: 1, b: 0, c: 1 };
        let rows = hb_table(&m, form, 5, 11, 3, 0.05).unwrap();
        for row in &rows {
            assert_ne!(row.regime, HbRegime::Uncovered);
            let ratio = row.ratio.unwrap();
            assert!(ratio.is_finite() && ratio >= 0.0);
        }
        assert!(hb_table(&Modulus::new(9).unwrap(), form, 1, 0, 3, 0.05).is_err());
        assert!(hb_table(&m, form, 1, 0, 2, 0.05).is_err());
    }
}
