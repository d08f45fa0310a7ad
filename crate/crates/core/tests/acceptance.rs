//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tqc_core::arith::is_prime;
use tqc_core::audit::{burgess_table, gauss_audit, hb_table};
use tqc_core::characters::{polya_vinogradov_bound, polya_vinogradov_max, BinaryForm, CharacterGroup};
use tqc_core::counting::{
    count_solutions, count_solutions_bruteforce, main_term_approx, main_term_exact, smallest_solution, BoxCounter,
    CountMode, TernaryForm,
};
use tqc_core::diophantine::{
    conjecture_rhs_fast, conjecture_rhs_full, exceptional_alpha_count, heuristic_reduction, Verdict,
};
use tqc_core::variance::{variance_direct, variance_split};
use tqc_core::{Exec, Modulus};

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn odd_moduli(lo: u64, hi: u64) -> impl Iterator<Item = Modulus> {
    (lo..=hi).filter(|q| q % 2 == 1).map(|q| Modulus::new(q).unwrap())
}

fn random_unit(rng: &mut ChaCha8Rng, q: u64) -> u64 {
    loop {
        let a = rng.gen_range(1..q);
        if a.gcd(&q) == 1 {
            return a;
        }
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gauss_closed_form() -> Check {
    let rows = gauss_audit(201, Exec::default()).map_err(|e| e.to_string())?;
    let cases: u64 = rows.iter().map(|r| r.closed_form_cases).sum();
    let worst = rows.iter().map(|r| r.closed_form_max_dev).fold(0.0, f64::max);
    ensure(worst <= 1e-6, || format!("max |direct - closed| / sqrt(c) = {worst:e}"))?;
    Ok(format!(
        "{} moduli, {cases} cases, max dev/sqrt(c) {worst:.1e}",
        rows.len()
    ))
}

fn gauss_relation() -> Check {
    let rows = gauss_audit(201, Exec::default()).map_err(|e| e.to_string())?;
    let cases: u64 = rows.iter().map(|r| r.relation_cases).sum();
    let worst = rows.iter().map(|r| r.relation_max_dev).fold(0.0, f64::max);
    ensure(worst <= 1e-6, || format!("max deviation {worst:e}"))?;
    Ok(format!("{cases} cases, max dev {worst:.1e}"))
}

fn t_sum_vanishes() -> Check {
    let rows = gauss_audit(201, Exec::default()).map_err(|e| e.to_string())?;
    let cases: u64 = rows.iter().map(|r| r.t_sum_cases).sum();
    let bad: Vec<u64> = rows.iter().filter(|r| r.t_sum_nonzero > 0).map(|r| r.c).collect();
    ensure(bad.is_empty(), || format!("nonzero for q1 in {bad:?}"))?;
    Ok(format!("{cases} (q1, a2) pairs, all zero"))
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let instances = 240;
    for _ in 0..instances {
        let q = 2 * rng.gen_range(1..=49u64) + 1;
        let modulus = Modulus::new(q).unwrap();
        let a2 = random_unit(&mut rng, q) as i64;
        let a3 = random_unit(&mut rng, q) as i64;
        let n = rng.gen_range(1..=q.min(300));
        let mode = CountMode::ALL[rng.gen_range(0..CountMode::ALL.len())];
        let form = TernaryForm::diagonal(modulus, a2, a3).unwrap();
        let fast = count_solutions(&form, n, mode).map_err(|e| e.to_string())?;
        let slow = count_solutions_bruteforce(&form, n, mode).map_err(|e| e.to_string())?;
        ensure(fast == slow, || {
            format!("q={q} a2={a2} a3={a3} N={n} {mode}: {fast} != {slow}")
        })?;
    }
    Ok(format!("{instances} seeded instances agree"))
}

fn mean_identity() -> Check {
    let mut cases = 0;
    for modulus in odd_moduli(3, 225) {
        let q = modulus.q();
        let mut alphas = vec![1, 2, q as i64 - 1];
        alphas.retain(|&a| modulus.is_unit(a));
        alphas.dedup();
        for a2 in alphas {
            for n in [1, q / 3] {
                let counter = BoxCounter::new(&modulus, a2, n, CountMode::CoprimeX3).map_err(|e| e.to_string())?;
                let counts = counter
                    .counts(&modulus.units(), Exec::default())
                    .map_err(|e| e.to_string())?;
                let total: u128 = counts.iter().map(|&s| s as u128).sum();
                let m = main_term_exact(&modulus, a2, n).map_err(|e| e.to_string())?;
                let kl = m.k as u128 * m.l as u128;
                let phi_m = m.value * tqc_core::Rational::from_integer(m.phi as i128);
                ensure(
                    total == kl && phi_m == tqc_core::Rational::from_integer(kl as i128),
                    || format!("q={q} a2={a2} N={n}: sum S = {total}, K L = {kl}, phi M = {phi_m}"),
                )?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (q, a2, N) cases exact"))
}

fn variance_split_identity() -> Check {
    let mut cases = 0;
    let mut worst = 0.0f64;
    for modulus in odd_moduli(3, 45) {
        let q = modulus.q();
        for a2 in [1, 2].into_iter().filter(|&a| modulus.is_unit(a)) {
            for n in [1, q / 2, q] {
                let v = variance_direct(&modulus, a2, n, Exec::default()).map_err(|e| e.to_string())?;
                let split = variance_split(&modulus, a2, n, Exec::default()).map_err(|e| e.to_string())?;
                let sum = split.v1 + split.v2;
                let gap = if v == 0.0 { sum.abs() } else { (v - sum).abs() / v };
                worst = worst.max(gap);
                ensure(gap <= 1e-6, || format!("q={q} a2={a2} N={n}: V={v} V1+V2={sum}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases, max relative gap {worst:.1e}"))
}

fn three_squares_floor() -> Check {
    let mut found = 0;
    let mut beyond_cap = 0;
    for modulus in odd_moduli(3, 999) {
        let q = modulus.q();
        let form = TernaryForm::new(modulus, 1, 1, 1).unwrap();
        let floor = (q as f64 / 3.0).sqrt();
        match smallest_solution(&form, CountMode::Nontrivial, None).map_err(|e| e.to_string())? {
            Some(s) => {
                ensure(s.height as f64 >= floor, || {
                    format!("q={q}: {:?} has height below {floor}", s.x)
                })?;
                found += 1;
            }
            // nothing up to a cap that exceeds the floor
            None => beyond_cap += 1,
        }
    }
    Ok(format!(
        "{found} moduli with a solution, {beyond_cap} with none below the cap"
    ))
}

fn almost_all_replication() -> Check {
    let mut details = Vec::new();
    let mut all_ok = true;
    for q in [3001u64, 5003, 10007] {
        let modulus = Modulus::new(q).unwrap();
        let n = (q as f64).powf(0.55).ceil() as u64;
        let counter = BoxCounter::new(&modulus, 1, n, CountMode::CoprimeX3).map_err(|e| e.to_string())?;
        let alphas = modulus.units();
        let counts = counter.counts(&alphas, Exec::default()).map_err(|e| e.to_string())?;
        let approx = main_term_approx(&modulus, 1, n).map_err(|e| e.to_string())?;
        let exact = main_term_exact(&modulus, 1, n).map_err(|e| e.to_string())?.to_f64();
        let close = counts
            .iter()
            .filter(|&&s| (s as f64 / approx - 1.0).abs() <= 0.25)
            .count();
        let fraction = close as f64 / alphas.len() as f64;
        let mean = counts.iter().map(|&s| s as f64 / exact).sum::<f64>() / alphas.len() as f64;
        let ok = fraction >= 0.95 && (mean - 1.0).abs() <= 1e-6;
        all_ok &= ok;
        details.push(format!(
            "q={q} N={n}: {:.2}% within 0.25, |mean S/M - 1| = {:.1e}{}",
            100.0 * fraction,
            (mean - 1.0).abs(),
            if ok { "" } else { " (below threshold)" }
        ));
    }
    let details = details.join("; ");
    ensure(all_ok, || details.clone())?;
    Ok(details)
}

fn polya_vinogradov() -> Check {
    let mut characters = 0;
    let mut worst = 0.0f64;
    for q in (3..=499).filter(|&q| is_prime(q)) {
        let group = CharacterGroup::new(Modulus::new(q).unwrap());
        let bound = polya_vinogradov_bound(q);
        for chi in group.characters().filter(|c| !c.is_principal()) {
            let max = polya_vinogradov_max(&chi);
            worst = worst.max(max / bound);
            ensure(max <= bound, || format!("q={q} chi={}: {max} > {bound}", chi.index()))?;
            characters += 1;
        }
    }
    Ok(format!("{characters} characters, max ratio {worst:.3}"))
}

fn fast_full_agreement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let mut cases = 0;
    for modulus in odd_moduli(3, 1001) {
        let q = modulus.q();
        for _ in 0..20 {
            let a2 = random_unit(&mut rng, q) as i64;
            let a3 = random_unit(&mut rng, q) as i64;
            let full = conjecture_rhs_full(&modulus, [1, a2, a3], 0.0, Exec::Serial).map_err(|e| e.to_string())?;
            let fast = conjecture_rhs_fast(&modulus, a2, a3, 0.0).map_err(|e| e.to_string())?;
            ensure(full.value == fast.value, || {
                format!("q={q} a=(1,{a2},{a3}): full {:?} vs fast {:?}", full.value, fast.value)
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases agree exactly"))
}

/// Exhaustive search for a non-zero `x` in `[-N, N]^3` on the form.
fn has_nontrivial_solution(form: &TernaryForm, n: u64) -> bool {
    let n = n as i64;
    (-n..=n).any(|x1| (-n..=n).any(|x2| (-n..=n).any(|x3| (x1, x2, x3) != (0, 0, 0) && form.is_solution([x1, x2, x3]))))
}

fn reduction_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0011);
    let target = 500;
    let mut confirmed = 0;
    let mut drawn = 0u64;
    while confirmed < target {
        drawn += 1;
        let q = 2 * rng.gen_range(6..=100u64) + 1;
        let modulus = Modulus::new(q).unwrap();
        let n_max = (((q - 1) / 3) as f64).sqrt().floor() as u64;
        let n = rng.gen_range(1..=n_max.clamp(1, 12));
        let r = rng.gen_range(1..q);
        // Half the draws are uniform; the rest pick small same-sign remainders
        // so that enough draws land in the applicable region.
        let alpha: [i64; 3] = if drawn.is_multiple_of(2) || r.gcd(&q) != 1 {
            [0; 3].map(|_| random_unit(&mut rng, q) as i64)
        } else {
            let limit = ((q - 1) / (3 * n * n)).max(1) as i64;
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            let inv = modulus.inverse(r as i64).unwrap() as i64;
            let mut alpha = [0i64; 3];
            for a in alpha.iter_mut() {
                let b = sign * rng.gen_range(1..=limit);
                *a = modulus.reduce(b * inv) as i64;
            }
            alpha
        };
        if alpha.iter().any(|&a| !modulus.is_unit(a)) {
            continue;
        }
        let report = heuristic_reduction(&modulus, alpha, r, n).map_err(|e| e.to_string())?;
        if report.verdict != Verdict::Applies {
            continue;
        }
        let form = TernaryForm::new(modulus, alpha[0], alpha[1], alpha[2]).unwrap();
        ensure(!has_nontrivial_solution(&form, n), || {
            format!("q={q} a={alpha:?} r={r} N={n}: verdict applies but a solution exists")
        })?;
        confirmed += 1;
    }
    Ok(format!("{confirmed} applicable instances confirmed ({drawn} drawn)"))
}

fn exceptional_count() -> Check {
    let fixture = exceptional_alpha_count(&Modulus::new(15).unwrap()).count;
    ensure(fixture == 6, || format!("count(15) = {fixture}, expected 6"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0012);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let q = 2 * rng.gen_range(1..50_000u64) + 1;
        let count = exceptional_alpha_count(&Modulus::new(q).unwrap()).count;
        let bound = 10.0 * (q as f64).powf(0.77);
        worst = worst.max(count as f64 / bound);
        ensure(count as f64 <= bound, || format!("q={q}: {count} > {bound}"))?;
    }
    Ok(format!("count(15) = 6, 50 moduli, max count/(10 q^0.77) {worst:.3}"))
}

fn bound_tables() -> Check {
    let form = BinaryForm { a: 1, b: 0, c: 1 };
    let mut rows = 0;
    for (i, q) in [10_007u64, 15_015].into_iter().enumerate() {
        let modulus = Modulus::new(q).unwrap();
        let burgess = burgess_table(&modulus, 10, i as u64, 0.05).map_err(|e| e.to_string())?;
        for row in &burgess {
            ensure(row.ratio.is_finite() && row.ratio >= 0.0, || {
                format!("Burgess row {row:?}")
            })?;
        }
        let hb = hb_table(&modulus, form, 10, i as u64, 3, 0.05).map_err(|e| e.to_string())?;
        for row in &hb {
            ensure(matches!(row.ratio, Some(x) if x.is_finite() && x >= 0.0), || {
                format!("Heath-Brown row {row:?}")
            })?;
        }
        ensure(burgess.len() == 20 && hb.len() == 10, || format!("q={q}: short tables"))?;
        rows += burgess.len() + hb.len();
    }
    Ok(format!("{rows} rows, all ratios finite and nonnegative"))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "Gauss sum closed form",
            budget: Duration::from_secs(10),
            run: gauss_closed_form,
        },
        Criterion {
            id: 2,
            name: "Jacobi symbol from Gauss sums",
            budget: Duration::from_secs(30),
            run: gauss_relation,
        },
        Criterion {
            id: 3,
            name: "T(q1) = 0",
            budget: Duration::from_secs(10),
            run: t_sum_vanishes,
        },
        Criterion {
            id: 4,
            name: "count oracle equivalence",
            budget: Duration::from_secs(60),
            run: oracle_equivalence,
        },
        Criterion {
            id: 5,
            name: "exact mean identity",
            budget: Duration::from_secs(60),
            run: mean_identity,
        },
        Criterion {
            id: 6,
            name: "variance split V = V1 + V2",
            budget: Duration::from_secs(120),
            run: variance_split_identity,
        },
        Criterion {
            id: 7,
            name: "three-squares height floor",
            budget: Duration::from_secs(120),
            run: three_squares_floor,
        },
        Criterion {
            id: 8,
            name: "almost-all asymptotic, desk scale",
            budget: Duration::from_secs(600),
            run: almost_all_replication,
        },
        Criterion {
            id: 9,
            name: "Polya-Vinogradov",
            budget: Duration::from_secs(60),
            run: polya_vinogradov,
        },
        Criterion {
            id: 10,
            name: "fast = full height bound",
            budget: Duration::from_secs(60),
            run: fast_full_agreement,
        },
        Criterion {
            id: 11,
            name: "exclusion test soundness",
            budget: Duration::from_secs(60),
            run: reduction_soundness,
        },
        Criterion {
            id: 12,
            name: "exceptional count",
            budget: Duration::from_secs(60),
            run: exceptional_count,
        },
        Criterion {
            id: 13,
            name: "Burgess / Heath-Brown tables",
            budget: Duration::from_secs(120),
            run: bound_tables,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; took {elapsed:.1?}, budget {:?}", c.budget)),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS [{:>2}] {} ({detail}; {elapsed:.2?})", c.id, c.name),
            Err(reason) => {
                failed += 1;
                println!("FAIL [{:>2}] {}: {reason}", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
