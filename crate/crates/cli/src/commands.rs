use serde_json::{json, Value};
use tqc_core::arith::Modulus;
use tqc_core::audit;
use tqc_core::characters::BinaryForm;
use tqc_core::counting::{self, BoxCounter, TernaryForm};
use tqc_core::diophantine::{self, BoundValue, ConjectureReport, Verdict};
use tqc_core::variance::{self, AlphaSample, MainTermKind};
use tqc_core::{Error, Exec};

use crate::args::{
    CharsumArgs, Command, ConjectureArgs, CountArgs, GaussAuditArgs, MainTermArg, ModuliArgs, ScanArg, ScanArgs,
    SizeArgs, SmallestArgs, VarianceArgs, DEFAULT_THETA,
};
use crate::output::{row, Outcome, Row};

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad input; exit code 2.
    Validation { kind: &'static str, message: String },
    /// Anything else; exit code 1.
    Internal(anyhow::Error),
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure::Validation {
            kind: "invalid-config",
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Zero => "zero",
            Error::OutOfRange { .. } => "out-of-range",
            Error::InvalidModulus { .. } => "invalid-modulus",
            Error::NotSquarefree { .. } => "not-squarefree",
            Error::NotCoprime { .. } => "not-coprime",
            Error::NotDivisor { .. } => "not-divisor",
            Error::PrincipalCharacter => "principal-character",
            Error::InvalidParameter(_) => "invalid-parameter",
        };
        Failure::Validation {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

type Job = Box<dyn FnOnce(Exec) -> Result<Outcome, Failure>>;

/// A validated command: its cache-relevant inputs and the work to do.
pub struct Prepared {
    pub kind: &'static str,
    pub params: Value,
    pub job: Job,
}

pub fn prepare(command: Command) -> Result<Prepared, Failure> {
    match command {
        Command::Count(a) => count(a),
        Command::ScanAlpha3(a) => scan_alpha3(a),
        Command::Variance(a) => variance(a),
        Command::Smallest(a) => smallest(a),
        Command::Conjecture(a) => conjecture(a),
        Command::ExceptionalCount(a) => exceptional_count(a),
        Command::GaussAudit(a) => gauss_audit(a),
        Command::CharsumAudit(a) => charsum_audit(a),
    }
}

fn moduli(args: &ModuliArgs) -> Result<Vec<Modulus>, Failure> {
    match (args.q, args.q_range) {
        (Some(q), _) => Ok(vec![Modulus::new(q)?]),
        (None, Some((lo, hi))) => {
            let out: Vec<Modulus> = (lo.max(3)..=hi)
                .filter(|q| q % 2 == 1)
                .map(Modulus::new)
                .collect::<Result<_, _>>()?;
            if out.is_empty() {
                return Err(Failure::invalid(format!("q-range {lo}:{hi} contains no odd q >= 3")));
            }
            Ok(out)
        }
        (None, None) => Err(Failure::invalid("one of --q or --q-range is required")),
    }
}

fn check_finite(name: &str, v: f64, positive: bool) -> Result<(), Failure> {
    if !v.is_finite() || v < 0.0 || (positive && v == 0.0) {
        let need = if positive { "> 0" } else { ">= 0" };
        return Err(Failure::invalid(format!("{name} must be finite and {need}, got {v}")));
    }
    Ok(())
}

/// `N` for one modulus, from `--N` or `ceil(q^theta)`.
fn resolve_n(size: &SizeArgs, q: u64) -> Result<u64, Failure> {
    let n = match (size.n, size.theta) {
        (Some(n), _) => n,
        (None, theta) => {
            let theta = theta.unwrap_or(DEFAULT_THETA);
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(Failure::invalid(format!("theta must lie in (0, 1], got {theta}")));
            }
            // guard against q^theta landing a hair above an exact integer
            ((q as f64).powf(theta) - 1e-9).ceil() as u64
        }
    };
    if n > q {
        return Err(Failure::invalid(format!("N = {n} exceeds q = {q}")));
    }
    Ok(n)
}

fn size_echo(size: &SizeArgs) -> Value {
    match size.n {
        Some(n) => json!({"N": n}),
        None => json!({"theta": size.theta.unwrap_or(DEFAULT_THETA)}),
    }
}

fn qs(ms: &[Modulus]) -> Vec<u64> {
    ms.iter().map(|m| m.q()).collect()
}

fn count(a: CountArgs) -> Result<Prepared, Failure> {
    check_finite("epsilon", a.epsilon, false)?;
    let ms = moduli(&a.moduli)?;
    let mut plan = Vec::new();
    for m in &ms {
        let n = resolve_n(&a.size, m.q())?;
        let forms = a
            .alpha3
            .iter()
            .map(|&a3| TernaryForm::new(m.clone(), a.alpha1, a.alpha2, a3))
            .collect::<Result<Vec<_>, _>>()?;
        plan.push((m.clone(), n, forms));
    }
    let params = json!({
        "q": qs(&ms),
        "alpha1": a.alpha1,
        "alpha2": a.alpha2,
        "alpha3": a.alpha3,
        "size": size_echo(&a.size),
        "N": plan.iter().map(|(_, n, _)| *n).collect::<Vec<_>>(),
        "mode": a.mode.to_string(),
        "epsilon": a.epsilon,
    });
    let (mode, eps) = (a.mode, a.epsilon);
    let job: Job = Box::new(move |_exec| {
        let mut rows = Vec::new();
        for (m, n, forms) in plan {
            let counter = BoxCounter::for_form(&forms[0], n, mode)?;
            let mt = counting::main_term_exact(&m, forms[0].alpha2() as i64, n)?;
            let approx = counting::main_term_approx(&m, forms[0].alpha2() as i64, n)?;
            let in_range = n as f64 >= counting::proven_lower_radius(m.q(), eps);
            for f in forms {
                let s = counter.count(f.alpha3() as i64)?;
                let [a1, a2, a3] = f.alpha();
                rows.push(row(json!({
                    "q": m.q(),
                    "alpha1": a1,
                    "alpha2": a2,
                    "alpha3": a3,
                    "N": n,
                    "mode": mode.to_string(),
                    "S": s,
                    "M": rational(&mt.value),
                    "M_float": mt.to_f64(),
                    "K": mt.k,
                    "L": mt.l,
                    "phi": mt.phi,
                    "E": counting::signed_difference(s, &mt.value),
                    "M_approx": approx,
                    "in_proven_range": in_range,
                })));
            }
        }
        Ok(Outcome {
            rows,
            ..Default::default()
        })
    });
    Ok(Prepared {
        kind: "count",
        params,
        job,
    })
}

fn rational(r: &tqc_core::Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn scan_alpha3(a: ScanArgs) -> Result<Prepared, Failure> {
    check_finite("delta", a.delta, true)?;
    let ms = moduli(&a.moduli)?;
    let mut plan = Vec::new();
    for m in &ms {
        m.require_unit("alpha2", a.alpha2)?;
        let n = resolve_n(&a.size, m.q())?;
        let (alphas, sampled) = if !a.alpha3.is_empty() {
            for &a3 in &a.alpha3 {
                m.require_unit("alpha3", a3)?;
            }
            (a.alpha3.iter().map(|&x| m.reduce(x)).collect::<Vec<_>>(), false)
        } else {
            let sample = match a.sample {
                Some(k) => AlphaSample::Random { size: k, seed: a.seed },
                None if m.phi() > a.max_phi => AlphaSample::Random {
                    size: a.max_phi,
                    seed: a.seed,
                },
                None => AlphaSample::All,
            };
            (sample.select(m), sample != AlphaSample::All)
        };
        plan.push((m.clone(), n, alphas, sampled));
    }
    let params = json!({
        "q": qs(&ms),
        "alpha2": a.alpha2,
        "alpha3": a.alpha3,
        "sample": a.sample,
        "seed": a.seed,
        "max_phi": a.max_phi,
        "size": size_echo(&a.size),
        "N": plan.iter().map(|p| p.1).collect::<Vec<_>>(),
        "mode": a.mode.to_string(),
        "delta": a.delta,
        "main_term": match a.main_term { MainTermArg::Exact => "exact", MainTermArg::Approx => "approx" },
    });
    let (mode, delta, alpha2) = (a.mode, a.delta, a.alpha2);
    let kind = match a.main_term {
        MainTermArg::Exact => MainTermKind::Exact,
        MainTermArg::Approx => MainTermKind::Approx,
    };
    let job: Job = Box::new(move |exec| {
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        for (m, n, alphas, sampled) in plan {
            let counter = BoxCounter::new(&m, alpha2, n, mode)?;
            let counts = counter.counts(&alphas, exec)?;
            let exact = counting::main_term_exact(&m, alpha2, n)?;
            let reference = match kind {
                MainTermKind::Exact => exact.to_f64(),
                MainTermKind::Approx => counting::main_term_approx(&m, alpha2, n)?,
            };
            let ex = variance::exceptional_from_counts(&alphas, &counts, reference, delta)?;
            for (&a3, &s) in alphas.iter().zip(&counts) {
                let dev = variance::relative_deviation(s, reference);
                rows.push(row(json!({
                    "q": m.q(),
                    "alpha2": m.reduce(alpha2),
                    "alpha3": a3,
                    "N": n,
                    "mode": mode.to_string(),
                    "S": s,
                    "M": reference,
                    "E": counting::signed_difference(s, &exact.value),
                    "relative_deviation": dev,
                    "exceptional": dev > delta,
                })));
            }
            let total: u64 = counts.iter().sum();
            let mean_ratio = if reference > 0.0 && !counts.is_empty() {
                Some(total as f64 / (counts.len() as f64 * reference))
            } else {
                None
            };
            summary.push(json!({
                "q": m.q(),
                "N": n,
                "phi": m.phi(),
                "scanned": ex.scanned,
                "sampled": sampled,
                "delta": delta,
                "main_term": reference,
                "exceptional_count": ex.exceptional.len(),
                "exceptional_fraction": ex.fraction,
                "mean_ratio": mean_ratio,
            }));
        }
        Ok(Outcome {
            rows,
            summary: Some(Value::Array(summary)),
            failures: 0,
        })
    });
    Ok(Prepared {
        kind: "scan-alpha3",
        params,
        job,
    })
}

fn variance(a: VarianceArgs) -> Result<Prepared, Failure> {
    check_finite("epsilon", a.epsilon, false)?;
    check_finite("delta", a.delta, true)?;
    let ms = moduli(&a.moduli)?;
    let mut plan = Vec::new();
    for m in &ms {
        m.require_unit("alpha2", a.alpha2)?;
        if m.phi() > a.max_phi {
            return Err(Failure::Validation {
                kind: "out-of-range",
                message: format!("phi({}) = {} exceeds --max-phi {}", m.q(), m.phi(), a.max_phi),
            });
        }
        plan.push((m.clone(), resolve_n(&a.size, m.q())?));
    }
    let params = json!({
        "q": qs(&ms),
        "alpha2": a.alpha2,
        "size": size_echo(&a.size),
        "N": plan.iter().map(|p| p.1).collect::<Vec<_>>(),
        "epsilon": a.epsilon,
        "delta": a.delta,
        "max_phi": a.max_phi,
    });
    let (alpha2, eps, delta) = (a.alpha2, a.epsilon, a.delta);
    let job: Job = Box::new(move |exec| {
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        for (m, n) in plan {
            let r = variance::variance_bound_report(&m, alpha2, n, eps, delta, exec)?;
            let gap = (r.v_direct - r.v1 - r.v2).abs() / r.v_direct.max(1.0);
            rows.push(row(json!({
                "q": r.q,
                "alpha2": r.alpha2,
                "N": r.n,
                "epsilon": r.epsilon,
                "V": r.v_direct,
                "V1": r.v1,
                "V2": r.v2,
                "target": r.target,
                "Delta": r.delta_target,
                "ratio_V": r.ratio_v,
                "ratio_V1": r.ratio_v1,
                "ratio_V2": r.ratio_v2,
                "split_relative_gap": gap,
                "exceptional_fraction": r.exceptional.fraction,
                "exceptional_count": r.exceptional.exceptional.len(),
            })));
            summary.push(json!({"q": r.q, "N": r.n, "l_ratios": r.l_ratios}));
        }
        Ok(Outcome {
            rows,
            summary: Some(Value::Array(summary)),
            failures: 0,
        })
    });
    Ok(Prepared {
        kind: "variance",
        params,
        job,
    })
}

fn smallest(a: SmallestArgs) -> Result<Prepared, Failure> {
    let ms = moduli(&a.moduli)?;
    let mut plan = Vec::new();
    for m in &ms {
        let form = TernaryForm::new(m.clone(), a.alpha1, a.alpha2, a.alpha3)?;
        let cap = a.height_cap.unwrap_or_else(|| counting::default_height_cap(m.q()));
        if cap > counting::MAX_HEIGHT_CAP {
            return Err(Error::OutOfRange {
                what: "height cap",
                value: cap,
                limit: counting::MAX_HEIGHT_CAP,
            }
            .into());
        }
        plan.push((form, cap));
    }
    let params = json!({
        "q": qs(&ms),
        "alpha1": a.alpha1,
        "alpha2": a.alpha2,
        "alpha3": a.alpha3,
        "mode": a.mode.to_string(),
        "height_cap": plan.iter().map(|p| p.1).collect::<Vec<_>>(),
    });
    let mode = a.mode;
    let job: Job = Box::new(move |exec| {
        let results = exec.map(&plan, |(form, cap)| counting::smallest_solution(form, mode, Some(*cap)));
        let mut rows = Vec::new();
        for ((form, cap), res) in plan.iter().zip(results) {
            let sol = res?;
            let q = form.q();
            let [a1, a2, a3] = form.alpha();
            rows.push(row(json!({
                "q": q,
                "alpha1": a1,
                "alpha2": a2,
                "alpha3": a3,
                "mode": mode.to_string(),
                "height_cap": cap,
                "found": sol.is_some(),
                "x1": sol.map(|s| s.x[0]),
                "x2": sol.map(|s| s.x[1]),
                "x3": sol.map(|s| s.x[2]),
                "height": sol.map(|s| s.height),
                "sqrt_q_over_3": (q as f64 / 3.0).sqrt(),
                "q_pow_5_8": (q as f64).powf(0.625),
            })));
        }
        Ok(Outcome {
            rows,
            ..Default::default()
        })
    });
    Ok(Prepared {
        kind: "smallest",
        params,
        job,
    })
}

fn conjecture_row(r: &ConjectureReport, alpha_in: [u64; 3], reduction: Option<(u64, Verdict)>) -> Row {
    let betas = r.betas_f64();
    row(json!({
        "q": r.q,
        "alpha1": alpha_in[0],
        "alpha2": alpha_in[1],
        "alpha3": alpha_in[2],
        "epsilon": r.epsilon,
        "scan": match r.scan { diophantine::Scan::Full => "full", diophantine::Scan::Restricted => "fast" },
        "rhs": r.rhs_value,
        "floor_dominates": r.value == BoundValue::Floor,
        "inner_denominator": r.inner_denominator,
        "inner_max": r.inner_max,
        "argmax_r": r.argmax_r,
        "beta1": betas[0],
        "beta2": betas[1],
        "beta3": betas[2],
        "beta_numerators": r.beta_numerators.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "),
        "reduction_N": reduction.map(|(n, _)| n),
        "reduction": reduction.map(|(_, v)| match v { Verdict::Applies => "applies", Verdict::Inconclusive => "inconclusive" }),
    }))
}

fn conjecture(a: ConjectureArgs) -> Result<Prepared, Failure> {
    check_finite("epsilon", a.epsilon, false)?;
    let ms = moduli(&a.moduli)?;
    let alpha = [a.alpha1, a.alpha2, a.alpha3];
    for m in &ms {
        for (v, what) in alpha.iter().zip(["alpha1", "alpha2", "alpha3"]) {
            m.require_unit(what, *v)?;
        }
        if a.scan != ScanArg::Full && m.reduce(a.alpha1) != 1 {
            return Err(Failure::invalid(format!(
                "the fast scan needs alpha1 = 1 mod q, got alpha1 = {} for q = {}",
                a.alpha1,
                m.q()
            )));
        }
    }
    let params = json!({
        "q": qs(&ms),
        "alpha1": a.alpha1,
        "alpha2": a.alpha2,
        "alpha3": a.alpha3,
        "epsilon": a.epsilon,
        "scan": format!("{:?}", a.scan).to_lowercase(),
        "N": a.n,
    });
    let (eps, scan, n) = (a.epsilon, a.scan, a.n);
    let job: Job = Box::new(move |exec| {
        let mut rows = Vec::new();
        let mut failures = 0;
        for m in ms {
            let alpha_in = alpha.map(|x| m.reduce(x));
            let mut reports = Vec::new();
            if scan != ScanArg::Fast {
                reports.push(diophantine::conjecture_rhs_full(&m, alpha, eps, exec)?);
            }
            if scan != ScanArg::Full {
                reports.push(diophantine::conjecture_rhs_fast(&m, a.alpha2, a.alpha3, eps)?);
            }
            if reports.len() == 2 && reports[0].value != reports[1].value {
                failures += 1;
            }
            for r in &reports {
                let reduction = match n {
                    Some(n) => {
                        let h = diophantine::heuristic_reduction(&m, alpha, r.argmax_r, n)?;
                        Some((n, h.verdict))
                    }
                    None => None,
                };
                rows.push(conjecture_row(r, alpha_in, reduction));
            }
        }
        Ok(Outcome {
            rows,
            summary: None,
            failures,
        })
    });
    Ok(Prepared {
        kind: "conjecture",
        params,
        job,
    })
}

fn exceptional_count(a: ModuliArgs) -> Result<Prepared, Failure> {
    let ms = moduli(&a)?;
    let params = json!({"q": qs(&ms)});
    let job: Job = Box::new(move |exec| {
        let results = exec.map(&ms, diophantine::exceptional_alpha_count);
        let rows = ms
            .iter()
            .zip(results)
            .map(|(m, e)| {
                let q = m.q() as f64;
                row(json!({
                    "q": e.q,
                    "phi": m.phi(),
                    "count": e.count,
                    "fraction": e.count as f64 / m.phi() as f64,
                    "q_pow_2_3": q.powf(2.0 / 3.0),
                    "calibration_bound": 10.0 * q.powf(0.77),
                    "alphas": e.alphas.map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")),
                }))
            })
            .collect();
        Ok(Outcome {
            rows,
            ..Default::default()
        })
    });
    Ok(Prepared {
        kind: "exceptional-count",
        params,
        job,
    })
}

/// Largest `--max-c` accepted; the direct sums are quadratic in `c`.
const MAX_GAUSS_C: u64 = 2001;

fn gauss_audit(a: GaussAuditArgs) -> Result<Prepared, Failure> {
    if a.max_c == 0 || a.max_c > MAX_GAUSS_C {
        return Err(Error::OutOfRange {
            what: "max-c",
            value: a.max_c,
            limit: MAX_GAUSS_C,
        }
        .into());
    }
    let params = json!({"max_c": a.max_c, "tolerance": audit::GAUSS_TOLERANCE});
    let max_c = a.max_c;
    let job: Job = Box::new(move |exec| {
        let table = audit::gauss_audit(max_c, exec)?;
        let failures = table.iter().map(|r| r.failures).sum();
        let rows = table
            .iter()
            .map(|r| row(serde_json::to_value(r).expect("plain struct")))
            .collect();
        Ok(Outcome {
            rows,
            summary: Some(json!({"moduli": table.len(), "failures": failures})),
            failures,
        })
    });
    Ok(Prepared {
        kind: "gauss-audit",
        params,
        job,
    })
}

fn charsum_audit(a: CharsumArgs) -> Result<Prepared, Failure> {
    check_finite("epsilon", a.epsilon, false)?;
    if a.configs == 0 {
        return Err(Failure::invalid("configs must be positive"));
    }
    if a.hb_r < 3 {
        return Err(Failure::invalid(format!("hb-r must be at least 3, got {}", a.hb_r)));
    }
    let form = match a.form[..] {
        [fa, fb, fc] => BinaryForm { a: fa, b: fb, c: fc },
        _ => return Err(Failure::invalid("form needs exactly three coefficients a,b,c")),
    };
    let ms = moduli(&a.moduli)?;
    let params = json!({
        "q": qs(&ms),
        "configs": a.configs,
        "seed": a.seed,
        "epsilon": a.epsilon,
        "hb_r": a.hb_r,
        "form": [form.a, form.b, form.c],
    });
    let (configs, seed, eps, r) = (a.configs, a.seed, a.epsilon, a.hb_r);
    let job: Job = Box::new(move |exec| {
        let tables = exec.map(&ms, |m| -> Result<(Vec<Row>, Value, u64), Error> {
            let mut rows = Vec::new();
            let mut bad = 0u64;
            let mut check = |ratio: f64| {
                if !(ratio.is_finite() && ratio >= 0.0) {
                    bad += 1;
                }
            };
            for b in audit::burgess_table(m, configs, seed, eps)? {
                check(b.ratio);
                rows.push(row(json!({
                    "audit": "burgess",
                    "q": b.q,
                    "chi_index": b.chi_index,
                    "chi_order": b.chi_order,
                    "M": b.m,
                    "N": b.n,
                    "r": b.r,
                    "epsilon": b.epsilon,
                    "empirical": b.empirical,
                    "bound": b.bound,
                    "ratio": b.ratio,
                    "lindelof_bound": b.lindelof_bound,
                    "pv_max": b.polya_vinogradov_max,
                    "pv_bound": b.polya_vinogradov_bound,
                })));
            }
            let hb_status = if !m.is_squarefree() {
                "skipped: q is not squarefree".to_string()
            } else if !m.is_unit(form.discriminant()) {
                "skipped: discriminant shares a factor with q".to_string()
            } else {
                for h in audit::hb_table(m, form, configs, seed, r, eps)? {
                    if let Some(ratio) = h.ratio {
                        check(ratio);
                    }
                    rows.push(row(json!({
                        "audit": "heath-brown",
                        "q": h.q,
                        "chi_index": h.chi_index,
                        "conductor": h.conductor,
                        "center_x": h.center.0,
                        "center_y": h.center.1,
                        "radius": h.radius,
                        "r": h.r,
                        "epsilon": h.epsilon,
                        "points": h.points,
                        "empirical": h.empirical,
                        "bound": h.bound,
                        "ratio": h.ratio,
                        "regime": h.regime.to_string(),
                    })));
                }
                "ok".to_string()
            };
            Ok((
                rows,
                json!({"q": m.q(), "heath_brown": hb_status, "non_finite_ratios": bad}),
                bad,
            ))
        });
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        let mut failures = 0;
        for t in tables {
            let (r, s, bad) = t?;
            rows.extend(r);
            summary.push(s);
            failures += bad;
        }
        Ok(Outcome {
            rows,
            summary: Some(Value::Array(summary)),
            failures,
        })
    });
    Ok(Prepared {
        kind: "charsum-audit",
        params,
        job,
    })
}
