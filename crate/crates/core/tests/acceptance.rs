//! Acceptance run: one line per criterion, exit status nonzero if any
//! attainable criterion fails. Run with `cargo test --test acceptance`.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ke_cohom::catalog::{enumerate_cases, AdmissibilityStatus, CaseSpec, Fiber};
use ke_cohom::cli::{self, RunConfig};
use ke_cohom::metric::{
    chart_agreement, default_t_grid, reconstruct, verify_theorem42, TheoremTolerances,
};
use ke_cohom::ode::{
    make_params, monotonicity, random_pairs, residual, solve_bvp, verify_lemma54, SolutionProfile,
    SolverConfig,
};
use ke_cohom::quadrature::{sign_integral, Sign};
use ke_cohom::rational::{int, to_f64};
use ke_cohom::roots::kappa_ratios;
use ke_cohom::Error;
use num_rational::BigRational;

struct Outcome {
    passed: bool,
    detail: String,
    /// Fails for a documented reason and does not fail the run.
    known_failure: bool,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Outcome {
            passed,
            detail,
            known_failure: false,
        }
    }
}

fn kappa_set(case: &CaseSpec) -> BTreeSet<BigRational> {
    kappa_ratios(case)
        .unwrap()
        .kappa_values
        .into_iter()
        .map(|k| k.value)
        .collect()
}

fn pm(vals: &[i64]) -> BTreeSet<BigRational> {
    vals.iter().flat_map(|&v| [int(v), int(-v)]).collect()
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for l in 2..=30 {
        for fiber in [Fiber::Quadric, Fiber::ProjectiveSpace] {
            let c = CaseSpec::case1(l, fiber).unwrap();
            if kappa_set(&c) != pm(&[2 * (l as i64 + 1)]) {
                bad.push(c.label());
            }
        }
    }
    for p in 1..=15u32 {
        for q in 1..=15u32 {
            if p + q <= 2 {
                continue;
            }
            let c = CaseSpec::case2(p, q).unwrap();
            if kappa_set(&c) != pm(&[2 * (p as i64 + 1), 2 * (q as i64 + 1)]) {
                bad.push(c.label());
            }
        }
    }
    for l in 4..=20 {
        let c = CaseSpec::case3(l).unwrap();
        if kappa_set(&c) != pm(&[2 * (l as i64 + 3)]) {
            bad.push(c.label());
        }
    }
    for fiber in [Fiber::Quadric, Fiber::ProjectiveSpace] {
        let c = CaseSpec::case4(fiber);
        if kappa_set(&c) != pm(&[16]) {
            bad.push(c.label());
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        bad.is_empty() && elapsed < Duration::from_secs(1),
        format!("{} mismatches, {:.3} s", bad.len(), elapsed.as_secs_f64()),
    )
}

fn criterion2() -> Outcome {
    let start = Instant::now();
    let mut cases: Vec<(CaseSpec, Sign)> = Vec::new();
    for l in 2..=30 {
        cases.push((CaseSpec::case1(l, Fiber::Quadric).unwrap(), Sign::Negative));
        if l >= 3 {
            cases.push((
                CaseSpec::case1(l, Fiber::ProjectiveSpace).unwrap(),
                Sign::Negative,
            ));
        }
    }
    for p in 2..=15 {
        for q in 2..=15 {
            cases.push((CaseSpec::case2(p, q).unwrap(), Sign::Negative));
        }
    }
    for l in 4..=20 {
        cases.push((CaseSpec::case3(l).unwrap(), Sign::Negative));
    }
    cases.push((CaseSpec::case4(Fiber::ProjectiveSpace), Sign::Negative));
    cases.push((CaseSpec::case5(Fiber::ProjectiveSpace), Sign::Negative));
    cases.push((CaseSpec::case4(Fiber::Quadric), Sign::Positive));
    cases.push((CaseSpec::case5(Fiber::Quadric), Sign::Positive));
    let specs: Vec<CaseSpec> = cases.iter().map(|c| c.0.clone()).collect();
    let table = cli::cmd_signtest(&specs, None).unwrap();
    let bad: Vec<&str> = table
        .rows
        .iter()
        .zip(&cases)
        .filter(|(r, c)| r.sign != c.1)
        .map(|(r, _)| r.label.as_str())
        .collect();
    let elapsed = start.elapsed();
    Outcome::new(
        bad.is_empty() && elapsed < Duration::from_secs(30),
        format!(
            "{} integrals, {} wrong signs {:?}, {:.2} s",
            cases.len(),
            bad.len(),
            bad,
            elapsed.as_secs_f64()
        ),
    )
}

/// Adaptive 7/15-point Gauss-Kronrod.
fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    const XK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = WK[7] * f(c);
    let mut g = WG[3] * f(c);
    for i in 0..7 {
        let pair = f(c - h * XK[i]) + f(c + h * XK[i]);
        k += WK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    let (k, g) = (k * h, g * h);
    if (k - g).abs() <= tol || depth == 0 {
        return k;
    }
    gauss_kronrod(f, a, c, tol / 2.0, depth - 1) + gauss_kronrod(f, c, b, tol / 2.0, depth - 1)
}

fn criterion3() -> Outcome {
    // The fixed-size integrals as printed, prefactors included.
    type Integrand = Box<dyn Fn(f64) -> f64>;
    let table: Vec<(CaseSpec, f64, Integrand)> = vec![
        (
            CaseSpec::case1(3, Fiber::Quadric).unwrap(),
            1.0 / 16.0,
            Box::new(|x: f64| (16.0 - 4.0 * x).powi(2) * (1.0 - 2.0 * x.sqrt())),
        ),
        (
            CaseSpec::case4(Fiber::ProjectiveSpace),
            1.0,
            Box::new(|x: f64| x.powf(2.5) * (4.0 - x).powi(4) * (3.0 - 4.0 * x.sqrt())),
        ),
        (
            CaseSpec::case4(Fiber::Quadric),
            7f64.powi(-8),
            Box::new(|x: f64| x.powf(2.5) * (256.0 - 49.0 * x).powi(4) * (6.0 - 7.0 * x.sqrt())),
        ),
        (
            CaseSpec::case5(Fiber::Quadric),
            1.0,
            Box::new(|x: f64| x.powf(3.5) * (64.0 / 9.0 - x).powi(8) * (8.0 - 9.0 * x.sqrt())),
        ),
        (
            CaseSpec::case5(Fiber::ProjectiveSpace),
            1.0,
            Box::new(|x: f64| x.powf(3.5) * (144.0 / 25.0 - x).powi(8) * (4.0 - 5.0 * x.sqrt())),
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (case, prefactor, g) in &table {
        let exact = to_f64(
            &sign_integral(&make_params(case, None).unwrap())
                .unwrap()
                .value
                .to_rational()
                .unwrap(),
        );
        let scale = gauss_kronrod(&|x| g(x).abs(), 0.0, 1.0, 1e-6, 30);
        let numeric = prefactor * gauss_kronrod(g.as_ref(), 0.0, 1.0, 1e-15 * scale, 50);
        let rel = (numeric - exact).abs() / exact.abs();
        worst = worst.max(rel);
        parts.push(format!("{} {:.3e}", case.label(), rel));
    }
    Outcome::new(
        worst < 5e-11,
        format!(
            "worst relative difference {worst:.2e} ({})",
            parts.join(", ")
        ),
    )
}

fn acceptance_cases() -> Vec<CaseSpec> {
    vec![
        CaseSpec::case1(2, Fiber::Quadric).unwrap(),
        CaseSpec::case1(3, Fiber::ProjectiveSpace).unwrap(),
        CaseSpec::case3(4).unwrap(),
        CaseSpec::case4(Fiber::ProjectiveSpace),
    ]
}

fn criterion4(solved: &mut Vec<(CaseSpec, SolutionProfile)>) -> Outcome {
    let cfg = SolverConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for case in acceptance_cases() {
        let start = Instant::now();
        let params = make_params(&case, None).unwrap();
        let profile = match solve_bvp(&params, &cfg, false) {
            Ok(p) => p,
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {e}", case.label()));
                continue;
            }
        };
        let elapsed = start.elapsed();
        let res = residual(&profile);
        let mono = monotonicity(&profile);
        let lemma = verify_lemma54(&profile, &random_pairs(100, profile.len(), 54));
        let v_ceiling = profile.float_params().v_ceiling;
        let end_gap = (profile.v.last().unwrap() - v_ceiling).abs();
        let pass = res.max <= 1e-7
            && mono.strictly_increasing
            && mono.positive_slope
            && lemma.pairs == 100
            && lemma.violations == 0
            && end_gap <= 1e-6
            && elapsed < Duration::from_secs(60);
        ok &= pass;
        parts.push(format!(
            "{}: residual {:.1e}, lemma margin {:.1e}, |V_end - V_c| {:.1e}, {:.2} s",
            case.label(),
            res.max,
            lemma.worst_margin,
            end_gap,
            elapsed.as_secs_f64()
        ));
        solved.push((case, profile));
    }
    Outcome::new(ok && solved.len() == 4, parts.join("; "))
}

fn criterion5(solved: &[(CaseSpec, SolutionProfile)]) -> Outcome {
    let tol = TheoremTolerances::default();
    let mut all_checks = true;
    let mut literal = true;
    let mut parts = Vec::new();
    for (case, profile) in solved {
        let metric = reconstruct(profile, &default_t_grid(profile)).unwrap();
        let report = verify_theorem42(&metric, &tol).unwrap();
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        all_checks &= report.all_pass;
        let near = reconstruct(profile, &[1e-4]).unwrap();
        let (f, f2) = (near.f[0], near.f_second[0]);
        literal &= f.abs() < tol.origin_tol && f2.abs() < tol.origin_tol;
        parts.push(format!(
            "{}: C1 {:.4}, C3 {:.4}, failed checks {:?}, f(1e-4) {:.2e}, f''(1e-4) {:.2e}",
            case.label(),
            report.c1,
            report.c3,
            failed,
            f,
            f2
        ));
    }
    let detail = format!(
        "all checks with limits at t -> 0: {}; literal |f|, |f''| < 1e-5 at t = 1e-4: {} [{}]",
        if all_checks { "pass" } else { "FAIL" },
        if literal { "pass" } else { "FAIL" },
        parts.join("; ")
    );
    // f ~ C1 t near the origin, so |f(1e-4)| < 1e-5 needs C1 < 0.1; no
    // solved case has that. Everything else must pass.
    Outcome {
        passed: all_checks && literal,
        detail,
        known_failure: all_checks && !literal,
    }
}

fn criterion6(solved: &[(CaseSpec, SolutionProfile)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (case, profile) in solved {
        let a = chart_agreement(profile, 10.0, 1e-12).unwrap();
        ok &= a.points > 0 && a.agreeing == a.points;
        parts.push(format!(
            "{}: {}/{} within 10x, worst ratio {:.4}",
            case.label(),
            a.agreeing,
            a.points,
            a.worst_ratio
        ));
    }
    Outcome::new(ok, parts.join("; "))
}

fn criterion7() -> Outcome {
    let refuse = |cfg: RunConfig| {
        matches!(
            cli::solve_and_verify(&cfg),
            Err(Error::ConditionDViolated(_))
        )
    };
    let r1 = refuse(RunConfig {
        case_id: Some(2),
        p: Some(3),
        q: Some(1),
        ..Default::default()
    });
    let r2 = refuse(RunConfig {
        case_id: Some(1),
        rank: Some(2),
        fiber: Some("CP".into()),
        ..Default::default()
    });

    // The four exception families of the existence theorem.
    let family = |c: &CaseSpec| -> Option<usize> {
        match (c.case_id, c.rank_params.as_slice(), c.fiber) {
            (1, [2], Fiber::ProjectiveSpace) => Some(0),
            (2, [p, q], _) if *p == 1 || *q == 1 => Some(1),
            (4, _, Fiber::Quadric) => Some(2),
            (5, _, Fiber::Quadric) => Some(3),
            _ => None,
        }
    };
    let max_rank = 6;
    let table = cli::cmd_report(max_rank).unwrap();
    let cases = enumerate_cases(max_rank);
    let mut hit = [false; 4];
    let mut wrong = Vec::new();
    for (row, case) in table.rows.iter().zip(&cases) {
        let excluded = row.computed != AdmissibilityStatus::ProvenKE;
        match (family(case), excluded) {
            (Some(k), true) => hit[k] = true,
            (None, false) => {}
            _ => wrong.push(row.label.clone()),
        }
    }
    Outcome::new(
        r1 && r2 && wrong.is_empty() && hit.iter().all(|&h| h) && table.all_agree,
        format!(
            "refuses case 2 (3,1): {r1}, case 1 l=2 CP: {r2}; families marked {hit:?}; misclassified {wrong:?}"
        ),
    )
}

fn criterion8() -> Outcome {
    let params = make_params(&CaseSpec::case1(2, Fiber::Quadric).unwrap(), None).unwrap();
    let base = SolverConfig::default();
    let a = solve_bvp(&params, &base, false).unwrap();
    let b = solve_bvp(&params, &base.tightened(2.0), false).unwrap();
    let d0 = ((a.v1 - b.v1) / b.v1).abs();
    let d1 = ((a.v_dot_at_1 - b.v_dot_at_1) / b.v_dot_at_1).abs();
    Outcome::new(
        d0 < 1e-4 && d1 < 1e-4,
        format!("relative change of V'(0) {d0:.2e}, of V'(1) {d1:.2e}"),
    )
}

fn main() -> ExitCode {
    let mut solved = Vec::new();
    let results = [
        ("1 kappa column", criterion1()),
        ("2 sign table", criterion2()),
        ("3 exact vs float", criterion3()),
        ("4 boundary value solves", criterion4(&mut solved)),
        ("5 metric extension", criterion5(&solved)),
        ("6 chart agreement", criterion6(&solved)),
        ("7 exclusions", criterion7()),
        ("8 grid refinement", criterion8()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        let status = match (o.passed, o.known_failure) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                failed += 1;
                "FAIL"
            }
        };
        println!("criterion {name:<26} {status:<12} {}", o.detail);
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
