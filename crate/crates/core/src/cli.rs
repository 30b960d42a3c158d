//! The work behind the `ke-cohom` binary: catalog listing, sign-integral
//! batches, single-case solves with full verification, and the existence
//! table. Every command returns a serializable document; rendering and file
//! output are separate so that the same data feeds JSON, text and tests.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{
    classify, enumerate_cases, AdmissibilityStatus, CaseSpec, Fiber, SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::metric::{
    chart_agreement, default_t_grid, reconstruct, verify_theorem42, ChartAgreement, MetricProfile,
    TheoremReport, TheoremTolerances,
};
use crate::ode::verify::{DecayReport, Lemma54Report, MonotonicityReport, ResidualReport};
use crate::ode::{
    make_params, monotonicity, random_pairs, residual, solve_bvp, verify_claim5_decay,
    verify_lemma54, OdeParams, SolutionProfile, SolverConfig, SolverMeta,
};
use crate::quadrature::{sign_integral, Sign};
use crate::rational::{self, ExactValue};
use crate::roots::kappa_ratios;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConditionDViolated(_) | Error::Excluded(_) => EXIT_REFUSED,
        Error::NoBracket(_)
        | Error::NotConverged(_)
        | Error::StepUnderflow { .. }
        | Error::Domain(_) => EXIT_SOLVER,
        _ => EXIT_ERROR,
    }
}

/// Everything a solve needs. Loaded from an optional TOML file, then
/// overridden by command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case_id: Option<u8>,
    pub rank: Option<u32>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    /// `Q` or `CP`
    pub fiber: Option<String>,
    /// Rational override of ĉ, e.g. `"7/2"`.
    pub c_hat: Option<String>,
    pub force: bool,
    pub out_dir: PathBuf,
    /// Thin the metric grid to about this many points, keeping the
    /// near-origin run and the last three decades of `1-θ` whole.
    pub metric_points: Option<usize>,
    /// Grid pairs sampled for the two-sided slope bound.
    pub lemma_pairs: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub theorem: TheoremTolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case_id: None,
            rank: None,
            p: None,
            q: None,
            fiber: None,
            c_hat: None,
            force: false,
            out_dir: PathBuf::from("out"),
            metric_points: None,
            lemma_pairs: 100,
            seed: 54,
            solver: SolverConfig::default(),
            theorem: TheoremTolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        let t = &self.theorem;
        for (name, v) in [
            ("origin_tol", t.origin_tol),
            ("limit_tol", t.limit_tol),
            ("stability_rel", t.stability_rel),
            ("vanish_slope", t.vanish_slope),
            ("noise_margin", t.noise_margin),
            ("residual_tol", t.residual_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.metric_points == Some(0) {
            return Err(Error::Config("metric_points must be positive".into()));
        }
        Ok(())
    }

    fn fiber(&self) -> Result<Option<Fiber>> {
        self.fiber.as_deref().map(str::parse).transpose()
    }

    /// The selected case.
    pub fn case(&self) -> Result<CaseSpec> {
        let id = self
            .case_id
            .ok_or_else(|| Error::Config("no case selected (--case)".into()))?;
        let need = |v: Option<u32>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("case {id} needs --{name}")))
        };
        let fiber = self.fiber()?;
        let need_fiber = || fiber.ok_or_else(|| Error::Config(format!("case {id} needs --fiber")));
        match id {
            1 => CaseSpec::case1(need(self.rank, "rank")?, need_fiber()?),
            2 => CaseSpec::case2(need(self.p, "p")?, need(self.q, "q")?),
            3 => CaseSpec::case3(need(self.rank, "rank")?),
            4 => Ok(CaseSpec::case4(need_fiber()?)),
            5 => Ok(CaseSpec::case5(need_fiber()?)),
            _ => Err(Error::InvalidCase(format!("case {id} (expected 1..=5)"))),
        }
    }

    pub fn c_hat(&self) -> Result<Option<BigRational>> {
        self.c_hat
            .as_deref()
            .map(|s| {
                rational::parse(s)
                    .ok_or_else(|| Error::Config(format!("c_hat {s:?} is not a rational")))
            })
            .transpose()
    }
}

/// File-name stem for a case, e.g. `case1_l2_Q`.
pub fn slug(case: &CaseSpec) -> String {
    let params = match (case.case_id, case.rank_params.as_slice()) {
        (2, [p, q]) => format!("_p{p}_q{q}"),
        (1 | 3, [l]) => format!("_l{l}"),
        _ => String::new(),
    };
    format!("case{}{}_{}", case.case_id, params, case.fiber.short_name())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaEntry {
    #[serde(with = "rational::as_string")]
    pub value: BigRational,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub label: String,
    pub case_id: u8,
    pub rank_params: Vec<u32>,
    pub fiber: String,
    pub group: String,
    pub n_f: u32,
    pub epsilon_f: u32,
    #[serde(with = "rational::as_string")]
    pub theta_d_norm_sq: BigRational,
    /// Positive ratios with their multiplicities; each also occurs negated.
    pub kappa: Vec<KappaEntry>,
    pub condition_d: bool,
    pub status: AdmissibilityStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogTable {
    pub schema_version: u32,
    pub max_rank: u32,
    pub rows: Vec<CatalogRow>,
}

pub fn cmd_catalog(max_rank: u32) -> Result<CatalogTable> {
    let rows = enumerate_cases(max_rank)
        .iter()
        .map(|case| {
            let rep = kappa_ratios(case)?;
            let adm = classify(case);
            Ok(CatalogRow {
                label: case.label(),
                case_id: case.case_id,
                rank_params: case.rank_params.clone(),
                fiber: case.fiber.short_name().into(),
                group: case.group_name(),
                n_f: case.n_f,
                epsilon_f: case.epsilon_f,
                theta_d_norm_sq: rep.theta_d_norm_sq.clone(),
                kappa: rep
                    .positive_half()
                    .into_iter()
                    .map(|k| KappaEntry {
                        value: k.value,
                        multiplicity: k.multiplicity,
                    })
                    .collect(),
                condition_d: rep.condition_d,
                status: adm.status,
                detail: adm.detail,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CatalogTable {
        schema_version: SCHEMA_VERSION,
        max_rank,
        rows,
    })
}

pub fn render_catalog(t: &CatalogTable) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22} {:<14} {:>3} {:>3}  {:<28} {:<5} status",
        "case", "group", "N_F", "eps", "kappa", "cond_d"
    );
    for r in &t.rows {
        let kappa: Vec<String> = r
            .kappa
            .iter()
            .map(|k| format!("±{} x{}", rational::to_string(&k.value), k.multiplicity))
            .collect();
        let _ = writeln!(
            s,
            "{:<22} {:<14} {:>3} {:>3}  {:<28} {:<5} {:?} ({})",
            r.label,
            r.group,
            r.n_f,
            r.epsilon_f,
            kappa.join(", "),
            r.condition_d,
            r.status,
            r.detail
        );
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignRow {
    pub label: String,
    pub case_id: u8,
    pub rank_params: Vec<u32>,
    pub fiber: String,
    #[serde(with = "rational::as_string")]
    pub c_hat: BigRational,
    pub value: ExactValue,
    pub sign: Sign,
    pub approx: f64,
    pub integrand_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignTable {
    pub schema_version: u32,
    pub rows: Vec<SignRow>,
}

/// Exact sign integrals of `cases`, computed in parallel and returned in
/// input order.
pub fn cmd_signtest(cases: &[CaseSpec], c_hat: Option<&BigRational>) -> Result<SignTable> {
    let rows = cases
        .par_iter()
        .map(|case| {
            let params = make_params(case, c_hat.cloned())?;
            let r = sign_integral(&params)?;
            Ok(SignRow {
                label: case.label(),
                case_id: case.case_id,
                rank_params: case.rank_params.clone(),
                fiber: case.fiber.short_name().into(),
                c_hat: params.c_hat.clone(),
                value: r.value,
                sign: r.sign,
                approx: r.approx,
                integrand_degree: r.integrand_degree,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignTable {
        schema_version: SCHEMA_VERSION,
        rows,
    })
}

pub fn render_signtest(t: &SignTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<22} {:<9} {:>14}  exact", "case", "sign", "approx");
    for r in &t.rows {
        let _ = writeln!(
            s,
            "{:<22} {:<9} {:>14.6e}  {}/{}",
            r.label,
            format!("{:?}", r.sign),
            r.approx,
            r.value.numerator,
            r.value.denominator
        );
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub case: String,
    pub params: OdeParams,
    pub v1: f64,
    #[serde(rename = "V_dot_at_1")]
    pub v_dot_at_1: f64,
    pub grid_points: usize,
    pub solver_meta: SolverMeta,
    pub residual: ResidualReport,
    pub monotonicity: MonotonicityReport,
    pub lemma54: Lemma54Report,
    pub decay: DecayReport,
    pub theorem: TheoremReport,
    pub chart_agreement: ChartAgreement,
    pub all_pass: bool,
}

#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub report: SolveReport,
    pub profile: SolutionProfile,
    pub metric: MetricProfile,
    pub files: Vec<PathBuf>,
}

fn thin(grid: Vec<f64>, target: usize, keep_head: usize) -> Vec<f64> {
    if grid.len() <= target {
        return grid;
    }
    let stride = grid.len().div_ceil(target);
    let last = grid.len() - 1;
    grid.into_iter()
        .enumerate()
        .filter(|&(i, _)| i < keep_head || i % stride == 0 || i == last)
        .map(|(_, t)| t)
        .collect()
}

/// Solve and verify one profile without writing anything.
pub fn solve_and_verify(cfg: &RunConfig) -> Result<SolveOutput> {
    cfg.validate()?;
    let case = cfg.case()?;
    let params = make_params(&case, cfg.c_hat()?)?;
    if !cfg.force {
        if !params.condition_d {
            return Err(Error::ConditionDViolated(format!(
                "{case}: some ratio bound fails; pass --force to attempt a solve anyway"
            )));
        }
        let sign = sign_integral(&params)?.sign;
        if sign != Sign::Negative {
            return Err(Error::Excluded(format!(
                "{case}: the sign integral is {sign:?}, so no solution exists; pass --force to attempt a solve anyway"
            )));
        }
    }
    let profile = solve_bvp(&params, &cfg.solver, cfg.force)?;

    let res = residual(&profile);
    let mono = monotonicity(&profile);
    let lemma = verify_lemma54(
        &profile,
        &random_pairs(cfg.lemma_pairs, profile.len(), cfg.seed),
    );
    let decay = verify_claim5_decay(&profile, 0.1);
    let mut grid = default_t_grid(&profile);
    if let Some(n) = cfg.metric_points {
        let head = grid.iter().take_while(|&&t| t < 1e-3).count().max(4);
        // keep the near-origin run and the whole last decade for the limits
        let u_cut = 1e3 * profile.one_minus_theta.last().copied().unwrap_or(0.0);
        let tail_from = profile
            .one_minus_theta
            .iter()
            .position(|&u| u <= u_cut)
            .unwrap_or(profile.len());
        let split = grid.len() - (profile.len() - tail_from);
        let tail = grid.split_off(split);
        grid = thin(grid, n, head);
        grid.extend(tail);
    }
    let metric = reconstruct(&profile, &grid)?;
    let theorem = verify_theorem42(&metric, &cfg.theorem)?;
    let agreement = chart_agreement(&profile, 10.0, 1e-12)?;

    let all_pass = res.max <= cfg.solver.residual_tol
        && mono.strictly_increasing
        && mono.positive_slope
        && mono.inside_range
        && lemma.violations == 0
        && decay.bounded
        && theorem.all_pass
        && agreement.agreeing == agreement.points;
    let report = SolveReport {
        schema_version: SCHEMA_VERSION,
        case: case.to_string(),
        params: params.clone(),
        v1: profile.v1,
        v_dot_at_1: profile.v_dot_at_1,
        grid_points: profile.len(),
        solver_meta: profile.solver_meta.clone(),
        residual: res,
        monotonicity: mono,
        lemma54: lemma,
        decay,
        theorem,
        chart_agreement: agreement,
        all_pass,
    };
    Ok(SolveOutput {
        report,
        profile,
        metric,
        files: vec![],
    })
}

/// Solve, verify and write the profile, metric and report under `out_dir`.
pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveOutput> {
    let mut out = solve_and_verify(cfg)?;
    let case = cfg.case()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let stem = slug(&case);
    let path = |suffix: &str| cfg.out_dir.join(format!("{stem}_{suffix}"));
    out.profile.write_csv(&path("profile.csv"))?;
    out.profile.write_json(&path("profile.json"))?;
    out.metric.write_csv(&path("metric.csv"))?;
    out.metric.write_json(&path("metric.json"))?;
    write_json(&path("report.json"), &out.report)?;
    out.files = [
        "profile.csv",
        "profile.json",
        "metric.csv",
        "metric.json",
        "report.json",
    ]
    .iter()
    .map(|s| path(s))
    .collect();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExistenceRow {
    pub label: String,
    pub group: String,
    pub fiber: String,
    pub n_f: u32,
    pub epsilon_f: u32,
    pub condition_d: bool,
    pub integral: ExactValue,
    pub sign: Sign,
    /// Verdict from the computed evidence.
    pub computed: AdmissibilityStatus,
    /// Verdict from the exception list of the existence theorem.
    pub tabulated: AdmissibilityStatus,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExistenceTable {
    pub schema_version: u32,
    pub max_rank: u32,
    pub rows: Vec<ExistenceRow>,
    pub all_agree: bool,
}

/// Verdict from evidence: the ratio bound first, then the sign of the
/// integral.
pub fn computed_status(condition_d: bool, sign: Sign) -> AdmissibilityStatus {
    if !condition_d {
        AdmissibilityStatus::ExcludedConditionD
    } else if sign != Sign::Negative {
        AdmissibilityStatus::ExcludedPositiveIntegral
    } else {
        AdmissibilityStatus::ProvenKE
    }
}

pub fn cmd_report(max_rank: u32) -> Result<ExistenceTable> {
    let cases = enumerate_cases(max_rank);
    let rows = cases
        .par_iter()
        .map(|case| {
            let params = make_params(case, None)?;
            let integral = sign_integral(&params)?;
            let computed = computed_status(params.condition_d, integral.sign);
            let tabulated = classify(case).status;
            Ok(ExistenceRow {
                label: case.label(),
                group: case.group_name(),
                fiber: case.fiber_name(),
                n_f: case.n_f,
                epsilon_f: case.epsilon_f,
                condition_d: params.condition_d,
                integral: integral.value,
                sign: integral.sign,
                computed,
                tabulated,
                agrees: computed == tabulated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_agree = rows.iter().all(|r| r.agrees);
    Ok(ExistenceTable {
        schema_version: SCHEMA_VERSION,
        max_rank,
        rows,
        all_agree,
    })
}

pub fn render_report_markdown(t: &ExistenceTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Existence table (ranks up to {})\n", t.max_rank);
    let _ = writeln!(s, "| case | group | fiber | N_F | eps_F | cond. d | integral sign | verdict | matches theorem |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|---|");
    for r in &t.rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {:?} | {:?} | {} |",
            r.label,
            r.group,
            r.fiber,
            r.n_f,
            r.epsilon_f,
            if r.condition_d { "yes" } else { "no" },
            r.sign,
            r.computed,
            if r.agrees { "yes" } else { "NO" }
        );
    }
    let excluded: Vec<&str> = t
        .rows
        .iter()
        .filter(|r| r.computed != AdmissibilityStatus::ProvenKE)
        .map(|r| r.label.as_str())
        .collect();
    let _ = writeln!(
        s,
        "\nExcluded: {}",
        if excluded.is_empty() {
            "none".into()
        } else {
            excluded.join("; ")
        }
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(
            exit_code(&Error::ConditionDViolated(String::new())),
            EXIT_REFUSED
        );
        assert_eq!(exit_code(&Error::Excluded(String::new())), EXIT_REFUSED);
        assert_eq!(exit_code(&Error::NoBracket(String::new())), EXIT_SOLVER);
        assert_eq!(exit_code(&Error::Config(String::new())), EXIT_ERROR);
    }

    #[test]
    fn case_selection() {
        let cfg = RunConfig {
            case_id: Some(2),
            p: Some(3),
            q: Some(1),
            ..Default::default()
        };
        assert_eq!(cfg.case().unwrap(), CaseSpec::case2(3, 1).unwrap());
        let cfg = RunConfig {
            case_id: Some(1),
            rank: Some(2),
            ..Default::default()
        };
        assert!(matches!(cfg.case(), Err(Error::Config(_))));
        let cfg = RunConfig {
            case_id: Some(4),
            fiber: Some("cp".into()),
            ..Default::default()
        };
        assert_eq!(slug(&cfg.case().unwrap()), "case4_CP");
        let cfg = RunConfig {
            case_id: Some(9),
            ..Default::default()
        };
        assert!(cfg.case().is_err());
    }

    #[test]
    fn config_from_toml() {
        let cfg: RunConfig = toml::from_str(
            r#"
            case_id = 1
            rank = 3
            fiber = "CP"
            c_hat = "9/2"
            [solver]
            boundary_tol = 1e-5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.solver.boundary_tol, 1e-5);
        assert_eq!(cfg.solver.hit_tol, SolverConfig::default().hit_tol);
        assert_eq!(cfg.c_hat().unwrap(), Some(rational::rat(9, 2)));
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }

    #[test]
    fn validation_rejects_bad_tolerances() {
        let mut cfg = RunConfig::default();
        cfg.theorem.limit_tol = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.solver.theta_switch = 1e-9;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn thinning_keeps_ends() {
        let g: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let t = thin(g, 10, 3);
        assert_eq!(&t[..3], &[0.0, 1.0, 2.0]);
        assert_eq!(*t.last().unwrap(), 99.0);
        assert!(t.len() <= 14);
    }

    #[test]
    fn empty_catalog_and_report() {
        assert!(cmd_catalog(0).unwrap().rows.is_empty());
        let r = cmd_report(0).unwrap();
        assert!(r.rows.is_empty() && r.all_agree);
    }
}
