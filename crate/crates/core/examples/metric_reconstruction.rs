//! Rebuilds the metric coefficient f(t) from a solved profile and runs the
//! smooth-extension and asymptotic checks.
//!
//!     cargo run --release --example metric_reconstruction -- 3

use ke_cohom::catalog::{CaseSpec, Fiber};
use ke_cohom::metric::{
    chart_agreement, default_t_grid, einstein_residual_t, potential_lambda, reconstruct,
    verify_theorem42, TheoremTolerances,
};
use ke_cohom::ode::{make_params, solve_bvp, SolverConfig};

fn main() -> ke_cohom::Result<()> {
    let case = match std::env::args().nth(1).as_deref() {
        Some("3") => CaseSpec::case3(4)?,
        Some("4") => CaseSpec::case4(Fiber::ProjectiveSpace),
        _ => CaseSpec::case1(3, Fiber::ProjectiveSpace)?,
    };
    let profile = solve_bvp(&make_params(&case, None)?, &SolverConfig::default(), false)?;
    let metric = reconstruct(&profile, &default_t_grid(&profile))?;
    println!(
        "{case}: {} points up to t = {:.2}",
        metric.len(),
        metric.t_grid.last().unwrap()
    );
    for k in [0, metric.len() / 4, metric.len() / 2, metric.len() - 1] {
        println!(
            "  t = {:<10.4e} f = {:.10}  f' = {:.4e}  f'' = {:.4e}",
            metric.t_grid[k], metric.f[k], metric.f_prime[k], metric.f_second[k]
        );
    }

    let report = verify_theorem42(&metric, &TheoremTolerances::default())?;
    for c in &report.checks {
        println!(
            "  {:<28} {:<5} {:.3e}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.measured
        );
    }
    println!(
        "  C1 = {:.6} (√v1 = {:.6}), C2 = {:.6}",
        report.c1, report.c1_displayed, report.c2
    );
    println!("  C3 = {:.6}, C4 = {:.6}", report.c3, report.c4);

    let t_res = einstein_residual_t(&metric)?;
    println!(
        "  Einstein residual in t: {:.2e} at t = {:.4}",
        t_res.max, t_res.t_at_max
    );
    let agree = chart_agreement(&profile, 10.0, 1e-12)?;
    println!(
        "  charts agree at {}/{} points (worst ratio {:.4})",
        agree.agreeing, agree.points, agree.worst_ratio
    );
    for t in [0.5, 2.0, 8.0] {
        println!("  Λ({t}) = {:.8}", potential_lambda(&profile, t)?);
    }
    Ok(())
}
