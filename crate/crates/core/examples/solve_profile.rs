//! Shooting solve of the boundary value problem on the smallest case
//! (case 1, ℓ = 2, quadric fiber) and the checks on the profile.
//!
//!     cargo run --release --example solve_profile

use ke_cohom::catalog::{CaseSpec, Fiber};
use ke_cohom::ode::{
    make_params, monotonicity, random_pairs, residual, solve_bvp, verify_claim5_decay,
    verify_lemma54, SolverConfig,
};

fn main() -> ke_cohom::Result<()> {
    let case = CaseSpec::case1(2, Fiber::Quadric)?;
    let params = make_params(&case, None)?;
    let profile = solve_bvp(&params, &SolverConfig::default(), false)?;
    let meta = &profile.solver_meta;
    println!("{case}");
    println!(
        "  V'(0) = {:.15}   V'(1) = {:.12}",
        profile.v1, profile.v_dot_at_1
    );
    println!(
        "  {} trajectories, bracket width {:.1e}, {} grid points ({} in the tail chart)",
        meta.iterations,
        meta.bracket_width,
        profile.len(),
        profile.len() - profile.tail_start
    );
    let res = residual(&profile);
    println!("  residual {:.2e} at θ = {:.6}", res.max, res.theta_at_max);
    let mono = monotonicity(&profile);
    println!(
        "  increasing {}, min V' = {:.4}",
        mono.strictly_increasing, mono.min_v_dot
    );
    let lemma = verify_lemma54(&profile, &random_pairs(1000, profile.len(), 7));
    println!(
        "  slope bound: {} violations in {} pairs, margin {:.2e}",
        lemma.violations, lemma.pairs, lemma.worst_margin
    );
    let decay = verify_claim5_decay(&profile, 0.1);
    println!("  log-log slope of V' near θ = 1: {:.4}", decay.slope);

    for theta in [0.1, 0.5, 0.9, 0.999] {
        let jet = profile.interpolator().jet(theta, 1.0 - theta)?;
        println!("  θ = {theta:<6} V = {:.10}  V' = {:.10}", jet.v, jet.v_dot);
    }
    Ok(())
}
