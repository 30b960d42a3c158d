//! Exact value of the integral that decides existence, for every case up to
//! a rank, plus the same integral under a different normalization of ĉ.
//!
//!     cargo run --example sign_integrals -- 6

use ke_cohom::catalog::{enumerate_cases, CaseSpec, Fiber};
use ke_cohom::ode::make_params;
use ke_cohom::quadrature::{build_g, g_zero_crossing, sign_integral};
use ke_cohom::rational::{rat, to_string};

fn main() -> ke_cohom::Result<()> {
    let max_rank = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(6);
    for case in enumerate_cases(max_rank) {
        let params = make_params(&case, None)?;
        let r = sign_integral(&params)?;
        println!(
            "{:<24} {:<8?} {:>14.6e}   changes sign at x = {}",
            case.label(),
            r.sign,
            r.approx,
            to_string(&g_zero_crossing(&params))
        );
    }

    // Rescaling ĉ moves V_ĉ but cannot change the sign.
    let case = CaseSpec::case4(Fiber::ProjectiveSpace);
    for c_hat in [rat(4, 1), rat(3, 1), rat(11, 2)] {
        let params = make_params(&case, Some(c_hat.clone()))?;
        let r = sign_integral(&params)?;
        println!(
            "{} with ĉ = {}: degree {} in u = √x, value {}/{}",
            case.label(),
            to_string(&c_hat),
            build_g(&params)?.degree().unwrap_or(0),
            r.value.numerator,
            r.value.denominator
        );
    }
    Ok(())
}
