//! Lie data of every admissible case: the ratio column, the norm of θ_D and
//! whether the ratio bound holds.
//!
//!     cargo run --example ratio_column -- 4

use ke_cohom::catalog::enumerate_cases;
use ke_cohom::rational::to_string;
use ke_cohom::roots::kappa_ratios;

fn main() -> ke_cohom::Result<()> {
    let max_rank = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    for case in enumerate_cases(max_rank) {
        let rep = kappa_ratios(&case)?;
        let column: Vec<String> = rep
            .positive_half()
            .iter()
            .map(|k| format!("±{} (x{})", to_string(&k.value), k.multiplicity))
            .collect();
        println!(
            "{:<24} |θ_D|² = {:<4} roots = {:<3} bound {}  {}",
            case.label(),
            to_string(&rep.theta_d_norm_sq),
            rep.root_count(),
            if rep.condition_d { "holds " } else { "fails " },
            column.join(", ")
        );
    }
    Ok(())
}
