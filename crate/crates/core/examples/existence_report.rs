//! The existence table as markdown: verdicts computed from the ratio bound
//! and the sign integral, next to the theorem's exception list.
//!
//!     cargo run --example existence_report -- 8

use ke_cohom::cli::{cmd_report, render_report_markdown};

fn main() -> ke_cohom::Result<()> {
    let max_rank = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(6);
    let table = cmd_report(max_rank)?;
    print!("{}", render_report_markdown(&table));
    if !table.all_agree {
        eprintln!("computed verdicts disagree with the exception list");
        std::process::exit(1);
    }
    Ok(())
}
