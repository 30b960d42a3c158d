//! Drives a full solve from a TOML run configuration, the way the binary
//! does, and writes the artifacts to a directory.
//!
//!     cargo run --release --example run_config -- out/

use ke_cohom::cli::{cmd_solve, RunConfig};

const CONFIG: &str = r#"
case_id = 3
rank = 4
metric_points = 400

[solver]
theta_switch = 0.95
boundary_tol = 1e-7
"#;

fn main() -> ke_cohom::Result<()> {
    let mut cfg: RunConfig =
        toml::from_str(CONFIG).map_err(|e| ke_cohom::Error::Config(e.to_string()))?;
    cfg.out_dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "out".into())
        .into();
    let out = cmd_solve(&cfg)?;
    println!(
        "{}: all checks pass = {}",
        out.report.case, out.report.all_pass
    );
    for f in &out.files {
        println!("  {}", f.display());
    }
    Ok(())
}
