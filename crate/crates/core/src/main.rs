use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ke_cohom::catalog::enumerate_cases;
use ke_cohom::cli::{self, RunConfig};
use ke_cohom::Result;

#[derive(Parser)]
#[command(
    name = "ke-cohom",
    version,
    about = "Kähler-Einstein metrics on cohomogeneity-one bundles over flag manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the admissible cases with their root-pairing data.
    Catalog {
        #[arg(long, default_value_t = 6)]
        max_rank: u32,
        #[arg(long)]
        json: bool,
    },
    /// Exact sign integral for one case, or every case with --all.
    Signtest {
        #[command(flatten)]
        sel: Selection,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 6)]
        max_rank: u32,
        #[arg(long)]
        json: bool,
    },
    /// Solve one case, verify the metric and write profile, metric and report files.
    Solve {
        #[command(flatten)]
        sel: Selection,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Attempt the solve even when the case is excluded.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        hit_tol: Option<f64>,
        #[arg(long)]
        boundary_tol: Option<f64>,
        #[arg(long)]
        residual_tol: Option<f64>,
        #[arg(long)]
        theta0: Option<f64>,
        #[arg(long)]
        theta_switch: Option<f64>,
        #[arg(long)]
        metric_points: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Existence table: computed verdicts against the theorem's exception list.
    Report {
        #[arg(long, default_value_t = 6)]
        max_rank: u32,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Selection {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "case")]
    case_id: Option<u8>,
    #[arg(long)]
    rank: Option<u32>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    /// Q or CP
    #[arg(long)]
    fiber: Option<String>,
    /// Rational override of ĉ, e.g. 7/2
    #[arg(long = "chat")]
    c_hat: Option<String>,
}

impl Selection {
    fn load(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_toml_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => { $(if self.$f.is_some() { cfg.$f = self.$f; })* };
        }
        over!(case_id, rank, p, q, fiber, c_hat);
        Ok(cfg)
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Catalog { max_rank, json } => {
            let table = cli::cmd_catalog(max_rank)?;
            if json {
                print_json(&table)?;
            } else {
                print!("{}", cli::render_catalog(&table));
            }
        }
        Command::Signtest {
            sel,
            all,
            max_rank,
            json,
        } => {
            let cfg = sel.load()?;
            let cases = if all {
                enumerate_cases(max_rank)
            } else {
                vec![cfg.case()?]
            };
            let table = cli::cmd_signtest(&cases, cfg.c_hat()?.as_ref())?;
            if json {
                print_json(&table)?;
            } else {
                print!("{}", cli::render_signtest(&table));
            }
        }
        Command::Solve {
            sel,
            out_dir,
            force,
            hit_tol,
            boundary_tol,
            residual_tol,
            theta0,
            theta_switch,
            metric_points,
            json,
        } => {
            let mut cfg = sel.load()?;
            cfg.force |= force;
            if let Some(d) = out_dir {
                cfg.out_dir = d;
            }
            if metric_points.is_some() {
                cfg.metric_points = metric_points;
            }
            let s = &mut cfg.solver;
            s.hit_tol = hit_tol.unwrap_or(s.hit_tol);
            s.boundary_tol = boundary_tol.unwrap_or(s.boundary_tol);
            s.residual_tol = residual_tol.unwrap_or(s.residual_tol);
            s.theta0 = theta0.unwrap_or(s.theta0);
            s.theta_switch = theta_switch.unwrap_or(s.theta_switch);
            let out = cli::cmd_solve(&cfg)?;
            let r = &out.report;
            if json {
                print_json(r)?;
            } else {
                println!(
                    "{}: v1 = {:.12e}, V_dot(1) = {:.12e}, residual = {:.2e}",
                    r.case, r.v1, r.v_dot_at_1, r.residual.max
                );
                for c in &r.theorem.checks {
                    println!(
                        "  {:<28} {}  {}",
                        c.name,
                        if c.passed { "pass" } else { "FAIL" },
                        c.detail
                    );
                }
                for f in &out.files {
                    println!("  wrote {}", f.display());
                }
            }
            return Ok(if r.all_pass {
                cli::EXIT_OK
            } else {
                cli::EXIT_VERIFICATION
            });
        }
        Command::Report { max_rank, json } => {
            let table = cli::cmd_report(max_rank)?;
            if json {
                print_json(&table)?;
            } else {
                print!("{}", cli::render_report_markdown(&table));
            }
        }
    }
    Ok(cli::EXIT_OK)
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                cli::EXIT_ERROR as u8
            } else {
                0
            });
        }
    };
    match run(args.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
