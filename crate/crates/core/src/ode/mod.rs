//! The singular boundary value problem for the profile function V(θ).

pub mod dopri;
pub mod params;
pub mod profile;
pub mod rhs;
pub mod series;
pub mod shooting;
pub mod verify;

pub use params::{make_params, ABar, FloatParams, OdeParams};
pub use profile::{Interpolator, SolutionProfile, SolverMeta};
pub use rhs::{jet_tail, jet_theta, rhs_s, rhs_theta, Jet, TailPoint};
pub use series::series_start;
pub use shooting::{shoot, solve_bvp, Sample, ShootOutcome, Shot, SolverConfig};
pub use verify::{monotonicity, random_pairs, residual, verify_claim5_decay, verify_lemma54};
