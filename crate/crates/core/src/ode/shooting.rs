//! Shooting on the initial slope `v₁ = V̇(0)`.
//!
//! Each shot starts from the series expansion at `θ₀`, integrates in θ up
//! to `θ_switch` and in `s = -ln(1-θ)` afterwards. Too steep a start makes
//! V reach the ceiling before θ = 1; too shallow a start leaves V below it.
//! The solution sits on the boundary between the two outcomes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::dopri::{integrate, Control, Step, StepControl};
use super::params::{FloatParams, OdeParams};
use super::profile::{SolutionProfile, SolverMeta};
use super::rhs::{rhs_s, rhs_theta, TailPoint};
use super::series::series_start;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub theta0: f64,
    pub theta_switch: f64,
    /// Integration stops at `θ = 1 - end_gap`.
    pub end_gap: f64,
    pub hit_tol: f64,
    pub boundary_tol: f64,
    pub residual_tol: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Step cap in the θ chart, relative to `min(θ, 1-θ)`.
    pub max_step_rel: f64,
    /// Step cap in the s chart.
    pub max_step_s: f64,
    pub v1_min: f64,
    pub v1_max: f64,
    pub max_iterations: usize,
    /// Relative width at which bracket refinement stops.
    pub bracket_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta0: 1e-6,
            theta_switch: 0.9,
            end_gap: 1e-12,
            hit_tol: 1e-10,
            boundary_tol: 1e-6,
            residual_tol: 1e-8,
            rtol: 1e-11,
            atol: 1e-20,
            max_step_rel: 0.002,
            max_step_s: 0.005,
            v1_min: 1e-6,
            v1_max: 1e6,
            max_iterations: 200,
            bracket_tol: 1e-14,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("theta0", self.theta0),
            ("end_gap", self.end_gap),
            ("hit_tol", self.hit_tol),
            ("boundary_tol", self.boundary_tol),
            ("residual_tol", self.residual_tol),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("max_step_rel", self.max_step_rel),
            ("max_step_s", self.max_step_s),
            ("v1_min", self.v1_min),
            ("bracket_tol", self.bracket_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.theta0 < self.theta_switch && self.theta_switch < 1.0 - self.end_gap) {
            return Err(Error::Config(format!(
                "need theta0 < theta_switch < 1 - end_gap, got {} / {} / {}",
                self.theta0, self.theta_switch, self.end_gap
            )));
        }
        if !(self.v1_min < self.v1_max) {
            return Err(Error::Config("v1_min must be below v1_max".into()));
        }
        Ok(())
    }

    /// Same settings with every accuracy tolerance divided by `k`.
    pub fn tightened(&self, k: f64) -> Self {
        SolverConfig {
            rtol: self.rtol / k,
            atol: self.atol / k,
            max_step_rel: self.max_step_rel / k.sqrt(),
            max_step_s: self.max_step_s / k.sqrt(),
            ..self.clone()
        }
    }

    pub fn s_switch(&self) -> f64 {
        -(-self.theta_switch).ln_1p()
    }

    pub fn s_end(&self) -> f64 {
        -self.end_gap.ln()
    }

    fn step_control(&self) -> StepControl {
        StepControl {
            rtol: self.rtol,
            atol: self.atol,
            ..StepControl::default()
        }
    }
}

/// One recorded point of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub theta: f64,
    /// `1 - θ`
    pub u: f64,
    pub v: f64,
    /// `V_ĉ - V`
    pub w: f64,
    pub v_dot: f64,
    /// Recorded in the s chart.
    pub tail: bool,
}

impl Sample {
    pub fn s(&self) -> f64 {
        -self.u.ln()
    }

    /// `dV/ds`
    pub fn z(&self) -> f64 {
        self.v_dot * self.u
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ShootOutcome {
    /// V reached `V_ĉ - hit_tol` at `θ_hit = 1 - u_hit`; `z_hit` is dV/ds there.
    HitCeiling {
        theta_hit: f64,
        u_hit: f64,
        z_hit: f64,
    },
    /// The end point was reached below the ceiling.
    Undershoot {
        v_end: f64,
        z_end: f64,
    },
    DomainError(String),
}

impl ShootOutcome {
    /// A continuous stand-in for `V(1) - (V_ĉ - hit_tol)`: positive on a
    /// hit, negative on an undershoot.
    pub fn miss(&self, level: f64) -> Option<f64> {
        match self {
            ShootOutcome::HitCeiling { z_hit, .. } => Some(z_hit.max(0.0)),
            ShootOutcome::Undershoot { v_end, z_end } => Some((v_end + z_end - level).min(0.0)),
            ShootOutcome::DomainError(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Shot {
    pub v1: f64,
    pub outcome: ShootOutcome,
    pub samples: Vec<Sample>,
    /// Largest scaled local error estimate over accepted steps.
    pub max_step_error: f64,
}

/// Locate `g(x) = 0` inside an accepted step, `g(x0) < 0 <= g(x1)`.
fn locate<const N: usize>(step: &Step<N>, g: impl Fn(&[f64; N]) -> f64) -> (f64, [f64; N]) {
    let (mut a, mut b) = (step.x0, step.x1);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(&step.interpolate(m)) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    (b, step.interpolate(b))
}

/// Integrate one trajectory with initial slope `v1`.
pub fn shoot(p: &FloatParams, v1: f64, cfg: &SolverConfig) -> Result<Shot> {
    cfg.validate()?;
    let (v0, vd0) = series_start(p, v1, cfg.theta0)?;
    let level = p.v_ceiling - cfg.hit_tol;
    let ctl = cfg.step_control();
    let mut samples = vec![Sample {
        theta: cfg.theta0,
        u: 1.0 - cfg.theta0,
        v: v0,
        w: p.v_ceiling - v0,
        v_dot: vd0,
        tail: false,
    }];
    let mut max_err: f64 = 0.0;
    let mut hit: Option<ShootOutcome> = None;
    let done = |samples: Vec<Sample>, outcome, max_err| Shot {
        v1,
        outcome,
        samples,
        max_step_error: max_err,
    };

    // θ chart
    let f = |x: f64, y: &[f64; 2]| Ok([y[1], rhs_theta(p, x, y[0], y[1])?]);
    let res = integrate(
        f,
        cfg.theta0,
        [v0, vd0],
        cfg.theta_switch,
        cfg.theta0 * cfg.max_step_rel,
        |x| x.min(1.0 - x) * cfg.max_step_rel,
        &ctl,
        |st| {
            max_err = max_err.max(st.err);
            if st.y1[0] >= level {
                let (x, y) = locate(st, |y| y[0] - level);
                hit = Some(ShootOutcome::HitCeiling {
                    theta_hit: x,
                    u_hit: 1.0 - x,
                    z_hit: y[1] * (1.0 - x),
                });
                return Ok(Control::Stop);
            }
            samples.push(Sample {
                theta: st.x1,
                u: 1.0 - st.x1,
                v: st.y1[0],
                w: p.v_ceiling - st.y1[0],
                v_dot: st.y1[1],
                tail: false,
            });
            Ok(Control::Continue)
        },
    );
    if let Err(e) = res {
        return Ok(done(
            samples,
            ShootOutcome::DomainError(e.to_string()),
            max_err,
        ));
    }
    if let Some(h) = hit {
        return Ok(done(samples, h, max_err));
    }

    // s chart, state (W, z)
    let last = *samples.last().expect("at least the start sample");
    let s0 = cfg.s_switch();
    let y0 = [last.w, last.v_dot * last.u];
    let g = |s: f64, y: &[f64; 2]| {
        let pt = TailPoint::new(p, s, y[0], y[1]);
        Ok([-y[1], rhs_s(p, &pt)?])
    };
    let res = integrate(
        g,
        s0,
        y0,
        cfg.s_end(),
        cfg.max_step_s,
        |_| cfg.max_step_s,
        &ctl,
        |st| {
            max_err = max_err.max(st.err);
            if st.y1[0] <= cfg.hit_tol {
                let (s, y) = locate(st, |y| cfg.hit_tol - y[0]);
                let u = (-s).exp();
                hit = Some(ShootOutcome::HitCeiling {
                    theta_hit: -(-s).exp_m1(),
                    u_hit: u,
                    z_hit: y[1],
                });
                return Ok(Control::Stop);
            }
            let pt = TailPoint::new(p, st.x1, st.y1[0], st.y1[1]);
            samples.push(Sample {
                theta: pt.theta,
                u: pt.u,
                v: pt.v,
                w: pt.w,
                v_dot: pt.z / pt.u,
                tail: true,
            });
            Ok(Control::Continue)
        },
    );
    if let Err(e) = res {
        return Ok(done(
            samples,
            ShootOutcome::DomainError(e.to_string()),
            max_err,
        ));
    }
    if let Some(h) = hit {
        return Ok(done(samples, h, max_err));
    }
    let end = *samples.last().expect("nonempty");
    Ok(done(
        samples,
        ShootOutcome::Undershoot {
            v_end: end.v,
            z_end: end.z(),
        },
        max_err,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Hit,
    Under,
}

fn side(o: &ShootOutcome) -> Option<Side> {
    match o {
        ShootOutcome::HitCeiling { .. } => Some(Side::Hit),
        ShootOutcome::Undershoot { .. } => Some(Side::Under),
        ShootOutcome::DomainError(_) => None,
    }
}

/// Find slopes on both sides of the boundary, scanning geometrically from 1.
fn find_bracket(p: &FloatParams, cfg: &SolverConfig) -> Result<(Shot, Shot, usize)> {
    let mut shots = 1;
    let first = shoot(p, 1.0f64.clamp(cfg.v1_min, cfg.v1_max), cfg)?;
    let start_side = side(&first.outcome)
        .ok_or_else(|| Error::NoBracket(format!("start slope 1 failed: {:?}", first.outcome)))?;
    let factor = if start_side == Side::Hit { 0.5 } else { 2.0 };
    let mut prev = first;
    loop {
        let v1 = prev.v1 * factor;
        if v1 < cfg.v1_min || v1 > cfg.v1_max {
            return Err(Error::NoBracket(format!(
                "every slope in [{}, {}] tried gives {:?}",
                cfg.v1_min, cfg.v1_max, start_side
            )));
        }
        let next = shoot(p, v1, cfg)?;
        shots += 1;
        match side(&next.outcome) {
            None => {
                return Err(Error::NoBracket(format!("slope {v1}: {:?}", next.outcome)));
            }
            Some(s) if s != start_side => {
                return Ok(if s == Side::Hit {
                    (prev, next, shots)
                } else {
                    (next, prev, shots)
                });
            }
            Some(_) => prev = next,
        }
    }
}

/// Solve the boundary value problem by bracketing the initial slope.
pub fn solve_bvp(params: &OdeParams, cfg: &SolverConfig, force: bool) -> Result<SolutionProfile> {
    cfg.validate()?;
    if !params.condition_d && !force {
        return Err(Error::ConditionDViolated(
            "some a_bar^2 does not exceed the ceiling; refusing to solve without force".into(),
        ));
    }
    let p = params.to_float();
    let result = bracket_and_refine(&p, cfg);
    match result {
        Err(e @ (Error::NoBracket(_) | Error::NotConverged(_))) if !params.condition_d => Err(
            Error::ConditionDViolated(format!("forced solve degenerated: {e}")),
        ),
        Err(e) => Err(e),
        Ok((lo, hi, iterations)) => SolutionProfile::from_shots(params, cfg, lo, hi, iterations),
    }
}

fn bracket_and_refine(p: &FloatParams, cfg: &SolverConfig) -> Result<(Shot, Shot, usize)> {
    let level = p.v_ceiling - cfg.hit_tol;
    let (mut lo, mut hi, mut iterations) = find_bracket(p, cfg)?;
    let mut stalled = 0;
    while (hi.v1 - lo.v1) > cfg.bracket_tol * hi.v1 {
        if iterations >= cfg.max_iterations {
            return Err(Error::NotConverged(format!(
                "bracket [{}, {}] after {iterations} shots",
                lo.v1, hi.v1
            )));
        }
        let (a, b) = (lo.v1, hi.v1);
        let mid = 0.5 * (a + b);
        let mut next = mid;
        if stalled < 2 {
            if let (Some(ma), Some(mb)) = (lo.outcome.miss(level), hi.outcome.miss(level)) {
                if mb > ma {
                    let secant = a - ma * (b - a) / (mb - ma);
                    let margin = 0.01 * (b - a);
                    if secant > a + margin && secant < b - margin {
                        next = secant;
                    }
                }
            }
        }
        if next <= a || next >= b {
            break;
        }
        let shot = shoot(p, next, cfg)?;
        iterations += 1;
        let old_width = b - a;
        match side(&shot.outcome) {
            Some(Side::Hit) => hi = shot,
            Some(Side::Under) => lo = shot,
            None => {
                return Err(Error::NotConverged(format!(
                    "slope {next}: {:?}",
                    shot.outcome
                )));
            }
        }
        // fall back to bisection when the secant step barely shrinks the bracket
        if hi.v1 - lo.v1 > 0.5 * old_width {
            stalled += 1;
        } else {
            stalled = 0;
        }
    }
    Ok((lo, hi, iterations))
}

impl SolverMeta {
    pub(crate) fn from_shots(lo: &Shot, hi: &Shot, iterations: usize) -> Self {
        let theta_star = match hi.outcome {
            ShootOutcome::HitCeiling { theta_hit, .. } => theta_hit,
            _ => f64::NAN,
        };
        let u_star = match hi.outcome {
            ShootOutcome::HitCeiling { u_hit, .. } => u_hit,
            _ => f64::NAN,
        };
        SolverMeta {
            iterations,
            v1_undershoot: lo.v1,
            v1_hit: hi.v1,
            bracket_width: hi.v1 - lo.v1,
            theta_star,
            one_minus_theta_star: u_star,
            max_step_error: lo.max_step_error.max(hi.max_step_error),
            max_residual: f64::NAN,
        }
    }
}
