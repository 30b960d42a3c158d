//! Right-hand sides of the profile equation.
//!
//! In θ the equation reads
//!
//! ```text
//! V̈ = -V̇² (α/V - S(V)) - V̇ P(θ, V),
//! S(V) = Σ m / (ā² - V),
//! P(θ, V) = (ĉ√(V/θ) - 2(1+α′)) / (1-θ) - α/θ.
//! ```
//!
//! Near θ = 1 the term `P` is a difference of nearly equal numbers divided
//! by `1-θ`, so the tail is written in `s = -ln(1-θ)` with state
//! `W = V_ĉ - V` and `z = dV/ds = V̇ (1-θ)`. With `u = 1-θ`,
//!
//! ```text
//! dz/ds = z (δ - 1),
//! δ = z (S - α/V) - ĉ (u V_ĉ - W) / (θ (√(V/θ) + √V_ĉ)) + α u / θ,
//! ```
//!
//! where every term of `δ` is computed without cancellation.

use crate::error::{Error, Result};

use super::params::FloatParams;

/// V and its first three θ-derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub theta: f64,
    /// `1 - θ`, kept separately for precision near θ = 1.
    pub u: f64,
    pub v: f64,
    pub v_dot: f64,
    pub v_ddot: f64,
    pub v_dddot: f64,
}

fn check_v(p: &FloatParams, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("V = {v} is not positive")));
    }
    let top = p.min_a_bar_sq();
    if v >= top {
        return Err(Error::Domain(format!(
            "V = {v} reached the pole a_bar^2 = {top}"
        )));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, 1)")));
    }
    Ok(())
}

/// `P(θ, V)` as written, for use away from θ = 1.
fn p_term(p: &FloatParams, theta: f64, v: f64) -> f64 {
    (p.c_hat * (v / theta).sqrt() - p.drift()) / (1.0 - theta) - p.alpha / theta
}

/// V̈ from the profile equation.
pub fn rhs_theta(p: &FloatParams, theta: f64, v: f64, v_dot: f64) -> Result<f64> {
    check_theta(theta)?;
    check_v(p, v)?;
    let s = p.pole_sum(v);
    Ok(-v_dot * v_dot * (p.alpha / v - s) - v_dot * p_term(p, theta, v))
}

/// V⃛ by differentiating the right-hand side along the solution.
pub fn third_theta(p: &FloatParams, theta: f64, v: f64, v_dot: f64, v_ddot: f64) -> f64 {
    let s = p.pole_sum(v);
    let s_v = p.pole_sum_sq(v);
    let u = 1.0 - theta;
    let r = (v / theta).sqrt();
    let pt = p_term(p, theta, v);
    let p_v = p.c_hat / (2.0 * (v * theta).sqrt() * u);
    let p_theta = -p.c_hat * r / (2.0 * theta * u)
        + (p.c_hat * r - p.drift()) / (u * u)
        + p.alpha / (theta * theta);
    let f_theta = -v_dot * p_theta;
    let f_v = v_dot * v_dot * (p.alpha / (v * v) + s_v) - v_dot * p_v;
    let f_vdot = -2.0 * v_dot * (p.alpha / v - s) - pt;
    f_theta + f_v * v_dot + f_vdot * v_ddot
}

/// The full jet at an interior point given (θ, V, V̇).
pub fn jet_theta(p: &FloatParams, theta: f64, v: f64, v_dot: f64) -> Result<Jet> {
    let v_ddot = rhs_theta(p, theta, v, v_dot)?;
    Ok(Jet {
        theta,
        u: 1.0 - theta,
        v,
        v_dot,
        v_ddot,
        v_dddot: third_theta(p, theta, v, v_dot, v_ddot),
    })
}

/// Point in the tail chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailPoint {
    pub s: f64,
    pub theta: f64,
    pub u: f64,
    pub w: f64,
    pub v: f64,
    pub z: f64,
}

impl TailPoint {
    pub fn new(p: &FloatParams, s: f64, w: f64, z: f64) -> Self {
        TailPoint {
            s,
            theta: -(-s).exp_m1(),
            u: (-s).exp(),
            w,
            v: p.v_ceiling - w,
            z,
        }
    }
}

/// `ĉ (u V_ĉ - W) / (θ (√(V/θ) + √V_ĉ))`, equal to `ĉ√(V/θ) - 2(1+α′)`.
fn gap_term(p: &FloatParams, pt: &TailPoint) -> f64 {
    let m = (pt.v / pt.theta).sqrt() + p.v_ceiling.sqrt();
    p.c_hat * (pt.u * p.v_ceiling - pt.w) / (pt.theta * m)
}

/// `δ` with `dz/ds = z (δ - 1)`.
pub fn tail_delta(p: &FloatParams, pt: &TailPoint) -> Result<f64> {
    check_theta(pt.theta)?;
    check_v(p, pt.v)?;
    let s = p.pole_sum(pt.v);
    Ok(pt.z * (s - p.alpha / pt.v) - gap_term(p, pt) + p.alpha * pt.u / pt.theta)
}

/// `dz/ds`.
pub fn rhs_s(p: &FloatParams, pt: &TailPoint) -> Result<f64> {
    Ok(pt.z * (tail_delta(p, pt)? - 1.0))
}

/// `dδ/ds` along the solution.
fn tail_delta_s(p: &FloatParams, pt: &TailPoint, delta: f64) -> f64 {
    let (theta, u, v, z, w) = (pt.theta, pt.u, pt.v, pt.z, pt.w);
    let s = p.pole_sum(v);
    let s_v = p.pole_sum_sq(v);
    let z_s = z * (delta - 1.0);

    let root = (v / theta).sqrt();
    let m = root + p.v_ceiling.sqrt();
    let n = u * p.v_ceiling - w;
    let n_s = z - u * p.v_ceiling;
    let m_s = (z * theta - v * u) / (2.0 * root * theta * theta);
    let gap_s =
        p.c_hat * (n_s / (theta * m) - n * u / (theta * theta * m) - n * m_s / (theta * m * m));

    z_s * (s - p.alpha / v) + z * z * (s_v + p.alpha / (v * v))
        - gap_s
        - p.alpha * u / (theta * theta)
}

/// The jet at a tail point. `V̈` and `V⃛` are assembled from `δ` so that no
/// large terms cancel.
pub fn jet_tail(p: &FloatParams, pt: &TailPoint) -> Result<Jet> {
    let delta = tail_delta(p, pt)?;
    let d_s = tail_delta_s(p, pt, delta);
    let (u, z) = (pt.u, pt.z);
    Ok(Jet {
        theta: pt.theta,
        u,
        v: pt.v,
        v_dot: z / u,
        v_ddot: z * delta / (u * u),
        v_dddot: z * (delta + delta * delta + d_s) / (u * u * u),
    })
}

/// Sum of magnitudes of the terms of the θ-equation, used to normalize
/// residuals.
pub fn theta_scale(p: &FloatParams, theta: f64, v: f64, v_dot: f64, v_ddot: f64) -> f64 {
    let s = p.pole_sum(v);
    v_ddot.abs()
        + v_dot * v_dot * (p.alpha / v + s.abs())
        + v_dot.abs() * (p.c_hat * (v / theta).sqrt() + p.drift()) / (1.0 - theta)
        + p.alpha * v_dot.abs() / theta
}

/// Same normalization for the tail equation `z_s = z (δ - 1)`.
pub fn tail_scale(p: &FloatParams, pt: &TailPoint, z_s: f64) -> f64 {
    let s = p.pole_sum(pt.v);
    (z_s + pt.z).abs()
        + pt.z * pt.z * (p.alpha / pt.v + s.abs())
        + pt.z.abs() * (p.c_hat * (pt.v / pt.theta).sqrt() + p.drift() + p.alpha * pt.u / pt.theta)
}
