//! Checks of a solved profile: equation residual, monotonicity, the
//! two-sided comparison bound on V̇ and the decay of V̇ near θ = 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::FloatParams;
use super::profile::SolutionProfile;
use super::rhs::{rhs_s, rhs_theta, tail_scale, theta_scale, TailPoint};

/// Weights of the first derivative at `x0` for the nodes `xs` (Fornberg).
pub fn fd_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let m = 1;
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[1]).collect()
}

/// Five-point derivative of `ys` over `xs` at every index. Stencil nodes
/// are spaced at least `spacing` apart so that rounding in `ys` is not
/// amplified on very fine stretches of the grid; stencils are one-sided at
/// the ends.
fn derivative(xs: &[f64], ys: &[f64], spacing: f64) -> Vec<f64> {
    let n = xs.len();
    if n < 5 {
        return vec![f64::NAN; n];
    }
    let nearest = |t: f64| {
        let k = xs.partition_point(|&x| x < t).min(n - 1);
        if k > 0 && (t - xs[k - 1]) < (xs[k] - t) {
            k - 1
        } else {
            k
        }
    };
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2).min(n - 5);
            let mut idx: Vec<usize> = (lo..lo + 5).collect();
            if xs[lo + 4] - xs[lo] < 4.0 * spacing {
                let base = (xs[i] - 2.0 * spacing)
                    .max(xs[0])
                    .min(xs[n - 1] - 4.0 * spacing);
                let wide: Vec<usize> = (0..5).map(|j| nearest(base + j as f64 * spacing)).collect();
                if wide.windows(2).all(|w| w[1] > w[0]) {
                    idx = wide;
                }
            }
            let nodes: Vec<f64> = idx.iter().map(|&k| xs[k]).collect();
            let w = fd_weights(xs[i], &nodes);
            w.iter().zip(&idx).map(|(a, &k)| a * ys[k]).sum()
        })
        .collect()
}

/// Smallest stencil spacing used when differencing V̇ in θ.
const THETA_SPACING: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Largest normalized residual over the grid.
    pub max: f64,
    pub theta_at_max: f64,
    pub points: usize,
    /// Normalized residual at every grid point.
    #[serde(skip)]
    pub per_point: Vec<f64>,
    /// Raw residual `V̈_numeric - V̈_equation` in θ units at every point.
    #[serde(skip)]
    pub raw: Vec<f64>,
    /// Numerical V̈ from differencing V̇ at every point.
    #[serde(skip)]
    pub v_ddot_numeric: Vec<f64>,
}

/// Residual of the equation on the grid. V̇ is differenced in the chart it
/// was integrated in and compared with the right-hand side; each residual
/// is divided by the sum of magnitudes of the terms of the equation.
pub fn residual(profile: &SolutionProfile) -> ResidualReport {
    let p = profile.float_params();
    let n = profile.len();
    let ts = profile.tail_start;
    let mut per_point = vec![f64::NAN; n];
    let mut raw = vec![f64::NAN; n];
    let mut numeric = vec![f64::NAN; n];

    // V̇ is stored on the whole grid, so stencils may reach past the switch
    let reach = (ts + 2).min(n);
    let d_theta = derivative(
        &profile.theta_grid[..reach],
        &profile.v_dot[..reach],
        THETA_SPACING,
    );
    for i in 0..ts {
        let (th, v, vd) = (profile.theta_grid[i], profile.v[i], profile.v_dot[i]);
        if let Ok(f) = rhs_theta(&p, th, v, vd) {
            let r = d_theta[i] - f;
            per_point[i] = r.abs() / theta_scale(&p, th, v, vd, f);
            raw[i] = r;
            numeric[i] = d_theta[i];
        }
    }

    let s: Vec<f64> = (ts..n).map(|i| profile.sample(i).s()).collect();
    let z: Vec<f64> = (ts..n).map(|i| profile.sample(i).z()).collect();
    let d_s = derivative(&s, &z, 0.0);
    for (k, i) in (ts..n).enumerate() {
        let smp = profile.sample(i);
        let pt = TailPoint::new(&p, s[k], smp.w, z[k]);
        if let Ok(g) = rhs_s(&p, &pt) {
            let r = d_s[k] - g;
            per_point[i] = r.abs() / tail_scale(&p, &pt, g);
            // z_s = u² V̈ - z
            let u = smp.u;
            raw[i] = r / (u * u);
            numeric[i] = (d_s[k] + z[k]) / (u * u);
        }
    }

    let (mut max, mut at) = (0.0f64, f64::NAN);
    for i in 0..n {
        let r = per_point[i];
        if !(r <= max) {
            max = if r.is_nan() { f64::INFINITY } else { r };
            at = profile.theta_grid[i];
        }
    }
    ResidualReport {
        max,
        theta_at_max: at,
        points: n,
        per_point,
        raw,
        v_ddot_numeric: numeric,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub strictly_increasing: bool,
    pub positive_slope: bool,
    pub inside_range: bool,
    pub min_v_dot: f64,
}

pub fn monotonicity(profile: &SolutionProfile) -> MonotonicityReport {
    let inc = profile.v.windows(2).all(|w| w[1] > w[0]);
    let min_vd = profile.v_dot.iter().copied().fold(f64::INFINITY, f64::min);
    let inside = profile
        .v
        .iter()
        .zip(&profile.ceiling_gap)
        .all(|(&v, &w)| v > 0.0 && w > 0.0);
    MonotonicityReport {
        strictly_increasing: inc,
        positive_slope: min_vd > 0.0,
        inside_range: inside,
        min_v_dot: min_vd,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma54Report {
    pub pairs: usize,
    pub violations: usize,
    /// Smallest of `log(middle/lower)` and `log(upper/middle)` over all
    /// pairs; positive when every inequality is strict.
    pub worst_margin: f64,
    pub worst_pair: (f64, f64),
}

/// `log` of the three sides of the bound for the grid pair `(i, j)`.
pub fn lemma54_sides(p: &FloatParams, pr: &SolutionProfile, i: usize, j: usize) -> (f64, f64, f64) {
    let (t1, t2) = (pr.theta_grid[i], pr.theta_grid[j]);
    let (u1, u2) = (pr.one_minus_theta[i], pr.one_minus_theta[j]);
    let (v1, v2) = (pr.v[i], pr.v[j]);
    let (w1, w2) = (pr.ceiling_gap[i], pr.ceiling_gap[j]);
    let drift = p.drift();
    let lt = (t2 / t1).ln();
    let lower = p.alpha * lt + 2.0 * drift * ((1.0 + t1.sqrt()) / (1.0 + t2.sqrt())).ln();
    let upper = p.alpha * lt + drift * (u1 / u2).ln();
    let mut middle = (pr.v_dot[j] / pr.v_dot[i]).ln() + p.alpha * (v2 / v1).ln();
    for &(a2, m) in &p.a_bar_sq {
        // ā² - V = (ā² - V_ĉ) + W keeps precision near the ceiling
        let g1 = (a2 - p.v_ceiling) + w1;
        let g2 = (a2 - p.v_ceiling) + w2;
        middle += m * (g2 / g1).ln();
    }
    (lower, middle, upper)
}

pub fn verify_lemma54(profile: &SolutionProfile, pairs: &[(usize, usize)]) -> Lemma54Report {
    let p = profile.float_params();
    let mut worst = f64::INFINITY;
    let mut worst_pair = (f64::NAN, f64::NAN);
    let mut violations = 0;
    for &(a, b) in pairs {
        let (i, j) = if a <= b { (a, b) } else { (b, a) };
        if i == j {
            continue;
        }
        let (lo, mid, up) = lemma54_sides(&p, profile, i, j);
        let margin = (mid - lo).min(up - mid);
        if !(margin > 0.0) {
            violations += 1;
        }
        if !(margin >= worst) {
            worst = margin;
            worst_pair = (profile.theta_grid[i], profile.theta_grid[j]);
        }
    }
    Lemma54Report {
        pairs: pairs.len(),
        violations,
        worst_margin: worst,
        worst_pair,
    }
}

/// `n` random index pairs with distinct entries, reproducible from `seed`.
pub fn random_pairs(n: usize, len: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n && len > 1 {
        let a = rng.gen_range(0..len);
        let b = rng.gen_range(0..len);
        if a != b {
            out.push((a.min(b), a.max(b)));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub epsilon: f64,
    /// Log-log slope of V̇ against `1-θ` over the tail window.
    pub slope: f64,
    /// `max V̇ (1-θ)^{2ε}` over the tail window.
    pub m_epsilon: f64,
    pub v_dot_at_1: f64,
    pub bounded: bool,
}

/// Fit `V̇ ~ (1-θ)^slope` over `1-θ ∈ [u_min, u_max]` and compare with the
/// allowed growth `(1-θ)^{-2ε}`.
pub fn verify_claim5_decay(profile: &SolutionProfile, epsilon: f64) -> DecayReport {
    let u_max = 1e-2;
    let u_min = 1e-3
        * profile
            .one_minus_theta
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(1e-300);
    let pts: Vec<(f64, f64)> = (0..profile.len())
        .filter(|&i| {
            let u = profile.one_minus_theta[i];
            u <= u_max && u >= u_min && profile.v_dot[i] > 0.0
        })
        .map(|i| (profile.one_minus_theta[i].ln(), profile.v_dot[i].ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    let m_eps = pts
        .iter()
        .map(|&(lu, lv)| (lv + 2.0 * epsilon * lu).exp())
        .fold(0.0, f64::max);
    let vd1 = profile.v_dot_at_1;
    DecayReport {
        epsilon,
        slope,
        m_epsilon: m_eps,
        v_dot_at_1: vd1,
        bounded: slope > -2.0 * epsilon && m_eps.is_finite() && vd1.is_finite() && vd1 > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_on_polynomials() {
        let xs = [0.0, 0.1, 0.25, 0.4, 0.7];
        let w = fd_weights(0.25, &xs);
        // exact for polynomials of degree ≤ 4
        let f = |x: f64| 3.0 * x.powi(4) - x.powi(3) + 2.0 * x - 1.0;
        let df = |x: f64| 12.0 * x.powi(3) - 3.0 * x * x + 2.0;
        let approx: f64 = w.iter().zip(&xs).map(|(a, &x)| a * f(x)).sum();
        assert!((approx - df(0.25)).abs() < 1e-12);
        let w = fd_weights(0.0, &xs);
        let approx: f64 = w.iter().zip(&xs).map(|(a, &x)| a * f(x)).sum();
        assert!((approx - df(0.0)).abs() < 1e-11);
    }

    use crate::catalog::{CaseSpec, Fiber};
    use crate::ode::make_params;
    use crate::ode::params::OdeParams;
    use crate::ode::profile::SolverMeta;
    use crate::ode::shooting::{shoot, solve_bvp, Sample, ShootOutcome, SolverConfig};
    use std::sync::OnceLock;

    fn base_params() -> OdeParams {
        make_params(&CaseSpec::case1(2, Fiber::Quadric).unwrap(), None).unwrap()
    }

    fn base_profile() -> &'static SolutionProfile {
        static P: OnceLock<SolutionProfile> = OnceLock::new();
        P.get_or_init(|| solve_bvp(&base_params(), &SolverConfig::default(), false).unwrap())
    }

    /// Profile through the given `(1-θ, V, V̇)` points, all in the s chart.
    fn synthetic(points: &[(f64, f64, f64)]) -> SolutionProfile {
        let p = base_params();
        let ceiling = p.to_float().v_ceiling;
        let samples: Vec<Sample> = points
            .iter()
            .map(|&(u, v, v_dot)| Sample {
                theta: 1.0 - u,
                u,
                v,
                w: ceiling - v,
                v_dot,
                tail: true,
            })
            .collect();
        SolutionProfile::from_samples(
            &p,
            &SolverConfig::default(),
            &samples,
            1.0,
            SolverMeta::default(),
        )
    }

    #[test]
    fn solved_profile_passes_every_check() {
        let pr = base_profile();
        assert!(residual(pr).max <= 1e-8);
        let m = monotonicity(pr);
        assert!(m.strictly_increasing && m.positive_slope && m.inside_range);
        let l = verify_lemma54(pr, &random_pairs(100, pr.len(), 3));
        assert_eq!(l.violations, 0);
        assert!(l.worst_margin > 0.0);
        let d = verify_claim5_decay(pr, 0.1);
        assert!(
            d.bounded && d.m_epsilon.is_finite() && d.v_dot_at_1 > 0.0,
            "{d:?}"
        );
    }

    #[test]
    fn equal_points_give_equal_sides() {
        let pr = base_profile();
        let p = pr.float_params();
        for i in [0, pr.len() / 2, pr.len() - 1] {
            let (lo, mid, up) = lemma54_sides(&p, pr, i, i);
            assert!(lo.abs() < 1e-15 && mid.abs() < 1e-15 && up.abs() < 1e-15);
        }
        let r = verify_lemma54(pr, &[(5, 5)]);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn constant_profile_violates_the_bound() {
        let pts: Vec<(f64, f64, f64)> = (1..=40).map(|k| (0.9f64.powi(k), 0.5, 0.0)).collect();
        let pr = synthetic(&pts);
        let r = verify_lemma54(&pr, &random_pairs(100, pr.len(), 1));
        assert!(r.violations > 0);
        assert!(!monotonicity(&pr).strictly_increasing);
    }

    #[test]
    fn blowing_up_slope_fails_the_decay_check() {
        let pts: Vec<(f64, f64, f64)> = (0..200)
            .map(|k| {
                let u = 10f64.powf(-1.0 - 11.0 * k as f64 / 199.0);
                (u, 1.0 - u, 1.0 / u)
            })
            .collect();
        let d = verify_claim5_decay(&synthetic(&pts), 0.1);
        assert!((d.slope + 1.0).abs() < 1e-9, "{d:?}");
        assert!(!d.bounded);
    }

    #[test]
    fn shots_on_both_sides_satisfy_the_bound() {
        let params = base_params();
        let p = params.to_float();
        let cfg = SolverConfig::default();
        let v1 = base_profile().v1;
        for (slope, hits) in [(0.5 * v1, false), (2.0 * v1, true)] {
            let shot = shoot(&p, slope, &cfg).unwrap();
            assert_eq!(
                matches!(shot.outcome, ShootOutcome::HitCeiling { .. }),
                hits
            );
            let pr = SolutionProfile::from_samples(
                &params,
                &cfg,
                &shot.samples,
                slope,
                SolverMeta::default(),
            );
            let r = verify_lemma54(&pr, &random_pairs(100, pr.len(), 11));
            assert_eq!(r.violations, 0, "{r:?}");
            assert!(monotonicity(&pr).positive_slope);
        }
    }

    #[test]
    fn random_pairs_are_reproducible() {
        let a = random_pairs(100, 50, 1);
        assert_eq!(a, random_pairs(100, 50, 1));
        assert!(a.iter().all(|&(i, j)| i < j && j < 50));
    }
}
