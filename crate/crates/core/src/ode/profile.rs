//! The solved profile, its interpolation and export.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::SCHEMA_VERSION;
use crate::error::{Error, Result};

use super::params::{FloatParams, OdeParams};
use super::rhs::{jet_tail, jet_theta, rhs_s, rhs_theta, Jet, TailPoint};
use super::series::second_coefficient;
use super::shooting::{Sample, Shot, SolverConfig};
use super::verify::residual;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    /// Number of trajectories integrated.
    pub iterations: usize,
    pub v1_undershoot: f64,
    pub v1_hit: f64,
    pub bracket_width: f64,
    /// Where the steepest-side trajectory met the ceiling.
    pub theta_star: f64,
    pub one_minus_theta_star: f64,
    pub max_step_error: f64,
    /// Largest normalized residual of the equation over the returned grid.
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    pub theta_grid: Vec<f64>,
    /// `1 - θ`, exact to full relative precision in the tail.
    pub one_minus_theta: Vec<f64>,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    #[serde(rename = "V_dot")]
    pub v_dot: Vec<f64>,
    /// `V_ĉ - V`
    pub ceiling_gap: Vec<f64>,
    /// Index of the first point recorded in the s chart.
    pub tail_start: usize,
    pub v1: f64,
    #[serde(rename = "V_dot_at_1")]
    pub v_dot_at_1: f64,
    pub solver_meta: SolverMeta,
    pub config: SolverConfig,
    pub params: OdeParams,
}

impl SolutionProfile {
    pub(crate) fn from_shots(
        params: &OdeParams,
        cfg: &SolverConfig,
        lo: Shot,
        hi: Shot,
        iterations: usize,
    ) -> Result<Self> {
        let meta = SolverMeta::from_shots(&lo, &hi, iterations);
        if !(meta.one_minus_theta_star <= cfg.boundary_tol) {
            return Err(Error::NotConverged(format!(
                "boundary point 1 - theta* = {} above boundary_tol {}",
                meta.one_minus_theta_star, cfg.boundary_tol
            )));
        }
        let mut profile = Self::from_samples(params, cfg, &lo.samples, lo.v1, meta);
        let gap = profile.ceiling_gap.last().copied().unwrap_or(f64::NAN);
        if !(gap.abs() <= cfg.boundary_tol) {
            return Err(Error::NotConverged(format!(
                "final ceiling gap {gap} above boundary_tol"
            )));
        }
        let r = residual(&profile);
        profile.solver_meta.max_residual = r.max;
        if !(r.max <= cfg.residual_tol) {
            return Err(Error::NotConverged(format!(
                "residual {} at theta = {} above residual_tol {}",
                r.max, r.theta_at_max, cfg.residual_tol
            )));
        }
        Ok(profile)
    }

    pub fn from_samples(
        params: &OdeParams,
        cfg: &SolverConfig,
        samples: &[Sample],
        v1: f64,
        meta: SolverMeta,
    ) -> Self {
        let tail_start = samples.iter().position(|s| s.tail).unwrap_or(samples.len());
        let mut out = SolutionProfile {
            theta_grid: samples.iter().map(|s| s.theta).collect(),
            one_minus_theta: samples.iter().map(|s| s.u).collect(),
            v: samples.iter().map(|s| s.v).collect(),
            v_dot: samples.iter().map(|s| s.v_dot).collect(),
            ceiling_gap: samples.iter().map(|s| s.w).collect(),
            tail_start,
            v1,
            v_dot_at_1: f64::NAN,
            solver_meta: meta,
            config: cfg.clone(),
            params: params.clone(),
        };
        out.v_dot_at_1 = out.extrapolate_v_dot_at_1();
        out
    }

    pub fn len(&self) -> usize {
        self.theta_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_grid.is_empty()
    }

    pub fn float_params(&self) -> FloatParams {
        self.params.to_float()
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            theta: self.theta_grid[i],
            u: self.one_minus_theta[i],
            v: self.v[i],
            w: self.ceiling_gap[i],
            v_dot: self.v_dot[i],
            tail: i >= self.tail_start,
        }
    }

    /// Least-squares line in `1-θ` through the tail points with
    /// `1-θ < 1e-6`, evaluated at θ = 1.
    fn extrapolate_v_dot_at_1(&self) -> f64 {
        let pts: Vec<(f64, f64)> = (0..self.len())
            .filter(|&i| self.one_minus_theta[i] < 1e-6)
            .map(|i| (self.one_minus_theta[i], self.v_dot[i]))
            .collect();
        if pts.len() < 3 {
            return self.v_dot.last().copied().unwrap_or(f64::NAN);
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            return my;
        }
        my - sxy / sxx * mx
    }

    pub fn interpolator(&self) -> Interpolator<'_> {
        Interpolator::new(self)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            theta: f64,
            one_minus_theta: f64,
            #[serde(rename = "V")]
            v: f64,
            #[serde(rename = "V_dot")]
            v_dot: f64,
            ceiling_gap: f64,
        }
        let mut w = csv::Writer::from_path(path)?;
        for i in 0..self.len() {
            w.serialize(Row {
                theta: self.theta_grid[i],
                one_minus_theta: self.one_minus_theta[i],
                v: self.v[i],
                v_dot: self.v_dot[i],
                ceiling_gap: self.ceiling_gap[i],
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            #[serde(flatten)]
            profile: &'a SolutionProfile,
        }
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(
            &mut f,
            &Doc {
                schema_version: SCHEMA_VERSION,
                profile: self,
            },
        )?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Quintic Hermite on `[0, 1]` in the local variable, from values, first
/// and second derivatives (already scaled by the interval length).
fn quintic(y0: f64, d0: f64, s0: f64, y1: f64, d1: f64, s1: f64, t: f64) -> (f64, f64) {
    let dy = y1 - y0;
    let c3 = 10.0 * dy - 6.0 * d0 - 4.0 * d1 - 1.5 * s0 + 0.5 * s1;
    let c4 = -15.0 * dy + 8.0 * d0 + 7.0 * d1 + 1.5 * s0 - s1;
    let c5 = 6.0 * dy - 3.0 * d0 - 3.0 * d1 - 0.5 * s0 + 0.5 * s1;
    let c2 = 0.5 * s0;
    let value = y0 + t * (d0 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
    let slope = d0 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
    (value, slope)
}

/// Evaluates V and its derivatives between grid points. V and V̇ come from
/// quintic Hermite interpolation (in θ before the switch, in s after it);
/// V̈ and V⃛ then come from the equation itself.
pub struct Interpolator<'a> {
    profile: &'a SolutionProfile,
    p: FloatParams,
    v2: f64,
    /// V̈ at the θ-chart points
    acc: Vec<f64>,
    /// (s, W, z, dz/ds) at the s-chart knots, starting with the switch point
    tail: Vec<[f64; 4]>,
}

impl<'a> Interpolator<'a> {
    fn new(profile: &'a SolutionProfile) -> Self {
        let p = profile.float_params();
        let acc = (0..profile.tail_start)
            .map(|i| {
                rhs_theta(&p, profile.theta_grid[i], profile.v[i], profile.v_dot[i])
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let first_tail = profile.tail_start.saturating_sub(1);
        let tail = (first_tail..profile.len())
            .map(|i| {
                let smp = profile.sample(i);
                let pt = TailPoint::new(&p, smp.s(), smp.w, smp.z());
                [pt.s, pt.w, pt.z, rhs_s(&p, &pt).unwrap_or(f64::NAN)]
            })
            .collect();
        Interpolator {
            v2: second_coefficient(&p, profile.v1),
            profile,
            p,
            acc,
            tail,
        }
    }

    pub fn params(&self) -> &FloatParams {
        &self.p
    }

    /// Jet at `θ = 1 - u`; both are passed so that the tail keeps full
    /// precision in `u`.
    pub fn jet(&self, theta: f64, u: f64) -> Result<Jet> {
        let pr = self.profile;
        let first = pr.theta_grid[0];
        if theta < first {
            let v = pr.v1 * theta + self.v2 * theta * theta;
            let v_dot = pr.v1 + 2.0 * self.v2 * theta;
            return jet_theta(&self.p, theta, v, v_dot);
        }
        let n_theta = pr.tail_start;
        let theta_last = pr.theta_grid[n_theta - 1];
        if theta <= theta_last || self.tail.len() < 2 {
            let k = pr.theta_grid[..n_theta]
                .partition_point(|&x| x <= theta)
                .clamp(1, n_theta - 1);
            let (a, b) = (k - 1, k);
            let h = pr.theta_grid[b] - pr.theta_grid[a];
            let t = (theta - pr.theta_grid[a]) / h;
            let (v, dv) = quintic(
                pr.v[a],
                h * pr.v_dot[a],
                h * h * self.acc[a],
                pr.v[b],
                h * pr.v_dot[b],
                h * h * self.acc[b],
                t,
            );
            return jet_theta(&self.p, theta, v, dv / h);
        }
        let s = -u.ln();
        let s_last = self.tail.last().expect("nonempty")[0];
        if s > s_last + 1e-9 {
            return Err(Error::Domain(format!(
                "1 - theta = {u} beyond the end of the profile"
            )));
        }
        let k = self
            .tail
            .partition_point(|kn| kn[0] <= s)
            .clamp(1, self.tail.len() - 1);
        let (a, b) = (self.tail[k - 1], self.tail[k]);
        let h = b[0] - a[0];
        let t = (s - a[0]) / h;
        // W_s = -z, W_ss = -z_s
        let (w, dw) = quintic(
            a[1],
            -h * a[2],
            -h * h * a[3],
            b[1],
            -h * b[2],
            -h * h * b[3],
            t,
        );
        let pt = TailPoint {
            s,
            theta,
            u,
            w,
            v: self.p.v_ceiling - w,
            z: -dw / h,
        };
        jet_tail(&self.p, &pt)
    }
}
