//! Dormand-Prince 5(4) with embedded error control.
//!
//! Stage evaluations may fail (the state left the domain of the equation);
//! such a step is rejected and retried with a smaller step.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-11,
            atol: 1e-14,
            h_min: 1e-15,
            max_steps: 2_000_000,
        }
    }
}

/// One accepted step with end-point values and slopes.
#[derive(Clone, Copy, Debug)]
pub struct Step<const N: usize> {
    pub x0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub x1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
    /// Scaled error estimate of the step (≤ 1 when accepted).
    pub err: f64,
}

impl<const N: usize> Step<N> {
    /// Cubic Hermite interpolant through both end points.
    pub fn interpolate(&self, x: f64) -> [f64; N] {
        let h = self.x1 - self.x0;
        let t = (x - self.x0) / h;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] =
                h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        y
    }
}

pub enum Control {
    Continue,
    Stop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Finish {
    Reached,
    Stopped,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `y' = f(x, y)` from `x0` to `x_end`, calling `on_step` after
/// every accepted step. `h_max(x)` caps the step taken from `x`.
#[allow(clippy::too_many_arguments)]
pub fn integrate<const N: usize, F, H, S>(
    f: F,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    h0: f64,
    h_max: H,
    ctl: &StepControl,
    mut on_step: S,
) -> Result<Finish>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    H: Fn(f64) -> f64,
    S: FnMut(&Step<N>) -> Result<Control>,
{
    let mut x = x0;
    let mut y = y0;
    let mut fx = f(x, &y)?;
    let mut h = h0.min(h_max(x)).min(x_end - x);
    let mut last_error: Option<Error> = None;

    for _ in 0..ctl.max_steps {
        if x >= x_end {
            return Ok(Finish::Reached);
        }
        let cap = h_max(x);
        h = h.min(cap).min(x_end - x);
        if h < ctl.h_min * x.abs().max(1.0) {
            return Err(last_error.unwrap_or(Error::StepUnderflow { at: x }));
        }

        match try_step(&f, x, &y, &fx, h) {
            Ok((y1, f1, e)) => {
                let mut sq = 0.0;
                for i in 0..N {
                    let sc = ctl.atol + ctl.rtol * y[i].abs().max(y1[i].abs());
                    sq += (e[i] / sc).powi(2);
                }
                let err = (sq / N as f64).sqrt();
                if err <= 1.0 && err.is_finite() {
                    let x1 = if x_end - (x + h) <= 1e-15 * x_end.abs() {
                        x_end
                    } else {
                        x + h
                    };
                    let step = Step {
                        x0: x,
                        y0: y,
                        f0: fx,
                        x1,
                        y1,
                        f1,
                        err,
                    };
                    x = x1;
                    y = y1;
                    fx = f1;
                    last_error = None;
                    if let Control::Stop = on_step(&step)? {
                        return Ok(Finish::Stopped);
                    }
                    let fac = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h *= fac;
                } else {
                    let fac = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                    } else {
                        0.25
                    };
                    h *= fac;
                }
            }
            Err(e) => {
                last_error = Some(e);
                h *= 0.25;
            }
        }
    }
    Err(Error::NotConverged(format!(
        "step budget of {} exhausted at x = {x}",
        ctl.max_steps
    )))
}

#[allow(clippy::type_complexity)]
fn try_step<const N: usize, F>(
    f: &F,
    x: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
) -> Result<([f64; N], [f64; N], [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    k[0] = *f0;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = f(x + C[s] * h, &ys)?;
        if k[s].iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite slope at x = {}",
                x + C[s] * h
            )));
        }
    }
    // The last stage is evaluated at the fifth-order solution.
    let mut y1 = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        for i in 0..N {
            y1[i] += h * A[6][j] * kj[i];
        }
    }
    let mut e = [0.0; N];
    for (j, kj) in k.iter().enumerate() {
        for i in 0..N {
            e[i] += h * E[j] * kj[i];
        }
    }
    Ok((y1, k[6], e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run<const N: usize, F>(
        f: F,
        y0: [f64; N],
        x_end: f64,
        ctl: &StepControl,
    ) -> ([f64; N], usize)
    where
        F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let mut last = y0;
        let mut n = 0;
        integrate(
            f,
            0.0,
            y0,
            x_end,
            1e-3,
            |_| f64::INFINITY,
            ctl,
            |s| {
                last = s.y1;
                n += 1;
                Ok(Control::Continue)
            },
        )
        .unwrap();
        (last, n)
    }

    #[test]
    fn harmonic_oscillator() {
        let ctl = StepControl {
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        };
        let (y, _) = run(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), [0.0, 1.0], 10.0, &ctl);
        assert!((y[0] - 10f64.sin()).abs() < 1e-10);
        assert!((y[1] - 10f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn fifth_order_convergence() {
        // Fixed steps via a tight cap: error ratio for h and h/2 near 32.
        let err = |h: f64| {
            let ctl = StepControl {
                rtol: 1.0,
                atol: 1.0,
                ..Default::default()
            };
            let mut last = [1.0];
            integrate(
                |_, y: &[f64; 1]| Ok([y[0]]),
                0.0,
                [1.0],
                1.0,
                h,
                |_| h,
                &ctl,
                |s| {
                    last = s.y1;
                    Ok(Control::Continue)
                },
            )
            .unwrap();
            (last[0] - 1f64.exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 25.0 && ratio < 40.0, "ratio {ratio}");
    }

    #[test]
    fn domain_failure_shrinks_the_step() {
        // y' = -√y reaches zero at x = 2; a first step of 1.5 overshoots.
        let f = |_: f64, y: &[f64; 1]| {
            if y[0] < 0.0 {
                Err(Error::Domain("negative".into()))
            } else {
                Ok([-y[0].sqrt()])
            }
        };
        let mut last = [1.0];
        integrate(
            f,
            0.0,
            [1.0],
            1.9,
            1.5,
            |_| f64::INFINITY,
            &StepControl::default(),
            |s| {
                last = s.y1;
                Ok(Control::Continue)
            },
        )
        .unwrap();
        assert!((last[0] - 0.0025).abs() < 1e-9, "{}", last[0]);
    }

    #[test]
    fn persistent_failure_is_reported() {
        let f = |x: f64, _: &[f64; 1]| {
            if x > 0.5 {
                Err(Error::Domain("wall".into()))
            } else {
                Ok([1.0])
            }
        };
        let r = integrate(
            f,
            0.0,
            [0.0],
            1.0,
            0.1,
            |_| f64::INFINITY,
            &StepControl::default(),
            |_| Ok(Control::Continue),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn stop_request_and_hermite_interpolation() {
        let mut hit = None;
        let r = integrate(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            10.0,
            0.01,
            |_| 0.05,
            &StepControl::default(),
            |s| {
                if s.y1[0] < 0.0 {
                    let mid = s.interpolate(0.5 * (s.x0 + s.x1));
                    let xm = 0.5 * (s.x0 + s.x1);
                    assert!((mid[0] - xm.sin()).abs() < 1e-7);
                    hit = Some(s.x1);
                    return Ok(Control::Stop);
                }
                Ok(Control::Continue)
            },
        )
        .unwrap();
        assert_eq!(r, Finish::Stopped);
        let x = hit.unwrap();
        assert!(x > std::f64::consts::PI && x < std::f64::consts::PI + 0.05);
    }
}
