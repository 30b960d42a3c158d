//! Start values near the singular point θ = 0.
//!
//! Solutions with `V(0) = 0` and finite slope are `V = θ φ(θ)` with φ
//! analytic. Substituting `V = v₁θ + v₂θ² + …` and matching the constant
//! term gives
//!
//! ```text
//! (2 + α) v₂ = v₁² S(0) + v₁ (2(1+α′) - ĉ√v₁),    S(0) = Σ m / ā².
//! ```

use crate::error::{Error, Result};

use super::params::FloatParams;

pub fn second_coefficient(p: &FloatParams, v1: f64) -> f64 {
    (v1 * v1 * p.pole_sum(0.0) + v1 * (p.drift() - p.c_hat * v1.sqrt())) / (2.0 + p.alpha)
}

/// `(V(θ₀), V̇(θ₀))` from the two-term expansion.
pub fn series_start(p: &FloatParams, v1: f64, theta0: f64) -> Result<(f64, f64)> {
    if !(v1 > 0.0) || !v1.is_finite() {
        return Err(Error::Domain(format!(
            "initial slope {v1} must be positive"
        )));
    }
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return Err(Error::Domain(format!(
            "start point {theta0} outside (0, 1)"
        )));
    }
    let v2 = second_coefficient(p, v1);
    Ok((v1 * theta0 + v2 * theta0 * theta0, v1 + 2.0 * v2 * theta0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{CaseSpec, Fiber};
    use crate::ode::make_params;
    use crate::ode::rhs::rhs_theta;

    fn params() -> Vec<FloatParams> {
        [
            CaseSpec::case1(2, Fiber::Quadric).unwrap(),
            CaseSpec::case1(3, Fiber::ProjectiveSpace).unwrap(),
            CaseSpec::case3(4).unwrap(),
            CaseSpec::case4(Fiber::ProjectiveSpace),
        ]
        .iter()
        .map(|c| make_params(c, None).unwrap().to_float())
        .collect()
    }

    fn residual(p: &FloatParams, v1: f64, theta: f64) -> f64 {
        let (v, v_dot) = series_start(p, v1, theta).unwrap();
        let v_ddot = 2.0 * second_coefficient(p, v1);
        (v_ddot - rhs_theta(p, theta, v, v_dot).unwrap()).abs()
    }

    #[test]
    fn residual_shrinks_with_the_start_point() {
        for p in params() {
            for v1 in [0.3, 1.0, 2.5] {
                let r1 = residual(&p, v1, 1e-3);
                let r2 = residual(&p, v1, 5e-4);
                assert!(r1 / r2 >= 1.9, "ratio {} for v1 = {v1}", r1 / r2);
            }
        }
    }

    #[test]
    fn leading_order() {
        let p = &params()[0];
        for theta in [1e-4, 1e-6, 1e-8] {
            let (v, _) = series_start(p, 1.0, theta).unwrap();
            assert!((v / theta - 1.0).abs() < 2.0 * theta);
            assert!(v / theta > 0.5 && v / theta < 1.5);
        }
    }

    #[test]
    fn rejects_bad_slopes() {
        let p = &params()[0];
        assert!(series_start(p, 0.0, 1e-6).is_err());
        assert!(series_start(p, -1.0, 1e-6).is_err());
        assert!(series_start(p, 1.0, 0.0).is_err());
    }
}
