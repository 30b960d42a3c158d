//! Normalized coefficients of the profile equation.

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::catalog::CaseSpec;
use crate::error::{Error, Result};
use crate::rational::{self, int, to_f64};
use crate::roots::kappa_ratios;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ABar {
    #[serde(with = "rational::as_string")]
    pub value: BigRational,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeParams {
    #[serde(with = "rational::as_string")]
    pub alpha: BigRational,
    #[serde(with = "rational::as_string")]
    pub alpha_prime: BigRational,
    #[serde(with = "rational::as_string")]
    pub c_hat: BigRational,
    #[serde(with = "rational::as_string")]
    pub v_ceiling: BigRational,
    pub a_bars: Vec<ABar>,
    pub n_f: u32,
    pub epsilon_f: u32,
    #[serde(with = "rational::as_string")]
    pub theta_d_norm_sq: BigRational,
    #[serde(with = "rational::as_string")]
    pub einstein_constant: BigRational,
    /// Every ā² strictly above the ceiling.
    pub condition_d: bool,
}

impl OdeParams {
    /// Parameters from the fiber data and the positive ratio values
    /// `(κ, multiplicity)`. `c_hat = None` selects the normalization with
    /// ceiling 1.
    pub fn new(
        n_f: u32,
        epsilon_f: u32,
        theta_d_norm_sq: BigRational,
        kappa_positive: &[(BigRational, u32)],
        c_hat: Option<BigRational>,
    ) -> Result<Self> {
        if n_f == 0 || !(epsilon_f == 1 || epsilon_f == 2) {
            return Err(Error::InvalidCase(format!(
                "N_F = {n_f}, epsilon_F = {epsilon_f}"
            )));
        }
        if !theta_d_norm_sq.is_positive() {
            return Err(Error::InvalidCase(
                "<theta_D, theta_D> must be positive".into(),
            ));
        }
        let nf = int(i64::from(n_f));
        let eps = int(i64::from(epsilon_f));
        let alpha = (&nf - int(1)) / int(2);
        let alpha_prime = (&nf / &eps - int(1)) / int(2);
        let c_hat = c_hat.unwrap_or_else(|| int(2) * (int(1) + &alpha_prime));
        if !c_hat.is_positive() {
            return Err(Error::Config(format!(
                "c_hat = {} must be positive",
                rational::to_string(&c_hat)
            )));
        }
        let r = (&alpha_prime + int(1)) / &c_hat;
        let v_ceiling = int(4) * &r * &r;
        let a_bars: Vec<ABar> = kappa_positive
            .iter()
            .map(|(k, m)| ABar {
                value: k.abs() * &theta_d_norm_sq / (&c_hat * &eps),
                multiplicity: *m,
            })
            .collect();
        let condition_d = a_bars.iter().all(|a| &a.value * &a.value > v_ceiling);
        let einstein_constant = &c_hat * &eps / &theta_d_norm_sq;
        Ok(OdeParams {
            alpha,
            alpha_prime,
            c_hat,
            v_ceiling,
            a_bars,
            n_f,
            epsilon_f,
            theta_d_norm_sq,
            einstein_constant,
            condition_d,
        })
    }

    /// `2 ε_F ĉ`, the constant of the equation in the t variable.
    pub fn c_tilde(&self) -> BigRational {
        int(2 * i64::from(self.epsilon_f)) * &self.c_hat
    }

    /// `√V_ĉ = 2(1+α′)/ĉ`, always rational.
    pub fn sqrt_ceiling(&self) -> BigRational {
        int(2) * (&self.alpha_prime + int(1)) / &self.c_hat
    }

    /// Smallest ā², the upper edge of the admissible range of V.
    pub fn min_a_bar_sq(&self) -> Option<BigRational> {
        self.a_bars.iter().map(|a| &a.value * &a.value).min()
    }

    pub fn to_float(&self) -> FloatParams {
        FloatParams {
            alpha: to_f64(&self.alpha),
            alpha_prime: to_f64(&self.alpha_prime),
            c_hat: to_f64(&self.c_hat),
            v_ceiling: to_f64(&self.v_ceiling),
            a_bar_sq: self
                .a_bars
                .iter()
                .filter(|a| a.multiplicity > 0)
                .map(|a| (to_f64(&(&a.value * &a.value)), f64::from(a.multiplicity)))
                .collect(),
            epsilon: f64::from(self.epsilon_f),
        }
    }
}

/// Build parameters for a catalog case.
pub fn make_params(case: &CaseSpec, c_hat: Option<BigRational>) -> Result<OdeParams> {
    let report = kappa_ratios(case)?;
    let positive: Vec<(BigRational, u32)> = report
        .positive_half()
        .into_iter()
        .map(|k| (k.value, k.multiplicity))
        .collect();
    let params = OdeParams::new(
        case.n_f,
        case.epsilon_f,
        report.theta_d_norm_sq.clone(),
        &positive,
        c_hat,
    )?;
    if params.condition_d != report.condition_d {
        return Err(Error::CatalogMismatch(format!(
            "{}: ratio bound says {}, normalized bound says {}",
            case.label(),
            report.condition_d,
            params.condition_d
        )));
    }
    Ok(params)
}

/// Double-precision copy of the parameters used inside the integrator.
/// Families without roots are dropped since they contribute nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatParams {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub c_hat: f64,
    pub v_ceiling: f64,
    /// (ā², multiplicity)
    pub a_bar_sq: Vec<(f64, f64)>,
    pub epsilon: f64,
}

impl FloatParams {
    /// `2(1+α′)`
    pub fn drift(&self) -> f64 {
        2.0 * (1.0 + self.alpha_prime)
    }

    pub fn min_a_bar_sq(&self) -> f64 {
        self.a_bar_sq
            .iter()
            .map(|&(a, _)| a)
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ mult / (ā² - V)`
    pub fn pole_sum(&self, v: f64) -> f64 {
        self.a_bar_sq.iter().map(|&(a2, m)| m / (a2 - v)).sum()
    }

    /// `Σ mult / (ā² - V)²`
    pub fn pole_sum_sq(&self, v: f64) -> f64 {
        self.a_bar_sq
            .iter()
            .map(|&(a2, m)| m / ((a2 - v) * (a2 - v)))
            .sum()
    }
}
