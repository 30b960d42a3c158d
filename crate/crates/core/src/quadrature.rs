//! Exact evaluation of the integral whose sign decides existence.
//!
//! With `x = u²` the integrand `g(x) = (1 + 2α′ - ĉ√x) x^α ∏(ā² - x)^m`
//! becomes the polynomial `p(u) = 2u·g(u²)`, because `2α = N_F - 1` is an
//! integer. The integral over `[0, V_ĉ]` is then `∫ p` over `[0, √V_ĉ]`,
//! computed by exact antidifferentiation.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::OdeParams;
use crate::poly::RationalPolynomial;
use crate::rational::{self, int, ExactValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(q: &BigRational) -> Self {
        match q.cmp(&BigRational::zero()) {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignIntegralResult {
    pub value: ExactValue,
    pub sign: Sign,
    pub integrand_degree: usize,
    /// Nearest double, for display only.
    pub approx: f64,
}

/// `p(u) = 2(1 + 2α′ - ĉu) u^{2α+1} ∏(ā² - u²)^m`.
pub fn build_g(params: &OdeParams) -> Result<RationalPolynomial> {
    let two_alpha = int(2) * &params.alpha;
    if !two_alpha.is_integer() || two_alpha.is_negative() {
        return Err(Error::NonIntegerExponent(rational::to_string(&two_alpha)));
    }
    let power = two_alpha
        .to_integer()
        .to_usize()
        .ok_or_else(|| Error::NonIntegerExponent(rational::to_string(&two_alpha)))?
        + 1;

    let linear = RationalPolynomial::new(vec![
        int(2) * (int(1) + int(2) * &params.alpha_prime),
        int(-2) * &params.c_hat,
    ]);
    let mut p = linear.shift(power);
    for a in &params.a_bars {
        let factor = RationalPolynomial::new(vec![&a.value * &a.value, int(0), int(-1)]);
        p = &p * &factor.pow(a.multiplicity);
    }
    Ok(p)
}

/// `∫₀^{V_ĉ} g(x) dx` in exact arithmetic.
pub fn sign_integral(params: &OdeParams) -> Result<SignIntegralResult> {
    let p = build_g(params)?;
    let value = p.definite_integral(&BigRational::zero(), &params.sqrt_ceiling());
    Ok(SignIntegralResult {
        sign: Sign::of(&value),
        integrand_degree: p.degree().unwrap_or(0),
        approx: rational::to_f64(&value),
        value: ExactValue::from(&value),
    })
}

/// The point `((1+2α′)/ĉ)²` where `g` changes sign.
pub fn g_zero_crossing(params: &OdeParams) -> BigRational {
    let r = (int(1) + int(2) * &params.alpha_prime) / &params.c_hat;
    &r * &r
}
