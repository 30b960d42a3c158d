//! Root data on a Cartan subalgebra and the pairing ratios that feed the ODE.
//!
//! Vectors are stored in the ε-coordinates of the case's Lie algebra. For the
//! classical cases the invariant form is the plain dot product (every ratio
//! we need is invariant under rescaling the form). The exceptional algebra
//! uses a non-orthonormal basis, handled by [`CartanForm::E6`].

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::catalog::CaseSpec;
use crate::error::{Error, Result};
use crate::rational::{self, int, rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootVector {
    #[serde(with = "rational::vec_as_string")]
    coords: Vec<BigRational>,
}

impl RootVector {
    pub fn new(coords: Vec<BigRational>) -> Self {
        RootVector { coords }
    }

    pub fn zeros(n: usize) -> Self {
        RootVector {
            coords: vec![BigRational::zero(); n],
        }
    }

    pub fn from_ints(cs: &[i64]) -> Self {
        RootVector {
            coords: cs.iter().map(|&c| int(c)).collect(),
        }
    }

    /// The basis vector ε_{i+1} (zero-based index).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.coords[i] = int(1);
        v
    }

    /// ε_i - ε_j (zero-based)
    pub fn difference(n: usize, i: usize, j: usize) -> Self {
        let mut v = Self::zeros(n);
        v.coords[i] += int(1);
        v.coords[j] -= int(1);
        v
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coord_sum(&self) -> BigRational {
        self.coords.iter().fold(BigRational::zero(), |a, c| a + c)
    }

    pub fn scaled(&self, c: &BigRational) -> Self {
        RootVector {
            coords: self.coords.iter().map(|x| x * c).collect(),
        }
    }

    pub fn plus(&self, other: &RootVector) -> Result<Self> {
        check_len(self, other)?;
        Ok(RootVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Subtract the coordinate mean so the vector lies in the trace-free
    /// hyperplane. Pairings with trace-free vectors are unchanged.
    pub fn trace_free_part(&self) -> Self {
        if self.coords.is_empty() {
            return self.clone();
        }
        let mean = self.coord_sum() / int(self.coords.len() as i64);
        RootVector {
            coords: self.coords.iter().map(|c| c - &mean).collect(),
        }
    }
}

impl fmt::Display for RootVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(rational::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn check_len(a: &RootVector, b: &RootVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Euclidean pairing of coordinate vectors.
pub fn pairing(a: &RootVector, b: &RootVector) -> Result<BigRational> {
    check_len(a, b)?;
    Ok(a.coords
        .iter()
        .zip(&b.coords)
        .fold(BigRational::zero(), |acc, (x, y)| acc + x * y))
}

/// Invariant bilinear form on the Cartan subalgebra, up to scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CartanForm {
    Euclidean,
    /// Seven coordinates (ε₁..ε₆, ε): the ε_i carry the Gram matrix
    /// δ_ij - 1/6 of the weights of the 6-dimensional representation of
    /// sl₆, the extra ε has square 1/2 and is orthogonal to them.
    E6,
}

impl CartanForm {
    pub fn pair(self, a: &RootVector, b: &RootVector) -> Result<BigRational> {
        match self {
            CartanForm::Euclidean => pairing(a, b),
            CartanForm::E6 => {
                check_len(a, b)?;
                if a.len() != 7 {
                    return Err(Error::InvalidCase(format!(
                        "E6 vectors need 7 coordinates, got {}",
                        a.len()
                    )));
                }
                let (x, y) = (&a.coords, &b.coords);
                let dot6 = (0..6).fold(BigRational::zero(), |acc, i| acc + &x[i] * &y[i]);
                let sx = x[..6].iter().fold(BigRational::zero(), |acc, c| acc + c);
                let sy = y[..6].iter().fold(BigRational::zero(), |acc, c| acc + c);
                Ok(dot6 - sx * sy * rat(1, 6) + &x[6] * &y[6] * rat(1, 2))
            }
        }
    }
}

/// One value of the ratio column with how often it occurs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaValue {
    #[serde(with = "rational::as_string")]
    pub value: BigRational,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingReport {
    /// Sorted by value. Families of the ratio column that have no roots
    /// (e.g. an su₂ factor) are kept with multiplicity zero.
    pub kappa_values: Vec<KappaValue>,
    #[serde(with = "rational::as_string")]
    pub theta_d_norm_sq: BigRational,
    pub condition_d: bool,
}

impl PairingReport {
    /// Total number of roots counted with multiplicity.
    pub fn root_count(&self) -> u32 {
        self.kappa_values.iter().map(|k| k.multiplicity).sum()
    }

    /// Distinct positive values with their multiplicities.
    pub fn positive_half(&self) -> Vec<KappaValue> {
        self.kappa_values
            .iter()
            .filter(|k| k.value.is_positive())
            .cloned()
            .collect()
    }

    /// Whether the multiset is invariant under negation.
    pub fn is_symmetric(&self) -> bool {
        let m: BTreeMap<&BigRational, u32> = self
            .kappa_values
            .iter()
            .map(|k| (&k.value, k.multiplicity))
            .collect();
        self.kappa_values
            .iter()
            .all(|k| m.get(&-&k.value) == Some(&k.multiplicity))
    }
}

/// Ratios ⟨θ^κ, β⟩ / ⟨θ_D, β⟩ over the positive roots, checked against the
/// catalog's ratio column.
pub fn kappa_ratios(case: &CaseSpec) -> Result<PairingReport> {
    let form = case.form;
    let theta_d_norm_sq = form.pair(&case.theta_d, &case.theta_d)?;
    let cross = form.pair(&case.theta_kappa, &case.theta_d)?;
    if !cross.is_zero() {
        return Err(Error::CatalogMismatch(format!(
            "{}: <theta_kappa, theta_D> = {} (expected 0)",
            case.label(),
            rational::to_string(&cross)
        )));
    }

    let mut counts: BTreeMap<BigRational, u32> = BTreeMap::new();
    for (beta, mult) in &case.positive_roots {
        let d = form.pair(&case.theta_d, beta)?;
        if d.is_zero() {
            return Err(Error::DegenerateRoot {
                root: beta.to_string(),
            });
        }
        let k = form.pair(&case.theta_kappa, beta)? / d;
        *counts.entry(k).or_default() += mult;
    }

    let expected = case.expected_kappa();
    for (value, mult) in &counts {
        if expected.get(value) != Some(mult) {
            return Err(Error::CatalogMismatch(format!(
                "{}: ratio {} occurs {} times, ratio column says {:?}",
                case.label(),
                rational::to_string(value),
                mult,
                expected.get(value)
            )));
        }
    }
    for (value, mult) in &expected {
        if *mult > 0 && !counts.contains_key(value) {
            return Err(Error::CatalogMismatch(format!(
                "{}: ratio {} missing from the roots",
                case.label(),
                rational::to_string(value)
            )));
        }
        counts.entry(value.clone()).or_insert(0);
    }

    if let Some(n) = &case.expected_theta_d_norm_sq {
        if *n != theta_d_norm_sq {
            return Err(Error::CatalogMismatch(format!(
                "{}: <theta_D, theta_D> = {}, catalog says {}",
                case.label(),
                rational::to_string(&theta_d_norm_sq),
                rational::to_string(n)
            )));
        }
    }

    let kappa_values: Vec<KappaValue> = counts
        .into_iter()
        .map(|(value, multiplicity)| KappaValue {
            value,
            multiplicity,
        })
        .collect();
    let condition_d = magnitude_bound(&kappa_values, &theta_d_norm_sq, case.n_f, case.epsilon_f);
    Ok(PairingReport {
        kappa_values,
        theta_d_norm_sq,
        condition_d,
    })
}

fn magnitude_bound(kappa: &[KappaValue], norm_sq: &BigRational, n_f: u32, eps: u32) -> bool {
    let bound = int(i64::from(n_f + eps));
    kappa.iter().all(|k| norm_sq * k.value.abs() > bound)
}

/// ⟨θ_D,θ_D⟩·|κ| > N_F + ε_F for every ratio value, including ratio-column
/// families without roots. Malformed catalog data counts as a failure.
pub fn condition_d_holds(case: &CaseSpec) -> bool {
    kappa_ratios(case).map(|r| r.condition_d).unwrap_or(false)
}
