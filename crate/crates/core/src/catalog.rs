//! The five families of bundles over flag manifolds, their root data and the
//! expected existence verdict for each member.
//!
//! Cases are keyed by the rank parameters of the Lie algebra: `ℓ` for
//! `su_{ℓ+1}` (cases 1 and 3) and `(p, q)` for `su_{p+1} ⊕ su_{q+1}` (case 2).
//! In group terms case 1 is `SU_{ℓ+1}`, so `SU_3` is `ℓ = 2`, and the
//! `SU_p × SU_2` exception of case 2 is `min(p, q) = 1`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, int, rat};
use crate::roots::{CartanForm, RootVector};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Fiber {
    Quadric,
    ProjectiveSpace,
}

impl Fiber {
    /// Winding constant of the transversal circle at the singular orbit.
    pub fn epsilon(self) -> u32 {
        match self {
            Fiber::Quadric => 1,
            Fiber::ProjectiveSpace => 2,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Fiber::Quadric => "Q",
            Fiber::ProjectiveSpace => "CP",
        }
    }
}

impl std::str::FromStr for Fiber {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q" | "quadric" => Ok(Fiber::Quadric),
            "cp" | "projective" | "projectivespace" | "projective_space" => {
                Ok(Fiber::ProjectiveSpace)
            }
            _ => Err(Error::InvalidCase(format!(
                "unknown fiber {s:?} (expected Q or CP)"
            ))),
        }
    }
}

/// A pair `±magnitude` of the ratio column, each sign occurring
/// `multiplicity` times. Multiplicity zero marks a family whose root set is
/// empty for the given ranks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaFamily {
    #[serde(with = "rational::as_string")]
    pub magnitude: BigRational,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub case_id: u8,
    pub rank_params: Vec<u32>,
    pub fiber: Fiber,
    pub epsilon_f: u32,
    pub n_f: u32,
    pub form: CartanForm,
    pub theta_d: RootVector,
    pub theta_kappa: RootVector,
    pub positive_roots: Vec<(RootVector, u32)>,
    /// The ratio column as tabulated, used to cross-check the computed ratios.
    pub kappa_column: Vec<KappaFamily>,
    /// Tabulated `⟨θ_D, θ_D⟩` where the coordinates alone do not pin it.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_rational"
    )]
    pub expected_theta_d_norm_sq: Option<BigRational>,
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        q: &Option<BigRational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&rational::to_string(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<BigRational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| {
            rational::parse(&s)
                .ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
        })
        .transpose()
    }
}

fn half(coords: &[i64]) -> RootVector {
    RootVector::new(coords.iter().map(|&c| rat(c, 2)).collect())
}

fn family(magnitude: i64, multiplicity: u32) -> KappaFamily {
    KappaFamily {
        magnitude: int(magnitude),
        multiplicity,
    }
}

/// Roots εᵢ - εₐ with i in `tops` and a in `offset + bottoms`, inside an
/// ambient space of dimension `n`.
fn block_roots(
    n: usize,
    tops: std::ops::Range<usize>,
    bottoms: std::ops::Range<usize>,
) -> Vec<(RootVector, u32)> {
    let mut out = Vec::new();
    for i in tops {
        for a in bottoms.clone() {
            out.push((RootVector::difference(n, i, a), 1));
        }
    }
    out
}

/// θ^κ for an `su` block: `top` on the first `k` coordinates, `-bottom` on
/// the remaining ones.
fn block_weight(k: usize, top: i64, n_rest: usize, bottom: i64) -> Vec<i64> {
    let mut v = vec![top; k];
    v.extend(std::iter::repeat(-bottom).take(n_rest));
    v
}

impl CaseSpec {
    pub fn new(case_id: u8, rank_params: &[u32], fiber: Fiber) -> Result<Self> {
        let wrong_arity = || {
            Error::InvalidCase(format!(
                "case {case_id} takes {} rank parameter(s), got {}",
                match case_id {
                    2 => 2,
                    4 | 5 => 0,
                    _ => 1,
                },
                rank_params.len()
            ))
        };
        match case_id {
            1 => match rank_params {
                [l] => Self::case1(*l, fiber),
                _ => Err(wrong_arity()),
            },
            2 | 3 if fiber == Fiber::Quadric => Err(Error::InvalidCase(format!(
                "case {case_id} only admits the projective fiber"
            ))),
            2 => match rank_params {
                [p, q] => Self::case2(*p, *q),
                _ => Err(wrong_arity()),
            },
            3 => match rank_params {
                [l] => Self::case3(*l),
                _ => Err(wrong_arity()),
            },
            4 | 5 if !rank_params.is_empty() => Err(wrong_arity()),
            4 => Ok(Self::case4(fiber)),
            5 => Ok(Self::case5(fiber)),
            _ => Err(Error::InvalidCase(format!(
                "case id {case_id} not in 1..=5"
            ))),
        }
    }

    /// `su_{ℓ+1}` with an `su_2` fiber algebra, `ℓ ≥ 2`.
    pub fn case1(l: u32, fiber: Fiber) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidCase(format!("case 1 needs l >= 2, got {l}")));
        }
        let n = l as usize + 1;
        let li = i64::from(l);
        let mut theta_d = vec![0; n];
        theta_d[0] = -1;
        theta_d[1] = 1;
        Ok(CaseSpec {
            case_id: 1,
            rank_params: vec![l],
            fiber,
            epsilon_f: fiber.epsilon(),
            n_f: 1,
            form: CartanForm::Euclidean,
            theta_d: half(&theta_d),
            theta_kappa: RootVector::from_ints(&block_weight(2, li - 1, n - 2, 2)),
            positive_roots: block_roots(n, 0..2, 2..n),
            kappa_column: vec![family(2 * (li + 1), l - 1)],
            expected_theta_d_norm_sq: None,
        })
    }

    /// `su_{p+1} ⊕ su_{q+1}`, `p + q > 2`, projective fiber only.
    pub fn case2(p: u32, q: u32) -> Result<Self> {
        if p < 1 || q < 1 || p + q <= 2 {
            return Err(Error::InvalidCase(format!(
                "case 2 needs p, q >= 1 and p + q > 2, got ({p}, {q})"
            )));
        }
        let (np, nq) = (p as usize + 1, q as usize + 1);
        let n = np + nq;
        let (pi, qi) = (i64::from(p), i64::from(q));

        let mut theta_d = vec![0; n];
        theta_d[0] = -1;
        theta_d[1] = 1;
        theta_d[np] = -1;
        theta_d[np + 1] = 1;

        let mut theta_kappa = block_weight(2, pi - 1, np - 2, 2);
        theta_kappa.extend(block_weight(2, qi - 1, nq - 2, 2));

        let mut roots = block_roots(n, 0..2, 2..np);
        roots.extend(block_roots(n, np..np + 2, np + 2..n));

        Ok(CaseSpec {
            case_id: 2,
            rank_params: vec![p, q],
            fiber: Fiber::ProjectiveSpace,
            epsilon_f: 2,
            n_f: 2,
            form: CartanForm::Euclidean,
            theta_d: half(&theta_d),
            theta_kappa: RootVector::from_ints(&theta_kappa),
            positive_roots: roots,
            kappa_column: vec![family(2 * (pi + 1), p - 1), family(2 * (qi + 1), q - 1)],
            expected_theta_d_norm_sq: None,
        })
    }

    /// `su_{ℓ+1}` with an `so_6` fiber algebra, `ℓ ≥ 4`, projective fiber only.
    pub fn case3(l: u32) -> Result<Self> {
        if l < 4 {
            return Err(Error::InvalidCase(format!("case 3 needs l >= 4, got {l}")));
        }
        let n = l as usize + 1;
        let li = i64::from(l);
        let mut theta_d = vec![0; n];
        theta_d[..4].copy_from_slice(&[-1, -1, 1, 1]);
        // The tabulated weight has coordinate sum 8; only its trace-free
        // part is a weight of su_{ℓ+1}. Pairings with roots are unaffected.
        let theta_kappa =
            RootVector::from_ints(&block_weight(4, li - 1, n - 4, 4)).trace_free_part();
        Ok(CaseSpec {
            case_id: 3,
            rank_params: vec![l],
            fiber: Fiber::ProjectiveSpace,
            epsilon_f: 2,
            n_f: 4,
            form: CartanForm::Euclidean,
            theta_d: half(&theta_d),
            theta_kappa,
            positive_roots: block_roots(n, 0..4, 4..n),
            kappa_column: vec![family(2 * (li + 3), 2 * (l - 3))],
            expected_theta_d_norm_sq: None,
        })
    }

    /// `so_10` with an `so_8` fiber algebra.
    pub fn case4(fiber: Fiber) -> Self {
        let mut roots = Vec::new();
        for i in 1..5 {
            for sign in [1, -1] {
                let mut v = vec![0; 5];
                v[0] = 1;
                v[i] = sign;
                roots.push((RootVector::from_ints(&v), 1));
            }
        }
        CaseSpec {
            case_id: 4,
            rank_params: vec![],
            fiber,
            epsilon_f: fiber.epsilon(),
            n_f: 6,
            form: CartanForm::Euclidean,
            theta_d: half(&[0, 1, 1, 1, 1]),
            theta_kappa: RootVector::from_ints(&[8, 0, 0, 0, 0]),
            positive_roots: roots,
            kappa_column: vec![family(16, 4)],
            expected_theta_d_norm_sq: None,
        }
    }

    /// `e_6` with an `so_10` fiber algebra, coordinates (ε₁..ε₆, ε).
    pub fn case5(fiber: Fiber) -> Self {
        let mut roots = Vec::new();
        for i in 0..5 {
            roots.push((RootVector::difference(7, i, 5), 1));
        }
        for i in 0..5 {
            for j in i + 1..5 {
                for k in j + 1..5 {
                    let mut v = vec![0; 7];
                    v[i] = 1;
                    v[j] = 1;
                    v[k] = 1;
                    v[6] = 1;
                    roots.push((RootVector::from_ints(&v), 1));
                }
            }
        }
        roots.push((RootVector::from_ints(&[0, 0, 0, 0, 0, 0, 2]), 1));
        CaseSpec {
            case_id: 5,
            rank_params: vec![],
            fiber,
            epsilon_f: fiber.epsilon(),
            n_f: 8,
            form: CartanForm::E6,
            theta_d: half(&[-2, 0, 0, 0, 0, -1, -1]),
            theta_kappa: RootVector::from_ints(&[0, 0, 0, 0, 0, -12, 12]),
            positive_roots: roots,
            kappa_column: vec![family(24, 8)],
            expected_theta_d_norm_sq: Some(int(1)),
        }
    }

    /// The ratio column as a map value → multiplicity, with ± pairs
    /// expanded and coinciding families merged.
    pub fn expected_kappa(&self) -> BTreeMap<BigRational, u32> {
        let mut m = BTreeMap::new();
        for f in &self.kappa_column {
            *m.entry(f.magnitude.clone()).or_insert(0) += f.multiplicity;
            *m.entry(-f.magnitude.clone()).or_insert(0) += f.multiplicity;
        }
        m
    }

    /// Number of positive roots counted with multiplicity.
    pub fn root_count(&self) -> u32 {
        self.positive_roots.iter().map(|(_, m)| m).sum()
    }

    pub fn group_name(&self) -> String {
        match (self.case_id, self.rank_params.as_slice()) {
            (1 | 3, [l]) => format!("SU_{}", l + 1),
            (2, [p, q]) => format!("SU_{} x SU_{}", p + 1, q + 1),
            (4, _) => "SO_10".into(),
            _ => "E_6".into(),
        }
    }

    /// Complex dimension of the fiber.
    pub fn fiber_dim(&self) -> u32 {
        self.n_f + 1
    }

    pub fn fiber_name(&self) -> String {
        match self.fiber {
            Fiber::Quadric => format!("Q^{}", self.fiber_dim()),
            Fiber::ProjectiveSpace => format!("CP^{}", self.fiber_dim()),
        }
    }

    pub fn label(&self) -> String {
        let params = match (self.case_id, self.rank_params.as_slice()) {
            (2, [p, q]) => format!(" p={p} q={q}"),
            (_, [l]) => format!(" l={l}"),
            _ => String::new(),
        };
        format!("case {}{} {}", self.case_id, params, self.fiber_name())
    }
}

impl fmt::Display for CaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.group_name())
    }
}

/// Every case with rank parameters in `1..=max_rank`. Case 2 is symmetric in
/// `(p, q)` and listed once with `p >= q`. Cases 4 and 5 have no rank
/// parameter and are listed whenever `max_rank >= 1`.
pub fn enumerate_cases(max_rank: u32) -> Vec<CaseSpec> {
    let mut out = Vec::new();
    if max_rank == 0 {
        return out;
    }
    let both = [Fiber::Quadric, Fiber::ProjectiveSpace];
    for l in 2..=max_rank {
        for fiber in both {
            out.extend(CaseSpec::case1(l, fiber));
        }
    }
    for p in 1..=max_rank {
        for q in 1..=p {
            if p + q > 2 {
                out.extend(CaseSpec::case2(p, q));
            }
        }
    }
    for l in 4..=max_rank {
        out.extend(CaseSpec::case3(l));
    }
    for fiber in both {
        out.push(CaseSpec::case4(fiber));
    }
    for fiber in both {
        out.push(CaseSpec::case5(fiber));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdmissibilityStatus {
    ProvenKE,
    ExcludedConditionD,
    ExcludedPositiveIntegral,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub status: AdmissibilityStatus,
    pub detail: String,
}

/// The tabulated verdict. Computed evidence lives in `roots` and
/// `quadrature`; the report cross-checks the two.
pub fn classify(case: &CaseSpec) -> Admissibility {
    use AdmissibilityStatus::*;
    let (status, detail) = match (case.case_id, case.rank_params.as_slice(), case.fiber) {
        (1, [2], Fiber::ProjectiveSpace) => (
            ExcludedConditionD,
            "SU_3 with fiber CP^2: the ratio bound is an equality".to_string(),
        ),
        (2, [p, q], _) if p.min(q) == &1 => (
            ExcludedConditionD,
            format!("{} has an SU_2 factor", case.group_name()),
        ),
        (4 | 5, _, Fiber::Quadric) => (
            ExcludedPositiveIntegral,
            format!("fiber {}: the sign integral is positive", case.fiber_name()),
        ),
        _ => (ProvenKE, "Kähler-Einstein metric exists".to_string()),
    };
    Admissibility { status, detail }
}

#[derive(Serialize)]
pub struct CatalogDocument<'a> {
    pub schema_version: u32,
    pub max_rank: u32,
    pub cases: &'a [CaseSpec],
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn count(cases: &[CaseSpec], id: u8) -> usize {
        cases.iter().filter(|c| c.case_id == id).count()
    }

    #[test]
    fn case4_has_both_fibers() {
        let cases = enumerate_cases(4);
        let c4: Vec<_> = cases.iter().filter(|c| c.case_id == 4).collect();
        assert_eq!(c4.len(), 2);
        assert_eq!(c4[0].fiber, Fiber::Quadric);
        assert_eq!(c4[0].epsilon_f, 1);
        assert_eq!(c4[1].fiber, Fiber::ProjectiveSpace);
        assert_eq!(c4[1].epsilon_f, 2);
    }

    #[test]
    fn cases_2_and_3_are_projective_only() {
        let cases = enumerate_cases(8);
        assert!(cases
            .iter()
            .filter(|c| c.case_id == 2 || c.case_id == 3)
            .all(|c| c.fiber == Fiber::ProjectiveSpace && c.epsilon_f == 2));
        assert!(CaseSpec::new(2, &[2, 2], Fiber::Quadric).is_err());
    }

    #[test]
    fn small_ranks() {
        let cases = enumerate_cases(2);
        assert!(cases.iter().any(|c| c.case_id == 1 && c.rank_params == [2]));
        assert_eq!(count(&cases, 3), 0);
        assert_eq!(count(&cases, 2), 2); // (2, 1) and (2, 2)
        assert!(enumerate_cases(0).is_empty());
        // case 2 pairs with p >= q: (2,1),(2,2),(3,1),(3,2),(3,3)
        assert_eq!(count(&enumerate_cases(3), 2), 5);
    }

    #[test]
    fn domain_checks() {
        assert!(CaseSpec::case1(1, Fiber::Quadric).is_err());
        assert!(CaseSpec::case2(1, 1).is_err());
        assert!(CaseSpec::case3(3).is_err());
        assert!(CaseSpec::new(6, &[], Fiber::Quadric).is_err());
        assert!(CaseSpec::new(4, &[3], Fiber::Quadric).is_err());
        assert!(CaseSpec::new(1, &[], Fiber::Quadric).is_err());
    }

    #[test]
    fn invariants_hold_across_the_catalog() {
        for c in enumerate_cases(9) {
            assert_eq!(c.epsilon_f == 2, c.fiber == Fiber::ProjectiveSpace, "{c}");
            let n_f = [1, 2, 4, 6, 8][c.case_id as usize - 1];
            assert_eq!(c.n_f, n_f);
            for (beta, _) in &c.positive_roots {
                assert!(
                    !c.form.pair(&c.theta_d, beta).unwrap().is_zero(),
                    "{c}: {beta}"
                );
            }
            if c.form == CartanForm::Euclidean && c.case_id <= 3 {
                assert!(c.theta_d.coord_sum().is_zero());
                assert!(c.theta_kappa.coord_sum().is_zero());
                assert!(c
                    .positive_roots
                    .iter()
                    .all(|(b, _)| b.coord_sum().is_zero()));
            }
        }
    }

    #[test]
    fn root_counts() {
        for l in 2..10 {
            assert_eq!(
                CaseSpec::case1(l, Fiber::Quadric).unwrap().root_count(),
                2 * (l - 1)
            );
        }
        for p in 1..7 {
            for q in 1..7 {
                if p + q > 2 {
                    assert_eq!(
                        CaseSpec::case2(p, q).unwrap().root_count(),
                        2 * (p - 1) + 2 * (q - 1)
                    );
                }
            }
        }
        for l in 4..10 {
            assert_eq!(CaseSpec::case3(l).unwrap().root_count(), 4 * (l - 3));
        }
        assert_eq!(CaseSpec::case4(Fiber::Quadric).root_count(), 8);
        assert_eq!(CaseSpec::case5(Fiber::Quadric).root_count(), 16);
    }

    #[test]
    fn classification_examples() {
        use AdmissibilityStatus::*;
        assert_eq!(
            classify(&CaseSpec::case5(Fiber::Quadric)).status,
            ExcludedPositiveIntegral
        );
        assert_eq!(
            classify(&CaseSpec::case4(Fiber::Quadric)).status,
            ExcludedPositiveIntegral
        );
        assert_eq!(
            classify(&CaseSpec::case1(2, Fiber::ProjectiveSpace).unwrap()).status,
            ExcludedConditionD
        );
        assert_eq!(
            classify(&CaseSpec::case1(2, Fiber::Quadric).unwrap()).status,
            ProvenKE
        );
        assert_eq!(
            classify(&CaseSpec::case2(1, 4).unwrap()).status,
            ExcludedConditionD
        );
        assert_eq!(classify(&CaseSpec::case2(2, 2).unwrap()).status, ProvenKE);
        assert_eq!(
            classify(&CaseSpec::case5(Fiber::ProjectiveSpace)).status,
            ProvenKE
        );
    }

    #[test]
    fn names() {
        let c = CaseSpec::case2(3, 2).unwrap();
        assert_eq!(c.group_name(), "SU_4 x SU_3");
        assert_eq!(c.fiber_name(), "CP^3");
        assert_eq!(CaseSpec::case5(Fiber::Quadric).fiber_name(), "Q^9");
        assert_eq!(
            CaseSpec::case1(2, Fiber::Quadric).unwrap().fiber_name(),
            "Q^2"
        );
        assert_eq!("cp".parse::<Fiber>().unwrap(), Fiber::ProjectiveSpace);
    }

    #[test]
    fn json_round_trip() {
        let c = CaseSpec::case3(5).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: CaseSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let c5 = CaseSpec::case5(Fiber::Quadric);
        let back: CaseSpec = serde_json::from_str(&serde_json::to_string(&c5).unwrap()).unwrap();
        assert_eq!(back, c5);
    }
}
