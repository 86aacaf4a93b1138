//! Truncated formal power series over the Gaussian rationals.
//!
//! A [`TruncatedSeries`] stores the coefficients of `c_0 + c_1 t + … + c_K t^K`
//! exactly; every operation truncates eagerly back to the same order `K`, so a
//! series never grows. Arithmetic between two series requires equal truncation
//! orders — callers align first with [`TruncatedSeries::resized`].
//!
//! Vanishing order is reported through [`Valuation`], a tagged value: either a
//! concrete order or the sentinel "at least K+1" meaning no nonzero
//! coefficient survives the truncation window.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{BigRational, GaussianRational};

/// Errors from series construction and arithmetic.
#[derive(Debug, thiserror::Error)]
pub enum SeriesError {
    /// Binary operations need both operands truncated at the same order.
    #[error("truncation order mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },
    /// Outer composition `Σ a_m h^m` is only defined for `h(0) = 0`.
    #[error("composition requires a vanishing constant term")]
    NonvanishingConstantTerm,
    /// The JSON payload disagreed with its own declared truncation order.
    #[error("declared truncation order {declared} but {found} coefficients (expected {})", declared + 1)]
    CoefficientCountMismatch { declared: usize, found: usize },
}

/// Vanishing order of a series, "the index of the first nonzero coefficient".
///
/// `AtLeast(b)` records that all coefficients up to the truncation order are
/// zero, so the true order is at least `b = K + 1`. It is a tagged value, not
/// a magic number, and it participates in ordering: `Finite(k) < AtLeast(b)`
/// whenever `k ≤ K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(usize),
    AtLeast(usize),
}

impl Valuation {
    pub fn is_finite(&self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    /// The concrete order, if resolved within the truncation window.
    pub fn finite(&self) -> Option<usize> {
        match self {
            Valuation::Finite(k) => Some(*k),
            Valuation::AtLeast(_) => None,
        }
    }

    /// A guaranteed lower bound in either case.
    pub fn lower_bound(&self) -> usize {
        match self {
            Valuation::Finite(k) => *k,
            Valuation::AtLeast(b) => *b,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(k) => write!(f, "{k}"),
            Valuation::AtLeast(b) => write!(f, ">={b}"),
        }
    }
}

impl FromStr for Valuation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix(">=") {
            rest.trim()
                .parse()
                .map(Valuation::AtLeast)
                .map_err(|e| format!("bad valuation bound: {e}"))
        } else {
            s.parse()
                .map(Valuation::Finite)
                .map_err(|e| format!("bad valuation: {e}"))
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Formal power series truncated at a fixed order `K`; coefficient `k` of
/// `t^k` lives at index `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<GaussianRational>,
}

impl TruncatedSeries {
    /// The zero series truncated at order `truncation`.
    pub fn zero(truncation: usize) -> Self {
        Self {
            coeffs: vec![GaussianRational::zero(); truncation + 1],
        }
    }

    /// Builds a series from `K + 1` coefficients `[c_0, …, c_K]`.
    pub fn from_coeffs(coeffs: Vec<GaussianRational>) -> Self {
        assert!(!coeffs.is_empty(), "a series carries at least c_0");
        Self { coeffs }
    }

    /// The monomial `c·t^k` truncated at `truncation` (requires `k ≤ truncation`).
    pub fn monomial(truncation: usize, k: usize, c: GaussianRational) -> Self {
        assert!(k <= truncation, "monomial degree exceeds truncation");
        let mut s = Self::zero(truncation);
        s.coeffs[k] = c;
        s
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &GaussianRational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, k: usize, c: GaussianRational) {
        self.coeffs[k] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(GaussianRational::is_zero)
    }

    /// Copy truncated or zero-padded to order `truncation`. Padding encodes
    /// polynomial semantics: coefficients beyond the stored window are zero.
    pub fn resized(&self, truncation: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(truncation + 1, GaussianRational::zero());
        coeffs.truncate(truncation + 1);
        Self { coeffs }
    }

    /// Coefficient-wise conjugation.
    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(GaussianRational::conj).collect(),
        }
    }

    /// Multiplication by an exact scalar.
    pub fn scale(&self, s: &GaussianRational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Substitutes `t → λ t` for an exact rational `λ`: coefficient `k` picks
    /// up a factor `λ^k`.
    pub fn rescale_variable(&self, lambda: &BigRational) -> Self {
        let mut power = BigRational::from_integer(1.into());
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let scaled = c.scale(&power);
                power *= lambda;
                scaled
            })
            .collect();
        Self { coeffs }
    }

    fn check_aligned(&self, rhs: &Self) -> Result<(), SeriesError> {
        if self.truncation_order() != rhs.truncation_order() {
            return Err(SeriesError::TruncationMismatch {
                left: self.truncation_order(),
                right: rhs.truncation_order(),
            });
        }
        Ok(())
    }

    /// Cauchy product truncated back to the common order.
    pub fn mul_truncated(&self, rhs: &Self) -> Result<Self, SeriesError> {
        self.check_aligned(rhs)?;
        let k_max = self.truncation_order();
        let mut out = Self::zero(k_max);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(k_max + 1 - i).enumerate() {
                if b.is_zero() {
                    continue;
                }
                let prod = a * b;
                let slot = &mut out.coeffs[i + j];
                *slot += &prod;
            }
        }
        Ok(out)
    }

    /// `self^m` by repeated squaring, truncating after every multiplication.
    /// `m = 0` yields the constant series 1.
    pub fn pow(&self, m: usize) -> Self {
        let k = self.truncation_order();
        let mut result = Self::monomial(k, 0, GaussianRational::one());
        let mut base = self.clone();
        let mut exp = m;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul_truncated(&base).expect("aligned by construction");
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul_truncated(&base).expect("aligned by construction");
            }
        }
        result
    }

    /// Outer composition `Σ_{m=1}^{K} outer[m-1]·self^m`, truncated at `K`.
    ///
    /// `outer` supplies exactly `K` coefficients indexed by power `m = 1..=K`,
    /// and `self` must have a vanishing constant term (so the composition is a
    /// well-defined formal series). Powers are accumulated incrementally;
    /// ordered composition sums are never enumerated — the `t^k` coefficient
    /// of `self^m` already is the sum over all ways to build `t^k` from `m`
    /// factors.
    pub fn compose_outer(&self, outer: &[BigRational]) -> Result<Self, SeriesError> {
        let k_max = self.truncation_order();
        assert_eq!(
            outer.len(),
            k_max,
            "outer coefficient list must cover powers 1..=K"
        );
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::NonvanishingConstantTerm);
        }
        let mut acc = Self::zero(k_max);
        let mut power = self.clone();
        for a_m in outer {
            if !a_m.is_zero() {
                for (slot, c) in acc.coeffs.iter_mut().zip(power.coeffs.iter()) {
                    if !c.is_zero() {
                        *slot += &c.scale(a_m);
                    }
                }
            }
            power = power.mul_truncated(self)?;
        }
        Ok(acc)
    }

    /// Index of the first nonzero coefficient, or `AtLeast(K + 1)`.
    pub fn valuation(&self) -> Valuation {
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                return Valuation::Finite(k);
            }
        }
        Valuation::AtLeast(self.truncation_order() + 1)
    }

    /// First nonzero coefficient together with its index, if any.
    pub fn leading(&self) -> Option<(usize, &GaussianRational)> {
        self.coeffs.iter().enumerate().find(|(_, c)| !c.is_zero())
    }

    /// Vanishing order of the *real part* `Re Σ c_k t^k` as a function of `t`.
    ///
    /// Writing `Re(c t^k) = (c/2) t^k + (c̄/2) t̄^k`, a degree-`k` pair of
    /// bivariate monomials survives exactly when `c ≠ 0`; taking the real
    /// part can never cancel a complex coefficient. Hence this equals
    /// [`TruncatedSeries::valuation`]; the alias exists because callers that
    /// reason about real defining functions need the statement, not just the
    /// number.
    pub fn real_part_valuation(&self) -> Valuation {
        self.valuation()
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.check_aligned(rhs).expect("series must be aligned");
        TruncatedSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.check_aligned(rhs).expect("series must be aligned");
        TruncatedSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.mul_truncated(rhs).expect("series must be aligned")
    }
}

/// JSON encoding: `{"K": k, "coeffs": [GaussianRational; k+1]}`.
impl Serialize for TruncatedSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Encoded<'a> {
            #[serde(rename = "K")]
            k: usize,
            coeffs: &'a [GaussianRational],
        }
        Encoded {
            k: self.truncation_order(),
            coeffs: &self.coeffs,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Encoded {
            #[serde(rename = "K")]
            k: usize,
            coeffs: Vec<GaussianRational>,
        }
        let enc = Encoded::deserialize(deserializer)?;
        if enc.coeffs.len() != enc.k + 1 {
            return Err(D::Error::custom(SeriesError::CoefficientCountMismatch {
                declared: enc.k,
                found: enc.coeffs.len(),
            }));
        }
        Ok(TruncatedSeries::from_coeffs(enc.coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gr(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    /// Series with integer coefficients, for readable fixtures.
    fn s(coeffs: &[i64]) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(coeffs.iter().map(|&n| gr(n)).collect())
    }

    /// Full-degree polynomial product, then truncate: an oracle that never
    /// relies on the eager-truncation bookkeeping of `mul_truncated`.
    fn oracle_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> TruncatedSeries {
        let k = a.truncation_order();
        let mut full = vec![GaussianRational::zero(); 2 * k + 1];
        for i in 0..=k {
            for j in 0..=k {
                let p = a.coeff(i) * b.coeff(j);
                full[i + j] += &p;
            }
        }
        full.truncate(k + 1);
        TruncatedSeries::from_coeffs(full)
    }

    fn oracle_pow(a: &TruncatedSeries, m: usize) -> TruncatedSeries {
        let mut acc = TruncatedSeries::monomial(a.truncation_order(), 0, GaussianRational::one());
        for _ in 0..m {
            acc = oracle_mul(&acc, a);
        }
        acc
    }

    #[test]
    fn square_of_t_plus_t2() {
        // (t + t²)² = t² + 2t³ + t⁴ at K = 4.
        let h = s(&[0, 1, 1, 0, 0]);
        assert_eq!(h.pow(2), s(&[0, 0, 1, 2, 1]));
    }

    #[test]
    fn truncation_drops_high_degrees() {
        // (1 + t)(1 − t) = 1 − t² at K = 2.
        let a = s(&[1, 1, 0]);
        let b = s(&[1, -1, 0]);
        assert_eq!(&a * &b, s(&[1, 0, -1]));
    }

    #[test]
    fn compose_outer_small_cases() {
        let one = BigRational::from_integer(1.into());
        let two = BigRational::from_integer(2.into());
        // a = (1, 2), h = t + t², K = 2 → h + 2h² = t + 3t².
        let h = s(&[0, 1, 1]);
        let g = h.compose_outer(&[one.clone(), two.clone()]).unwrap();
        assert_eq!(g, s(&[0, 1, 3]));
        // a = (1, 69), h = t → t + 69 t².
        let h = s(&[0, 1, 0]);
        let g = h
            .compose_outer(&[one.clone(), BigRational::from_integer(69.into())])
            .unwrap();
        assert_eq!(g, s(&[0, 1, 69]));
        // a = (1, 2), h = −t + t² → valuation 1 (leading coefficient −1).
        let h = s(&[0, -1, 1]);
        let g = h.compose_outer(&[one, two]).unwrap();
        assert_eq!(g.valuation(), Valuation::Finite(1));
        assert_eq!(g.leading().unwrap().1, &gr(-1));
    }

    #[test]
    fn compose_outer_rejects_constant_terms() {
        let h = s(&[1, 1]);
        let err = h
            .compose_outer(&[BigRational::from_integer(1.into())])
            .unwrap_err();
        assert!(matches!(err, SeriesError::NonvanishingConstantTerm));
    }

    #[test]
    fn valuation_sentinel_and_display() {
        assert_eq!(s(&[0, 0, 5]).valuation(), Valuation::Finite(2));
        assert_eq!(s(&[0, 0, 0]).valuation(), Valuation::AtLeast(3));
        assert_eq!(Valuation::AtLeast(11).to_string(), ">=11");
        assert_eq!(">=11".parse::<Valuation>().unwrap(), Valuation::AtLeast(11));
        assert_eq!("4".parse::<Valuation>().unwrap(), Valuation::Finite(4));
    }

    #[test]
    fn mismatched_orders_are_an_error() {
        let a = s(&[1, 2]);
        let b = s(&[1, 2, 3]);
        assert!(matches!(
            a.mul_truncated(&b),
            Err(SeriesError::TruncationMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip_checks_length() {
        let a = s(&[3, 0, -1]);
        let js = serde_json::to_string(&a).unwrap();
        let back: TruncatedSeries = serde_json::from_str(&js).unwrap();
        assert_eq!(a, back);
        let bad = r#"{"K": 3, "coeffs": [{"re":"0/1","im":"0/1"}]}"#;
        assert!(serde_json::from_str::<TruncatedSeries>(bad).is_err());
    }

    fn arb_series(k: usize) -> impl Strategy<Value = TruncatedSeries> {
        proptest::collection::vec((-8i64..=8, 1i64..=8, -8i64..=8, 1i64..=8), k + 1).prop_map(
            |cs| {
                TruncatedSeries::from_coeffs(
                    cs.into_iter()
                        .map(|(a, b, c, d)| GaussianRational::from_ratios(a, b, c, d))
                        .collect(),
                )
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mul_matches_expansion_oracle(a in arb_series(6), b in arb_series(6)) {
            prop_assert_eq!(a.mul_truncated(&b).unwrap(), oracle_mul(&a, &b));
        }

        #[test]
        fn pow_matches_repeated_mul(a in arb_series(5), m in 0usize..=5) {
            prop_assert_eq!(a.pow(m), oracle_pow(&a, m));
        }

        #[test]
        fn mul_is_bilinear(a in arb_series(5), b in arb_series(5), c in arb_series(5)) {
            let left = (&a + &b).mul_truncated(&c).unwrap();
            let right = &a.mul_truncated(&c).unwrap() + &b.mul_truncated(&c).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn valuation_adds_under_multiplication(a in arb_series(6), b in arb_series(6)) {
            let product = a.mul_truncated(&b).unwrap();
            let k = a.truncation_order();
            match (a.valuation(), b.valuation()) {
                (Valuation::Finite(va), Valuation::Finite(vb)) if va + vb <= k => {
                    // Leading coefficients are nonzero in an integral domain.
                    prop_assert_eq!(product.valuation(), Valuation::Finite(va + vb));
                }
                _ => {
                    // Product vanishes through the whole window.
                    prop_assert_eq!(product.valuation(), Valuation::AtLeast(k + 1));
                }
            }
        }

        #[test]
        fn real_part_valuation_equals_valuation(a in arb_series(6)) {
            prop_assert_eq!(a.real_part_valuation(), a.valuation());
        }
    }
}
