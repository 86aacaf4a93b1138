//! Exact scalar arithmetic: arbitrary-precision rationals and Gaussian rationals.
//!
//! Every quantity that feeds a certificate is kept exact. Real rationals are
//! `num_rational::BigRational`, which maintains the canonical form we rely on
//! (fully reduced, positive denominator) after every operation. Complex
//! scalars are [`GaussianRational`], a pair of rationals closed under field
//! operations. Magnitudes are always compared through [`GaussianRational::abs_sq`];
//! no square roots are ever taken.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision rational, always reduced with positive denominator.
pub type BigRational = num_rational::BigRational;

/// Errors from parsing exact scalars out of their textual encodings.
#[derive(Debug, thiserror::Error)]
pub enum ArithError {
    /// The string was not of the form `p` or `p/q` with integer `p`, `q`.
    #[error("malformed rational literal {input:?}: {reason}")]
    MalformedRational { input: String, reason: String },
    /// A denominator of zero was supplied.
    #[error("zero denominator in rational literal {input:?}")]
    ZeroDenominator { input: String },
}

/// Parses `"p/q"` or a bare integer `"p"` into a canonical rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ArithError> {
    let bad = |reason: &str| ArithError::MalformedRational {
        input: s.to_owned(),
        reason: reason.to_owned(),
    };
    let mut parts = s.splitn(2, '/');
    let numer: BigInt = parts
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|e| bad(&format!("numerator: {e}")))?;
    let denom: BigInt = match parts.next() {
        Some(d) => d
            .trim()
            .parse()
            .map_err(|e| bad(&format!("denominator: {e}")))?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(ArithError::ZeroDenominator {
            input: s.to_owned(),
        });
    }
    Ok(BigRational::new(numer, denom))
}

/// Formats a rational as `"p/q"` (always with the denominator, so output is
/// canonical and trivially machine-parseable).
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Serde adapter: `Option<BigRational>` as an optional `"p/q"` string.
pub mod serde_opt_rational {
    use super::{format_rational, parse_rational, BigRational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let opt = Option::<String>::deserialize(d)?;
        opt.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Natural logarithm of a positive big integer, accurate to f64 precision even
/// when the integer overflows f64 range. Used by numeric evaluators that must
/// work with coefficients far beyond 1e308.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln_bigint requires a positive integer");
    let bits = x.bits();
    if bits <= 53 {
        // Exactly representable.
        return x.to_string().parse::<f64>().unwrap().ln();
    }
    let shift = bits - 53;
    let mantissa: BigInt = x >> shift;
    let m = mantissa.to_string().parse::<f64>().unwrap();
    m.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Element of the field of Gaussian rationals: `re + im·i` with exact
/// rational parts. Canonical form is inherited from the parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    re: BigRational,
    im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    /// Builds `a/b + (c/d)·i` from integer parts; panics on zero denominators.
    pub fn from_ratios(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self::new(
            BigRational::new(a.into(), b.into()),
            BigRational::new(c.into(), d.into()),
        )
    }

    /// The real integer `n`, as a Gaussian rational.
    pub fn from_int(n: i64) -> Self {
        Self::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    /// The real rational `r`, as a Gaussian rational.
    pub fn from_rational(r: BigRational) -> Self {
        Self::new(r, BigRational::zero())
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// Squared modulus `re² + im²`, exact. This is the only magnitude notion
    /// in the crate; comparisons like `|α| ≤ 1` are phrased as `abs_sq ≤ 1`.
    pub fn abs_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplication by an exact real scalar.
    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(&self.re * s, &self.im * s)
    }

    /// Approximate value as a complex pair of doubles (for numeric sampling).
    pub fn to_f64(&self) -> (f64, f64) {
        (rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

/// Rounds a rational to the nearest f64 (via the string round-trip, which is
/// correctly rounded and fast enough for reporting purposes).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i", format_rational(&self.re), format_rational(&self.im))
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: GaussianRational) -> GaussianRational {
        &self + &rhs
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, rhs: &GaussianRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Sub for GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: GaussianRational) -> GaussianRational {
        &self - &rhs
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, rhs: &GaussianRational) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: GaussianRational) -> GaussianRational {
        &self * &rhs
    }
}

impl MulAssign<&GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, rhs: &GaussianRational) {
        *self = &*self * rhs;
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        -&self
    }
}

/// JSON encoding: `{"re": "p/q", "im": "r/s"}` with canonical rational strings.
impl Serialize for GaussianRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Encoded<'a> {
            re: &'a str,
            im: &'a str,
        }
        Encoded {
            re: &format_rational(&self.re),
            im: &format_rational(&self.im),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Encoded {
            re: String,
            im: String,
        }
        let enc = Encoded::deserialize(deserializer)?;
        Ok(GaussianRational::new(
            parse_rational(&enc.re).map_err(D::Error::custom)?,
            parse_rational(&enc.im).map_err(D::Error::custom)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn abs_sq_of_half_plus_third_i() {
        let g = GaussianRational::from_ratios(1, 2, 1, 3);
        assert_eq!(g.abs_sq(), q(13, 36));
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = GaussianRational::i();
        assert_eq!(&i * &i, GaussianRational::from_int(-1));
    }

    #[test]
    fn multiplication_example() {
        // (1 + 2i)(3 - i) = 5 + 5i
        let a = GaussianRational::from_ratios(1, 1, 2, 1);
        let b = GaussianRational::from_ratios(3, 1, -1, 1);
        assert_eq!(&a * &b, GaussianRational::from_ratios(5, 1, 5, 1));
    }

    #[test]
    fn rational_strings_round_trip() {
        for s in ["3/4", "-7/2", "0/1", "5", "-12"] {
            let r = parse_rational(s).unwrap();
            let r2 = parse_rational(&format_rational(&r)).unwrap();
            assert_eq!(r, r2);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        // Canonicalization: reduced, denominator positive.
        assert_eq!(format_rational(&parse_rational("4/-6").unwrap()), "-2/3");
    }

    #[test]
    fn gaussian_json_round_trip() {
        let g = GaussianRational::from_ratios(-3, 4, 7, 5);
        let js = serde_json::to_string(&g).unwrap();
        assert_eq!(js, r#"{"re":"-3/4","im":"7/5"}"#);
        let back: GaussianRational = serde_json::from_str(&js).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn ln_bigint_matches_f64_in_range_and_beyond() {
        let x = BigInt::from(123456789u64);
        assert!((ln_bigint(&x) - 123456789f64.ln()).abs() < 1e-12);
        // 10^400 is far beyond f64 range; ln should be 400 ln 10.
        let big = BigInt::from(10u32).pow(400);
        let expect = 400.0 * std::f64::consts::LN_10;
        assert!((ln_bigint(&big) - expect).abs() / expect < 1e-14);
    }

    fn arb_rational() -> impl Strategy<Value = BigRational> {
        (-50i64..=50, 1i64..=20).prop_map(|(n, d)| q(n, d))
    }

    fn arb_gaussian() -> impl Strategy<Value = GaussianRational> {
        (arb_rational(), arb_rational()).prop_map(|(re, im)| GaussianRational::new(re, im))
    }

    proptest! {
        #[test]
        fn field_axioms_hold(a in arb_gaussian(), b in arb_gaussian(), c in arb_gaussian()) {
            // Commutativity and associativity.
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            // Distributivity.
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            // Units.
            prop_assert_eq!(&a + &GaussianRational::zero(), a.clone());
            prop_assert_eq!(&a * &GaussianRational::one(), a.clone());
        }

        #[test]
        fn abs_sq_is_multiplicative(a in arb_gaussian(), b in arb_gaussian()) {
            prop_assert_eq!((&a * &b).abs_sq(), a.abs_sq() * b.abs_sq());
        }

        #[test]
        fn conjugation_is_a_ring_morphism(a in arb_gaussian(), b in arb_gaussian()) {
            prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
            prop_assert_eq!((&a + &b).conj(), &a.conj() + &b.conj());
            prop_assert_eq!(&a * &a.conj(), GaussianRational::from_rational(a.abs_sq()));
        }
    }
}
