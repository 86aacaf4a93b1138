//! Holomorphic curve germs and their contact with the model surfaces.
//!
//! A curve is an (n+1)-tuple of truncated power series vanishing at 0: the
//! `n` coordinate components `h_j(t)` plus the distinguished component
//! `g(t)`. Its contact with a coefficient family is measured exactly: the
//! composition `G = g + Σ_j Σ_m a^j_m h_j(t)^m` is expanded in Gaussian
//! rational arithmetic and the tangency order is the valuation of `G`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{BigRational, GaussianRational};
use crate::construct::{SequenceFamily, SurfaceModel};
use crate::series::{SeriesError, TruncatedSeries, Valuation};

#[derive(Debug, thiserror::Error)]
pub enum HypersurfaceError {
    #[error("curve components disagree on truncation order: {found} vs {expected}")]
    TruncationMismatch { expected: usize, found: usize },
    #[error("curve has {found} coordinate components, the family expects {expected}")]
    ComponentCountMismatch { expected: usize, found: usize },
    #[error("component {component} has a nonzero constant term; curve germs must pass through 0")]
    NonvanishingConstantTerm { component: String },
    #[error("curve is identically zero; tangency order is undefined")]
    ConstantCurve,
    #[error("truncation order {truncation} exceeds the family table (max {m_max})")]
    TruncationBeyondFamily { truncation: usize, m_max: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// A polynomial curve germ `t ↦ (h_1(t), …, h_n(t), g(t))` with all
/// components sharing one truncation order and vanishing at `t = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    h: Vec<TruncatedSeries>,
    g: TruncatedSeries,
}

impl Curve {
    pub fn new(h: Vec<TruncatedSeries>, g: TruncatedSeries) -> Result<Self, HypersurfaceError> {
        let k = g.truncation_order();
        if !g.coeff(0).is_zero() {
            return Err(HypersurfaceError::NonvanishingConstantTerm {
                component: "g".into(),
            });
        }
        for (i, s) in h.iter().enumerate() {
            if s.truncation_order() != k {
                return Err(HypersurfaceError::TruncationMismatch {
                    expected: k,
                    found: s.truncation_order(),
                });
            }
            if !s.coeff(0).is_zero() {
                return Err(HypersurfaceError::NonvanishingConstantTerm {
                    component: format!("h{}", i + 1),
                });
            }
        }
        Ok(Curve { h, g })
    }

    pub fn h(&self) -> &[TruncatedSeries] {
        &self.h
    }

    pub fn g(&self) -> &TruncatedSeries {
        &self.g
    }

    pub fn n_components(&self) -> usize {
        self.h.len()
    }

    pub fn truncation_order(&self) -> usize {
        self.g.truncation_order()
    }

    pub fn is_constant(&self) -> bool {
        self.g.is_zero() && self.h.iter().all(TruncatedSeries::is_zero)
    }

    /// The reparametrized curve `t ↦ γ(λt)`: each component rescaled.
    pub fn rescale_variable(&self, lambda: &BigRational) -> Curve {
        Curve {
            h: self.h.iter().map(|s| s.rescale_variable(lambda)).collect(),
            g: self.g.rescale_variable(lambda),
        }
    }
}

impl Serialize for Curve {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Curve", 2)?;
        st.serialize_field("h", &self.h)?;
        st.serialize_field("g", &self.g)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Curve {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            h: Vec<TruncatedSeries>,
            g: TruncatedSeries,
        }
        let raw = Raw::deserialize(deserializer)?;
        Curve::new(raw.h, raw.g).map_err(serde::de::Error::custom)
    }
}

/// Exact composition `G(t) = g(t) + Σ_j Σ_{m=1}^{K} a^j_m · h_j(t)^m`,
/// truncated at the curve's order `K` throughout.
pub fn curve_compose(
    curve: &Curve,
    family: &SequenceFamily,
) -> Result<TruncatedSeries, HypersurfaceError> {
    if curve.n_components() != family.n() {
        return Err(HypersurfaceError::ComponentCountMismatch {
            expected: family.n(),
            found: curve.n_components(),
        });
    }
    let k = curve.truncation_order();
    if k > family.m_max() {
        return Err(HypersurfaceError::TruncationBeyondFamily {
            truncation: k,
            m_max: family.m_max(),
        });
    }
    let mut acc = curve.g.clone();
    for (j0, h) in curve.h.iter().enumerate() {
        let outer: Vec<BigRational> = (1..=k)
            .map(|m| BigRational::from(family.a(j0 + 1, m).clone()))
            .collect();
        acc = &acc + &h.compose_outer(&outer)?;
    }
    Ok(acc)
}

/// Contact data of a curve against a family.
#[derive(Debug, Clone)]
pub struct TangencyResult {
    /// Valuation of the composition; `AtLeast(K+1)` means flat to truncation.
    pub order: Valuation,
    /// Degree and value of the first nonzero composition coefficient.
    pub leading: Option<(usize, GaussianRational)>,
    /// The full composed series, for downstream inspection.
    pub series: TruncatedSeries,
}

/// Tangency order of a nonconstant curve: valuation of [`curve_compose`].
pub fn tangency_order(
    curve: &Curve,
    family: &SequenceFamily,
) -> Result<TangencyResult, HypersurfaceError> {
    if curve.is_constant() {
        return Err(HypersurfaceError::ConstantCurve);
    }
    let series = curve_compose(curve, family)?;
    let order = series.valuation();
    let leading = series.leading().map(|(d, c)| (d, c.clone()));
    Ok(TangencyResult {
        order,
        leading,
        series,
    })
}

/// The slice curve witnessing contact order exactly `m + 1` along
/// coordinate `j`: `h_j = t`, every other component 0, and
/// `g = −Σ_{k=1}^{m} a^j_k t^k` cancelling the family head.
pub fn xm_slice_curve(
    family: &SequenceFamily,
    m: usize,
    j: usize,
    truncation: usize,
) -> Result<Curve, HypersurfaceError> {
    assert!((1..=family.n()).contains(&j));
    if truncation < m || truncation > family.m_max() {
        return Err(HypersurfaceError::TruncationBeyondFamily {
            truncation,
            m_max: family.m_max(),
        });
    }
    let h = (1..=family.n())
        .map(|i| {
            if i == j {
                TruncatedSeries::monomial(truncation, 1, GaussianRational::one())
            } else {
                TruncatedSeries::zero(truncation)
            }
        })
        .collect();
    let mut g = TruncatedSeries::zero(truncation);
    for k in 1..=m {
        let a = BigRational::from(family.a(j, k).clone());
        g.set_coeff(k, -GaussianRational::from_rational(a));
    }
    Curve::new(h, g)
}

/// One coordinate's slice verdict.
#[derive(Debug, Clone)]
pub struct XmComponent {
    pub j: usize,
    pub order: Valuation,
    pub expected_order: usize,
    pub leading: Option<GaussianRational>,
    pub expected_leading: GaussianRational,
    pub pass: bool,
}

/// Slice verdicts for every coordinate at one order.
#[derive(Debug, Clone)]
pub struct XmCheckResult {
    pub m: usize,
    pub per_component: Vec<XmComponent>,
    pub pass: bool,
}

/// Checks that each coordinate's slice curve at order `m` meets the family
/// with contact order exactly `m + 1` and leading coefficient `a^j_{m+1}`.
pub fn xm_tangency_check(
    family: &SequenceFamily,
    m: usize,
) -> Result<XmCheckResult, HypersurfaceError> {
    if m + 1 > family.m_max() {
        return Err(HypersurfaceError::TruncationBeyondFamily {
            truncation: m + 1,
            m_max: family.m_max(),
        });
    }
    let mut per_component = Vec::with_capacity(family.n());
    for j in 1..=family.n() {
        let slice = xm_slice_curve(family, m, j, m + 1)?;
        let result = tangency_order(&slice, family)?;
        let expected_leading =
            GaussianRational::from_rational(BigRational::from(family.a(j, m + 1).clone()));
        let leading = result.leading.as_ref().map(|(_, c)| c.clone());
        let pass = result.order == Valuation::Finite(m + 1)
            && leading.as_ref() == Some(&expected_leading);
        per_component.push(XmComponent {
            j,
            order: result.order,
            expected_order: m + 1,
            leading,
            expected_leading,
            pass,
        });
    }
    let pass = per_component.iter().all(|c| c.pass);
    Ok(XmCheckResult {
        m,
        per_component,
        pass,
    })
}

/// Defining function of the model surface at a numeric point:
/// `ρ(z, w) = Re(w) + Σ_j f_j(z_j)` with each potential truncated at
/// `m_upper`.
pub fn rho_eval(model: &SurfaceModel, z: &[Complex64], w: Complex64, m_upper: usize) -> f64 {
    assert_eq!(z.len(), model.family().n(), "one coordinate per sequence");
    let mut acc = w.re;
    for (j0, &zj) in z.iter().enumerate() {
        acc += model.eval_f_trunc(j0 + 1, zj, m_upper);
    }
    acc
}
