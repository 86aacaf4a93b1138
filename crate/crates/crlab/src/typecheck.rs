//! Finite-type diagnostics for polynomial model functions `F(z, z̄)`:
//! pluriharmonic splitting, the lowest mixed degree, and a constructive lower
//! bound on the curve-contact type via monomial test curves.
//!
//! All coefficient work is exact. Terms are indexed by the pair of
//! multi-indices `(α, β)` of `z^α z̄^β`; reality of `F` forces
//! `coeff(α, β) = conj(coeff(β, α))`, which is validated on construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{BigRational, GaussianRational};
use crate::construct::SequenceFamily;
use crate::series::Valuation;

type MultiIndex = Vec<u32>;

#[derive(Debug, thiserror::Error)]
pub enum TypecheckError {
    #[error("multi-index has {found} entries, expected {expected}")]
    IndexLengthMismatch { expected: usize, found: usize },
    #[error("reality violated at ({alpha:?}, {beta:?}): coefficient is not the conjugate of its mirror")]
    RealityViolated { alpha: MultiIndex, beta: MultiIndex },
    #[error("model functions must vanish at the origin; drop the constant term")]
    ConstantTermNonzero,
    #[error("duplicate term at ({alpha:?}, {beta:?})")]
    DuplicateTerm { alpha: MultiIndex, beta: MultiIndex },
}

/// A real-valued polynomial `F(z, z̄) = Σ c_{αβ} z^α z̄^β` in `n` complex
/// variables, vanishing at 0, with `c_{αβ} = conj(c_{βα})` throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFunction {
    n: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), GaussianRational>,
}

impl ModelFunction {
    pub fn new<I>(n: usize, terms: I) -> Result<Self, TypecheckError>
    where
        I: IntoIterator<Item = ((MultiIndex, MultiIndex), GaussianRational)>,
    {
        let mut map: BTreeMap<(MultiIndex, MultiIndex), GaussianRational> = BTreeMap::new();
        for ((alpha, beta), c) in terms {
            for idx in [&alpha, &beta] {
                if idx.len() != n {
                    return Err(TypecheckError::IndexLengthMismatch {
                        expected: n,
                        found: idx.len(),
                    });
                }
            }
            if c.is_zero() {
                continue;
            }
            if alpha.iter().all(|&e| e == 0) && beta.iter().all(|&e| e == 0) {
                return Err(TypecheckError::ConstantTermNonzero);
            }
            if map.insert((alpha.clone(), beta.clone()), c).is_some() {
                return Err(TypecheckError::DuplicateTerm { alpha, beta });
            }
        }
        for ((alpha, beta), c) in &map {
            let mirror = map
                .get(&(beta.clone(), alpha.clone()))
                .cloned()
                .unwrap_or_else(GaussianRational::zero);
            if mirror != c.conj() {
                return Err(TypecheckError::RealityViolated {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                });
            }
        }
        Ok(ModelFunction { n, terms: map })
    }

    /// The family's potential sum restricted to its analytic skeleton:
    /// `Σ_j Σ_{m ≤ K} (a^j_m/2)(z_j^m + z̄_j^m)`.
    pub fn from_family(family: &SequenceFamily, truncation: usize) -> Self {
        assert!((1..=family.m_max()).contains(&truncation));
        let n = family.n();
        let mut terms = BTreeMap::new();
        for j in 1..=n {
            for m in 1..=truncation {
                let half = GaussianRational::from_rational(BigRational::new(
                    family.a(j, m).clone(),
                    2.into(),
                ));
                let mut idx = vec![0u32; n];
                idx[j - 1] = m as u32;
                let zero = vec![0u32; n];
                terms.insert((idx.clone(), zero.clone()), half.clone());
                terms.insert((zero, idx), half);
            }
        }
        ModelFunction { n, terms }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<(MultiIndex, MultiIndex), GaussianRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Splits into (pure, mixed): pure terms have `α = 0` or `β = 0` (the
    /// pluriharmonic part), mixed terms have both nonzero. Each half is again
    /// a valid model function.
    pub fn pluriharmonic_split(&self) -> (ModelFunction, ModelFunction) {
        let mut pure = BTreeMap::new();
        let mut mixed = BTreeMap::new();
        for ((alpha, beta), c) in &self.terms {
            let target = if alpha.iter().all(|&e| e == 0) || beta.iter().all(|&e| e == 0) {
                &mut pure
            } else {
                &mut mixed
            };
            target.insert((alpha.clone(), beta.clone()), c.clone());
        }
        (
            ModelFunction { n: self.n, terms: pure },
            ModelFunction { n: self.n, terms: mixed },
        )
    }

    /// Lowest total degree `|α| + |β|` among mixed terms, when it resolves
    /// within the degree window `K`; otherwise `AtLeast(K + 1)`.
    pub fn bg_type(&self, window: usize) -> Valuation {
        let (_, mixed) = self.pluriharmonic_split();
        let best = mixed
            .terms
            .keys()
            .map(|(a, b)| (a.iter().sum::<u32>() + b.iter().sum::<u32>()) as usize)
            .min();
        match best {
            Some(d) if d <= window => Valuation::Finite(d),
            _ => Valuation::AtLeast(window + 1),
        }
    }
}

impl Serialize for ModelFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct Term<'a> {
            alpha: &'a [u32],
            beta: &'a [u32],
            coeff: &'a GaussianRational,
        }
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|((a, b), c)| Term {
                alpha: a,
                beta: b,
                coeff: c,
            })
            .collect();
        let mut st = serializer.serialize_struct("ModelFunction", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ModelFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Term {
            alpha: MultiIndex,
            beta: MultiIndex,
            coeff: GaussianRational,
        }
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            terms: Vec<Term>,
        }
        let raw = Raw::deserialize(deserializer)?;
        ModelFunction::new(
            raw.n,
            raw.terms.into_iter().map(|t| ((t.alpha, t.beta), t.coeff)),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// The monomial test curve that produced a bound, with its exact pullback
/// data. Component `j` is `c_j · t^{p_j}` (`c_j = 0` marks an inactive
/// coordinate), and the distinguished component is the graph completion
/// `w(t) = −2·H(z(t))` over the pluriharmonic part `2 Re H`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeWitness {
    pub coefficients: Vec<GaussianRational>,
    pub exponents: Vec<usize>,
    /// Sparse `w(t)`: (degree, coefficient), ascending.
    pub w_poly: Vec<(usize, GaussianRational)>,
    /// `ν(γ) = min(min active p_j, ν(w))`.
    pub curve_valuation: usize,
    /// Valuation in `(t, t̄)` of the mixed part pulled back through the
    /// curve; `AtLeast(K+1)` when the pullback vanishes identically.
    pub pullback_valuation: Valuation,
}

/// A certified lower bound for the contact type.
#[derive(Debug, Clone, PartialEq)]
pub enum TypeBound {
    /// `ν(r∘γ)/ν(γ)` for the best test curve found.
    Finite(BigRational),
    /// Some test curve's pullback vanishes identically: its contact order is
    /// unbounded, so the type exceeds the reporting window `K`.
    AtLeast(usize),
}

impl std::fmt::Display for TypeBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TypeBound::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            TypeBound::AtLeast(b) => write!(f, ">={b}"),
        }
    }
}

/// Lower bound plus the witness curve that achieved it.
#[derive(Debug, Clone, PartialEq)]
pub struct DangeloBound {
    pub bound: TypeBound,
    pub witness: TypeWitness,
}

fn gr_pow(c: &GaussianRational, k: u32) -> GaussianRational {
    let mut acc = GaussianRational::one();
    for _ in 0..k {
        acc = &acc * c;
    }
    acc
}

/// Searches monomial curves `z_j = c_j t^{p_j}` with unit coefficients
/// `c_j ∈ {1, −1, i}` and exponents `p_j ≤ budget`, completed over the
/// pluriharmonic graph, and returns the largest certified ratio
/// `ν(r∘γ)/ν(γ)` — or `AtLeast(window+1)` from the first curve whose
/// pullback vanishes identically. Deterministic: candidates are scanned in
/// lexicographic order.
pub fn dangelo_lower_bound(
    model: &ModelFunction,
    budget: usize,
    window: usize,
) -> DangeloBound {
    assert!(budget >= 1 && window >= 1);
    let n = model.n();
    let (pure, mixed) = model.pluriharmonic_split();
    // H: the analytic half of the pure part (β = 0, α ≠ 0).
    let analytic: Vec<(&MultiIndex, &GaussianRational)> = pure
        .terms
        .iter()
        .filter(|((a, b), _)| b.iter().all(|&e| e == 0) && a.iter().any(|&e| e > 0))
        .map(|((a, _), c)| (a, c))
        .collect();
    let units = [
        GaussianRational::one(),
        -GaussianRational::one(),
        GaussianRational::i(),
    ];
    let options = 3 * budget + 1;
    let mut best: Option<(BigRational, TypeWitness)> = None;
    let mut counter = vec![0usize; n];
    loop {
        // Decode the assignment: 0 = inactive, else (unit, exponent).
        let assignment: Vec<Option<(GaussianRational, usize)>> = counter
            .iter()
            .map(|&o| {
                if o == 0 {
                    None
                } else {
                    let unit = units[(o - 1) / budget].clone();
                    let p = (o - 1) % budget + 1;
                    Some((unit, p))
                }
            })
            .collect();
        if assignment.iter().any(Option::is_some) {
            if let Some(result) = evaluate_curve(&assignment, &analytic, &mixed, window) {
                match result.pullback_valuation {
                    Valuation::AtLeast(_) => {
                        // First window-clearing curve wins outright.
                        return DangeloBound {
                            bound: TypeBound::AtLeast(window + 1),
                            witness: result,
                        };
                    }
                    Valuation::Finite(v) => {
                        let ratio = BigRational::new(
                            (v as i64).into(),
                            (result.curve_valuation as i64).into(),
                        );
                        let improves = match &best {
                            Some((current, _)) => ratio > *current,
                            None => true,
                        };
                        if improves {
                            best = Some((ratio, result));
                        }
                    }
                }
            }
        }
        // Lexicographic increment, last coordinate fastest.
        let mut pos = n;
        loop {
            if pos == 0 {
                let (ratio, witness) = best.expect("at least one active assignment exists");
                return DangeloBound {
                    bound: TypeBound::Finite(ratio),
                    witness,
                };
            }
            pos -= 1;
            counter[pos] += 1;
            if counter[pos] < options {
                break;
            }
            counter[pos] = 0;
        }
    }
}

/// Pullback data for one assignment; `None` when the curve is degenerate for
/// this model (never happens for at-least-one-active assignments, kept for
/// clarity of control flow).
fn evaluate_curve(
    assignment: &[Option<(GaussianRational, usize)>],
    analytic: &[(&MultiIndex, &GaussianRational)],
    mixed: &ModelFunction,
    window: usize,
) -> Option<TypeWitness> {
    let nu_z = assignment
        .iter()
        .flatten()
        .map(|(_, p)| *p)
        .min()?;
    // Monomial substitution of one multi-index: dies if it touches an
    // inactive coordinate, else yields (Σ α_j p_j, Π c_j^{α_j}).
    let substitute = |idx: &MultiIndex, conjugate: bool| -> Option<(usize, GaussianRational)> {
        let mut degree = 0usize;
        let mut coeff = GaussianRational::one();
        for (e, slot) in idx.iter().zip(assignment) {
            if *e == 0 {
                continue;
            }
            let (c, p) = slot.as_ref()?;
            degree += *p * *e as usize;
            let base = if conjugate { c.conj() } else { c.clone() };
            coeff = &coeff * &gr_pow(&base, *e);
        }
        Some((degree, coeff))
    };
    // w(t) = −2 H(z(t)).
    let mut w_poly: BTreeMap<usize, GaussianRational> = BTreeMap::new();
    for (alpha, c) in analytic {
        if let Some((degree, unit)) = substitute(alpha, false) {
            let contribution = &(*c * &unit) * &GaussianRational::from_int(-2);
            let slot = w_poly.entry(degree).or_insert_with(GaussianRational::zero);
            *slot += &contribution;
        }
    }
    w_poly.retain(|_, c| !c.is_zero());
    let nu_w = w_poly.keys().next().copied();
    let curve_valuation = match nu_w {
        Some(w) => nu_z.min(w),
        None => nu_z,
    };
    // Mixed pullback in (t, t̄).
    let mut pullback: BTreeMap<(usize, usize), GaussianRational> = BTreeMap::new();
    for ((alpha, beta), c) in mixed.terms() {
        let (Some((dt, ca)), Some((db, cb))) =
            (substitute(alpha, false), substitute(beta, true))
        else {
            continue;
        };
        let contribution = &(c * &ca) * &cb;
        let slot = pullback
            .entry((dt, db))
            .or_insert_with(GaussianRational::zero);
        *slot += &contribution;
    }
    pullback.retain(|_, c| !c.is_zero());
    // Exact polynomial data: a nonzero pullback has an exact valuation, and
    // only identical vanishing (unbounded contact) escapes to `AtLeast`.
    let pullback_valuation = match pullback.keys().map(|&(dt, db)| dt + db).min() {
        Some(v) => Valuation::Finite(v),
        None => Valuation::AtLeast(window + 1),
    };
    Some(TypeWitness {
        coefficients: assignment
            .iter()
            .map(|slot| {
                slot.as_ref()
                    .map(|(c, _)| c.clone())
                    .unwrap_or_else(GaussianRational::zero)
            })
            .collect(),
        exponents: assignment
            .iter()
            .map(|slot| slot.as_ref().map(|(_, p)| *p).unwrap_or(0))
            .collect(),
        w_poly: w_poly.into_iter().collect(),
        curve_valuation,
        pullback_valuation,
    })
}
