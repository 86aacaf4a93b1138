//! Finite-order certificates: why no curve can osculate a spiked family to
//! infinite order.
//!
//! The pipeline per curve: rescale the parameter so every coefficient has
//! modulus at most 1 (exactly, by a power of 1/2); locate the lowest contact
//! degree `m*` among the coordinate components and its leading coefficient
//! `α`; compute the threshold index `k0` past which the designated spike
//! value overwhelms every other contribution at degree `k·m*`; and report the
//! first designated spike `k ≥ k0` together with the bound
//! `observed_order ≤ k·m*`, cross-checked against the exactly computed order.

use num_bigint::BigInt;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{serde_opt_rational, BigRational, GaussianRational};
use crate::construct::{spike_designee, SequenceFamily};
use crate::exec;
use crate::hypersurface::{tangency_order, Curve, HypersurfaceError};
use crate::series::{TruncatedSeries, Valuation};

#[derive(Debug, thiserror::Error)]
pub enum ObstructError {
    #[error(transparent)]
    Curve(#[from] HypersurfaceError),
    #[error(
        "truncation {truncation} cannot reach a designated spike at or past {k0} \
         for contact degree {m_star}"
    )]
    TruncationTooSmall {
        k0: usize,
        m_star: usize,
        truncation: usize,
    },
}

/// A curve rescaled so that every coefficient satisfies `|c|² ≤ 1`, with the
/// exact dyadic scale that achieved it.
#[derive(Debug, Clone)]
pub struct NormalizedCurve {
    pub curve: Curve,
    /// `λ = 2^{-log2_scale}` is minimal among powers of 1/2.
    pub log2_scale: u32,
    pub scale: BigRational,
}

/// Rescales `t ↦ λt` with the largest `λ = 1/2^p` making every coefficient's
/// squared modulus at most 1. Entirely exact: a degree-`d` coefficient `c`
/// needs `|c|² ≤ 4^{d·p}`, an integer comparison.
pub fn normalize_curve(curve: &Curve) -> NormalizedCurve {
    let mut p: u32 = 0;
    let components = curve.h().iter().chain(std::iter::once(curve.g()));
    for series in components {
        for (d, c) in series.coeffs().iter().enumerate().skip(1) {
            if c.is_zero() {
                continue;
            }
            let q = c.abs_sq();
            let factor = BigInt::from(4).pow(d as u32);
            let mut bound = q.denom().clone();
            let mut pc: u32 = 0;
            while *q.numer() > bound {
                pc += 1;
                bound *= &factor;
            }
            p = p.max(pc);
        }
    }
    let scale = BigRational::new(BigInt::one(), BigInt::from(2).pow(p));
    NormalizedCurve {
        curve: curve.rescale_variable(&scale),
        log2_scale: p,
        scale,
    }
}

/// Smallest integer `c ≥ 1` with `c² · q ≥ 1`, i.e. `ceil(1/√q)` — exact:
/// seeded by an integer square root and finished by squared comparisons.
pub(crate) fn ceil_inv_sqrt(q: &BigRational) -> usize {
    use num_integer::Integer;
    assert!(!q.numer().is_zero(), "needs a positive ratio");
    let (quot, _) = q.denom().div_rem(q.numer());
    // floor(√floor(den/num)) undershoots the target by at most a couple of
    // steps, so the exact adjustment loop is O(1).
    let mut c = quot.sqrt().max(BigInt::one());
    while &c * &c * q.numer() < *q.denom() {
        c += 1;
    }
    c.to_usize().expect("threshold index fits a machine word")
}

/// The exact coefficient of `t^{k·m_star}` in `h^m` for each `1 ≤ m ≤ k`,
/// compared against the combinatorial envelope `k^{4k}` (squared moduli).
#[derive(Debug, Clone)]
pub struct CompositionBoundCheck {
    pub k: usize,
    pub m_star: usize,
    /// `(m, [t^{k·m_star}] h^m)` for each power.
    pub sums: Vec<(usize, GaussianRational)>,
    /// `k^{4k}`: every `|sum|²` must stay at or below this.
    pub bound: BigInt,
    pub pass: bool,
}

/// Checks the coefficient-sum envelope for one component of a normalized
/// curve (all `|coeff|² ≤ 1` assumed) at power window `k ≥ m_star ≥ 1`.
pub fn composition_sum_bound(
    h: &TruncatedSeries,
    k: usize,
    m_star: usize,
) -> CompositionBoundCheck {
    assert!(m_star >= 1 && k >= m_star, "power window needs k ≥ m_star ≥ 1");
    let target = k * m_star;
    let extended = h.resized(target);
    let bound = BigInt::from(k).pow(4 * k as u32);
    let bound_sq = BigRational::from(bound.clone());
    let mut sums = Vec::with_capacity(k);
    let mut pass = true;
    let mut power = TruncatedSeries::monomial(target, 0, GaussianRational::one());
    for m in 1..=k {
        power = power
            .mul_truncated(&extended)
            .expect("powers stay aligned by construction");
        let c = power.coeff(target).clone();
        if c.abs_sq() > bound_sq {
            pass = false;
        }
        sums.push((m, c));
    }
    CompositionBoundCheck {
        k,
        m_star,
        sums,
        bound,
        pass,
    }
}

/// Which components of the curve carry the contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveCase {
    /// Every coordinate component vanishes: contact is just the valuation of
    /// the distinguished component, no spike machinery involved.
    AllHZero,
    /// Distinguished component vanishes; spikes bound the order.
    GZero,
    /// Both parts present; spikes bound the order.
    General,
}

/// The full verdict for one curve. Spike-related fields are `None` exactly in
/// the [`CurveCase::AllHZero`] case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionCertificate {
    pub case: CurveCase,
    pub truncation: usize,
    /// The normalization exponent: the curve was rescaled by `2^{-p}`.
    pub normalization_log2: u32,
    /// Exact valuation of the composed series (after normalization, which
    /// preserves it).
    pub observed_order: Valuation,
    /// Lowest coordinate contact degree `m* = min_j ν(h_j)`.
    pub m_star: Option<usize>,
    /// First coordinate attaining `m*`.
    pub q: Option<usize>,
    /// Squared modulus of the leading coefficient of `h_q`.
    #[serde(with = "serde_opt_rational")]
    pub alpha_sq: Option<BigRational>,
    /// Spike threshold `1 + max(m*, ceil(1/|α|))`.
    pub k0: Option<usize>,
    /// First spike designated to `q` at or past `k0`.
    pub spike_hit: Option<usize>,
    /// `spike_hit · m*`: the certified ceiling on the contact order.
    pub order_bound: Option<usize>,
    /// Whether the exactly computed order respects the ceiling.
    pub bound_respected: bool,
}

/// Certifies one curve against one family. Errors with
/// [`ObstructError::TruncationTooSmall`] when no designated spike fits inside
/// the truncation window, and propagates curve/family shape mismatches.
pub fn obstruction_certificate(
    curve: &Curve,
    family: &SequenceFamily,
) -> Result<ObstructionCertificate, ObstructError> {
    let normalized = normalize_curve(curve);
    let contact = tangency_order(&normalized.curve, family)?;
    let truncation = curve.truncation_order();
    let h_all_zero = normalized.curve.h().iter().all(TruncatedSeries::is_zero);
    if h_all_zero {
        // Contact reduces to the distinguished component, whose valuation is
        // finite because the curve is nonconstant.
        return Ok(ObstructionCertificate {
            case: CurveCase::AllHZero,
            truncation,
            normalization_log2: normalized.log2_scale,
            observed_order: contact.order,
            m_star: None,
            q: None,
            alpha_sq: None,
            k0: None,
            spike_hit: None,
            order_bound: None,
            bound_respected: true,
        });
    }
    let case = if normalized.curve.g().is_zero() {
        CurveCase::GZero
    } else {
        CurveCase::General
    };
    let mut m_star = usize::MAX;
    let mut q = 0;
    for (j0, h) in normalized.curve.h().iter().enumerate() {
        if let Valuation::Finite(v) = h.valuation() {
            if v < m_star {
                m_star = v;
                q = j0 + 1;
            }
        }
    }
    let (_, alpha) = normalized.curve.h()[q - 1]
        .leading()
        .expect("component with finite valuation has a leading coefficient");
    let alpha_sq = alpha.abs_sq();
    let k0 = 1 + m_star.max(ceil_inv_sqrt(&alpha_sq));
    let spike_hit = family
        .spikes()
        .iter()
        .enumerate()
        .find(|&(s0, &k)| spike_designee(s0 + 1, family.n()) == q && k >= k0)
        .map(|(_, &k)| k);
    let spike_hit = match spike_hit {
        Some(k) if k * m_star <= truncation => k,
        _ => {
            return Err(ObstructError::TruncationTooSmall {
                k0,
                m_star,
                truncation,
            })
        }
    };
    let order_bound = spike_hit * m_star;
    let bound_respected = match contact.order {
        Valuation::Finite(o) => o <= order_bound,
        Valuation::AtLeast(_) => false,
    };
    Ok(ObstructionCertificate {
        case,
        truncation,
        normalization_log2: normalized.log2_scale,
        observed_order: contact.order,
        m_star: Some(m_star),
        q: Some(q),
        alpha_sq: Some(alpha_sq),
        k0: Some(k0),
        spike_hit: Some(spike_hit),
        order_bound: Some(order_bound),
        bound_respected,
    })
}

/// Certifies a batch of curves; results keep the input order.
pub fn certify_batch(
    curves: &[Curve],
    family: &SequenceFamily,
) -> Vec<Result<ObstructionCertificate, ObstructError>> {
    certify_batch_impl(curves, family, true)
}

/// Sequential twin of [`certify_batch`]; same output, single-threaded.
pub fn certify_batch_seq(
    curves: &[Curve],
    family: &SequenceFamily,
) -> Vec<Result<ObstructionCertificate, ObstructError>> {
    certify_batch_impl(curves, family, false)
}

fn certify_batch_impl(
    curves: &[Curve],
    family: &SequenceFamily,
    parallel: bool,
) -> Vec<Result<ObstructionCertificate, ObstructError>> {
    let items: Vec<&Curve> = curves.iter().collect();
    exec::map_collect(items, parallel, |curve| {
        obstruction_certificate(curve, family)
    })
}

fn draw_part<R: Rng + ?Sized>(rng: &mut R) -> BigRational {
    let q = rng.random_range(1i64..=8);
    let p = rng.random_range(-q..=q);
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn draw_coeff<R: Rng + ?Sized>(rng: &mut R) -> GaussianRational {
    loop {
        let c = GaussianRational::new(draw_part(rng), draw_part(rng));
        if c.abs_sq() <= BigRational::one() {
            return c;
        }
    }
}

/// Draws a nonconstant curve whose coefficients are already normalized:
/// each is a Gaussian rational with parts `p/q`, `1 ≤ q ≤ 8`, `|p| ≤ q`,
/// redrawn until its squared modulus is at most 1. Degrees above `deg` stay
/// zero; all components share `truncation`.
pub fn random_normalized_curve<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    deg: usize,
    truncation: usize,
) -> Curve {
    assert!(n >= 1 && deg >= 1 && truncation >= deg);
    loop {
        let mut components = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let mut s = TruncatedSeries::zero(truncation);
            for d in 1..=deg {
                s.set_coeff(d, draw_coeff(rng));
            }
            components.push(s);
        }
        let g = components.pop().expect("n + 1 components were pushed");
        if components.iter().all(TruncatedSeries::is_zero) && g.is_zero() {
            continue;
        }
        return Curve::new(components, g)
            .expect("drawn components share truncation and vanish at 0");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::gen_sequences;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn monic_t(truncation: usize, num: i64, den: i64) -> TruncatedSeries {
        TruncatedSeries::monomial(
            truncation,
            1,
            GaussianRational::from_ratios(num, den, 0, 1),
        )
    }

    #[test]
    fn normalization_picks_the_minimal_dyadic_scale() {
        // h = 4t needs λ = 1/4: |4/2|² = 4 > 1 but |4/4|² = 1.
        let curve = Curve::new(vec![monic_t(2, 4, 1)], TruncatedSeries::zero(2)).unwrap();
        let norm = normalize_curve(&curve);
        assert_eq!(norm.log2_scale, 2);
        assert_eq!(norm.scale, BigRational::new(1.into(), 4.into()));
        assert_eq!(
            norm.curve.h()[0].coeff(1),
            &GaussianRational::from_int(1)
        );
        // A degree-2 coefficient gets the squared scale: 2t² ↦ 2(t/4)² = t²/8.
        let curve = Curve::new(
            vec![monic_t(2, 4, 1)],
            TruncatedSeries::monomial(2, 2, GaussianRational::from_int(2)),
        )
        .unwrap();
        let norm = normalize_curve(&curve);
        assert_eq!(norm.log2_scale, 2);
        assert_eq!(
            norm.curve.g().coeff(2),
            &GaussianRational::from_ratios(1, 8, 0, 1)
        );
        // Already-normalized curves are untouched.
        let curve = Curve::new(vec![monic_t(2, 1, 2)], TruncatedSeries::zero(2)).unwrap();
        assert_eq!(normalize_curve(&curve).log2_scale, 0);
    }

    #[test]
    fn inverse_sqrt_ceiling_is_exact() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(ceil_inv_sqrt(&r(1, 1)), 1);
        assert_eq!(ceil_inv_sqrt(&r(4, 1)), 1);
        assert_eq!(ceil_inv_sqrt(&r(1, 4)), 2);
        assert_eq!(ceil_inv_sqrt(&r(1, 5)), 3);
        assert_eq!(ceil_inv_sqrt(&r(1, 49)), 7);
        assert_eq!(ceil_inv_sqrt(&r(1, 50)), 8);
        assert_eq!(ceil_inv_sqrt(&r(999999, 1000000)), 2);
    }

    #[test]
    fn power_window_sums_match_hand_expansion() {
        // h = t + t²: h² = t² + 2t³ + t⁴, h³ = t³ + 3t⁴ + …
        let mut h = TruncatedSeries::zero(2);
        h.set_coeff(1, GaussianRational::one());
        h.set_coeff(2, GaussianRational::one());
        let check = composition_sum_bound(&h, 3, 1);
        assert!(check.pass);
        assert_eq!(check.bound, BigInt::from(3).pow(12u32));
        let got: Vec<i64> = check
            .sums
            .iter()
            .map(|(_, c)| {
                let (re, im) = c.to_f64();
                assert_eq!(im, 0.0);
                re as i64
            })
            .collect();
        assert_eq!(got, vec![0, 2, 1]);
    }

    #[test]
    fn unit_tangent_certificate_hits_the_first_spike() {
        let fam = gen_sequences(1, &[2], 8).unwrap();
        let curve = Curve::new(vec![monic_t(8, 1, 1)], TruncatedSeries::zero(8)).unwrap();
        let cert = obstruction_certificate(&curve, &fam).unwrap();
        assert_eq!(cert.case, CurveCase::GZero);
        assert_eq!(cert.m_star, Some(1));
        assert_eq!(cert.q, Some(1));
        assert_eq!(cert.alpha_sq, Some(BigRational::one()));
        assert_eq!(cert.k0, Some(2));
        assert_eq!(cert.spike_hit, Some(2));
        assert_eq!(cert.order_bound, Some(2));
        assert_eq!(cert.observed_order, Valuation::Finite(1));
        assert!(cert.bound_respected);
        assert_eq!(cert.normalization_log2, 0);
    }

    #[test]
    fn small_leading_coefficient_raises_the_threshold() {
        let fam = gen_sequences(1, &[2, 4], 8).unwrap();
        // α = 1/3: ceil(1/|α|) = 3, so k0 = 4 and only the second spike works.
        let curve = Curve::new(vec![monic_t(8, 1, 3)], TruncatedSeries::zero(8)).unwrap();
        let cert = obstruction_certificate(&curve, &fam).unwrap();
        assert_eq!(cert.k0, Some(4));
        assert_eq!(cert.spike_hit, Some(4));
        assert!(cert.bound_respected);
        // α = 1/5 pushes k0 past every spike: honest failure.
        let curve = Curve::new(vec![monic_t(8, 1, 5)], TruncatedSeries::zero(8)).unwrap();
        let err = obstruction_certificate(&curve, &fam).unwrap_err();
        assert!(matches!(
            err,
            ObstructError::TruncationTooSmall { k0: 6, m_star: 1, truncation: 8 }
        ));
    }

    #[test]
    fn window_overflow_is_an_honest_failure() {
        let fam = gen_sequences(1, &[2], 8).unwrap();
        // Same curve, but truncated so shallow the spike window cannot fit.
        let curve = Curve::new(vec![monic_t(1, 1, 1)], TruncatedSeries::zero(1)).unwrap();
        let err = obstruction_certificate(&curve, &fam).unwrap_err();
        assert!(matches!(
            err,
            ObstructError::TruncationTooSmall { k0: 2, m_star: 1, truncation: 1 }
        ));
    }

    #[test]
    fn pure_distinguished_curves_skip_the_spike_machinery() {
        let fam = gen_sequences(2, &[3], 6).unwrap();
        let mut g = TruncatedSeries::zero(6);
        g.set_coeff(3, GaussianRational::from_int(5));
        g.set_coeff(5, GaussianRational::from_int(-1));
        let curve = Curve::new(
            vec![TruncatedSeries::zero(6), TruncatedSeries::zero(6)],
            g,
        )
        .unwrap();
        let cert = obstruction_certificate(&curve, &fam).unwrap();
        assert_eq!(cert.case, CurveCase::AllHZero);
        assert_eq!(cert.observed_order, Valuation::Finite(3));
        assert!(cert.bound_respected);
        assert_eq!(cert.m_star, None);
        assert_eq!(cert.spike_hit, None);
        assert_eq!(cert.order_bound, None);
    }

    #[test]
    fn certificates_serialize_rationals_as_strings() {
        let fam = gen_sequences(1, &[2], 8).unwrap();
        let curve = Curve::new(vec![monic_t(8, 1, 3)], TruncatedSeries::zero(8)).unwrap();
        let fam2 = gen_sequences(1, &[2, 4], 8).unwrap();
        let cert = obstruction_certificate(&curve, &fam2).unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        assert!(json.contains("\"alpha_sq\":\"1/9\""), "{json}");
        let back: ObstructionCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(cert, back);
        // The degenerate case round-trips its nulls.
        let mut g = TruncatedSeries::zero(8);
        g.set_coeff(2, GaussianRational::one());
        let curve = Curve::new(vec![TruncatedSeries::zero(8)], g).unwrap();
        let cert = obstruction_certificate(&curve, &fam).unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        assert!(json.contains("\"alpha_sq\":null"), "{json}");
        let back: ObstructionCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(cert, back);
    }

    #[test]
    fn batch_is_deterministic_and_strategy_independent() {
        let fam = gen_sequences(2, &[3, 6], 18).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let curves: Vec<Curve> = (0..12)
            .map(|_| random_normalized_curve(&mut rng, 2, 4, 18))
            .collect();
        let mut rng2 = ChaCha8Rng::seed_from_u64(42);
        let again: Vec<Curve> = (0..12)
            .map(|_| random_normalized_curve(&mut rng2, 2, 4, 18))
            .collect();
        assert_eq!(curves, again, "same seed, same curves");
        let par = certify_batch(&curves, &fam);
        let seq = certify_batch_seq(&curves, &fam);
        assert_eq!(par.len(), seq.len());
        for (a, b) in par.iter().zip(&seq) {
            match (a, b) {
                (Ok(x), Ok(y)) => assert_eq!(x, y),
                (Err(x), Err(y)) => assert_eq!(x.to_string(), y.to_string()),
                _ => panic!("strategies disagree"),
            }
        }
    }

    #[test]
    fn drawn_curves_are_normalized_nonconstant_and_bounded_degree() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let curve = random_normalized_curve(&mut rng, 3, 5, 12);
            assert!(!curve.is_constant());
            assert_eq!(curve.n_components(), 3);
            assert_eq!(curve.truncation_order(), 12);
            for series in curve.h().iter().chain(std::iter::once(curve.g())) {
                for (d, c) in series.coeffs().iter().enumerate() {
                    assert!(c.abs_sq() <= BigRational::one());
                    if d > 5 {
                        assert!(c.is_zero(), "degree {d} should be empty");
                    }
                }
            }
            assert_eq!(normalize_curve(&curve).log2_scale, 0);
        }
    }
}
