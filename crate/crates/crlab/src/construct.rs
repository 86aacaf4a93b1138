//! Construction of the model hypersurfaces: integer coefficient families with
//! super-exponential spike schedules, the smooth radial assembly of each
//! coordinate's potential, Laplacian evaluation, subharmonicity sampling, and
//! Taylor-coefficient recovery from circle averages.
//!
//! Exact data (the coefficient families) lives in `BigInt`; everything related
//! to the smooth assembly is `f64`, with log-space fallbacks wherever the raw
//! magnitudes can leave the representable range.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{FromPrimitive, One, Pow, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::ln_bigint;
use crate::dd::{cos_table, Dd};
use crate::exec;
use crate::smoothfn::{compute_constant, ConvexProfileSpec, CutoffSpec, SubharmonicityConstant};

#[derive(Debug, thiserror::Error)]
pub enum ConstructError {
    #[error("invalid spike schedule: {reason}")]
    InvalidSchedule { reason: String },
    #[error("family data malformed: {reason}")]
    MalformedFamily { reason: String },
    #[error("support radius at order {m} of sequence {j} exceeds the representable range")]
    EpsRangeExceeded { j: usize, m: usize },
    #[error("Laplacian is singular at the origin")]
    OriginSingularity,
    #[error("extraction radius {r:e} outside the open identity disc (0, {max_r:e})")]
    RadiusTooLarge { r: f64, max_r: f64 },
    #[error("node count {nodes} must be a power of two, at least {min}")]
    InvalidNodes { nodes: usize, min: usize },
}

/// Arithmetic spike schedule `k_s = k1 + (s − 1)(n + 1)`: consecutive gaps of
/// `n + 1` exceed the sequence count `n`, as the growth verification needs.
pub fn gen_spike_schedule(n: usize, count: usize, k1: usize) -> Result<Vec<usize>, ConstructError> {
    if n == 0 {
        return Err(ConstructError::InvalidSchedule {
            reason: "need at least one sequence".into(),
        });
    }
    if k1 < 2 {
        return Err(ConstructError::InvalidSchedule {
            reason: format!("first spike {k1} must be at least 2"),
        });
    }
    Ok((0..count).map(|s| k1 + s * (n + 1)).collect())
}

/// Which sequence a spike targets: spikes cycle through the sequences in
/// order, so spike `s` (1-based) designates `((s − 1) mod n) + 1`.
pub fn spike_designee(s: usize, n: usize) -> usize {
    assert!(s >= 1 && n >= 1, "spike index and sequence count are 1-based");
    ((s - 1) % n) + 1
}

/// Smallest `e ≥ 0` with `e^m ≥ x`, for `x ≥ 0`, `m ≥ 1`.
pub fn ceil_nth_root(x: &BigInt, m: u32) -> BigInt {
    assert!(m >= 1 && x.sign() != num_bigint::Sign::Minus);
    let root = x.nth_root(m);
    if (&root).pow(m) >= *x {
        root
    } else {
        root + 1
    }
}

/// The growth threshold a designated spike value must strictly exceed:
/// `k^k · (k^{2k} · (partial sums of everything already chosen) + 1)`,
/// where sequence `q` contributes its terms below `k` and every other
/// sequence its terms up to and including `k`.
fn spike_growth_rhs(a: &[Vec<BigInt>], q: usize, k: usize) -> BigInt {
    let q0 = q - 1;
    let mut total = BigInt::zero();
    for x in &a[q0][..k - 1] {
        total += x;
    }
    for (j0, row) in a.iter().enumerate() {
        if j0 == q0 {
            continue;
        }
        for x in &row[..k] {
            total += x;
        }
    }
    let kb = BigInt::from(k);
    (&kb).pow(k as u32) * ((&kb).pow(2 * k as u32) * total + BigInt::one())
}

/// A family of `n` strictly increasing positive integer sequences with
/// scheduled super-exponential spikes, together with per-term support radii:
/// the integer skeleton every model in this crate is built from.
///
/// Invariants held by construction (and re-checkable via
/// [`verify_spike_conditions`]): each sequence starts at its own index and is
/// strictly increasing; at the `s`-th spike `k_s` the designated sequence
/// jumps strictly above [`spike_growth_rhs`]; each radius `eps(j, m)` is at
/// least `m`, satisfies `eps^m ≥ a²`, and is nondecreasing in `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceFamily {
    n: usize,
    m_max: usize,
    spikes: Vec<usize>,
    a: Vec<Vec<BigInt>>,
    eps: Vec<Vec<u128>>,
}

/// Generates the canonical family for a spike schedule: sequence `j` starts
/// at `j`, grows by `+1` off-spike, and at each spike the designated sequence
/// jumps to one more than the growth threshold (the other sequences take
/// their `+1` step first, so the threshold sees their spike-index values).
pub fn gen_sequences(
    n: usize,
    spikes: &[usize],
    m_max: usize,
) -> Result<SequenceFamily, ConstructError> {
    validate_schedule(n, spikes, m_max)?;
    if m_max < 1 {
        return Err(ConstructError::MalformedFamily {
            reason: "truncation order must be positive".into(),
        });
    }
    let mut a: Vec<Vec<BigInt>> = (1..=n).map(|j| vec![BigInt::from(j)]).collect();
    let mut next_spike = 0usize;
    for m in 2..=m_max {
        if next_spike < spikes.len() && spikes[next_spike] == m {
            let q = spike_designee(next_spike + 1, n);
            for (j0, row) in a.iter_mut().enumerate() {
                if j0 != q - 1 {
                    let next = &row[m - 2] + 1;
                    row.push(next);
                }
            }
            let rhs = spike_growth_rhs(&a, q, m);
            a[q - 1].push(rhs + 1);
            next_spike += 1;
        } else {
            for row in a.iter_mut() {
                let next = &row[m - 2] + 1;
                row.push(next);
            }
        }
    }
    let mut eps = Vec::with_capacity(n);
    for (j0, row) in a.iter().enumerate() {
        let mut radii: Vec<u128> = Vec::with_capacity(m_max);
        let mut running: u128 = 1;
        for (m0, value) in row.iter().enumerate() {
            let m = m0 + 1;
            let needed = ceil_nth_root(&(value * value), m as u32);
            let needed = needed
                .to_u128()
                .ok_or(ConstructError::EpsRangeExceeded { j: j0 + 1, m })?;
            running = running.max(needed).max(m as u128);
            radii.push(running);
        }
        eps.push(radii);
    }
    Ok(SequenceFamily {
        n,
        m_max,
        spikes: spikes.to_vec(),
        a,
        eps,
    })
}

fn validate_schedule(n: usize, spikes: &[usize], m_max: usize) -> Result<(), ConstructError> {
    if n == 0 {
        return Err(ConstructError::InvalidSchedule {
            reason: "need at least one sequence".into(),
        });
    }
    for (i, &k) in spikes.iter().enumerate() {
        if i == 0 && k < 2 {
            return Err(ConstructError::InvalidSchedule {
                reason: format!("first spike {k} must be at least 2"),
            });
        }
        if i > 0 && k <= spikes[i - 1] + n {
            return Err(ConstructError::InvalidSchedule {
                reason: format!(
                    "spike gap {} → {k} must exceed the sequence count {n}",
                    spikes[i - 1]
                ),
            });
        }
        if k > m_max {
            return Err(ConstructError::InvalidSchedule {
                reason: format!("spike {k} exceeds the truncation order {m_max}"),
            });
        }
    }
    Ok(())
}

impl SequenceFamily {
    /// Builds a family from explicit data, checking shape and positivity but
    /// not the growth conditions (that is [`verify_spike_conditions`]' job).
    pub fn from_raw_parts(
        n: usize,
        m_max: usize,
        spikes: Vec<usize>,
        a: Vec<Vec<BigInt>>,
        eps: Vec<Vec<u128>>,
    ) -> Result<Self, ConstructError> {
        validate_schedule(n, &spikes, m_max)?;
        if m_max < 1 {
            return Err(ConstructError::MalformedFamily {
                reason: "truncation order must be positive".into(),
            });
        }
        if a.len() != n || eps.len() != n {
            return Err(ConstructError::MalformedFamily {
                reason: format!("expected {n} sequences, got {} values and {} radii", a.len(), eps.len()),
            });
        }
        for (j0, row) in a.iter().enumerate() {
            if row.len() != m_max {
                return Err(ConstructError::MalformedFamily {
                    reason: format!("sequence {} has {} terms, expected {m_max}", j0 + 1, row.len()),
                });
            }
            if row.iter().any(|x| x.sign() != num_bigint::Sign::Plus) {
                return Err(ConstructError::MalformedFamily {
                    reason: format!("sequence {} has a nonpositive term", j0 + 1),
                });
            }
        }
        for (j0, row) in eps.iter().enumerate() {
            if row.len() != m_max {
                return Err(ConstructError::MalformedFamily {
                    reason: format!("radii row {} has {} terms, expected {m_max}", j0 + 1, row.len()),
                });
            }
            if row.iter().any(|&e| e == 0) {
                return Err(ConstructError::MalformedFamily {
                    reason: format!("radii row {} has a zero entry", j0 + 1),
                });
            }
        }
        Ok(SequenceFamily {
            n,
            m_max,
            spikes,
            a,
            eps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn spikes(&self) -> &[usize] {
        &self.spikes
    }

    /// Coefficient `a^j_m`; both indices 1-based.
    pub fn a(&self, j: usize, m: usize) -> &BigInt {
        assert!((1..=self.n).contains(&j) && (1..=self.m_max).contains(&m));
        &self.a[j - 1][m - 1]
    }

    /// Support radius parameter `eps(j, m)`; both indices 1-based.
    pub fn eps(&self, j: usize, m: usize) -> u128 {
        assert!((1..=self.n).contains(&j) && (1..=self.m_max).contains(&m));
        self.eps[j - 1][m - 1]
    }

    pub fn a_f64(&self, j: usize, m: usize) -> f64 {
        self.a(j, m).to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn ln_a(&self, j: usize, m: usize) -> f64 {
        ln_bigint(self.a(j, m))
    }

    pub fn eps_f64(&self, j: usize, m: usize) -> f64 {
        self.eps(j, m) as f64
    }

    pub fn ln_eps(&self, j: usize, m: usize) -> f64 {
        (self.eps(j, m) as f64).ln()
    }

    /// Largest radius on which every retained term of coordinate `j` is still
    /// in its identity region: `1 / (e · eps(j, m_upper))`.
    pub fn identity_radius(&self, j: usize, m_upper: usize) -> f64 {
        (std::f64::consts::E * self.eps_f64(j, m_upper)).recip()
    }
}

/// One way a family can fail the growth conditions, with the witnessing data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpikeViolation {
    /// `a^j_m ≤ a^j_{m−1}` (or the first term differs from its floor `j`… any
    /// non-strict step).
    NotIncreasing { j: usize, m: usize },
    /// Designated spike value at or below the growth threshold.
    SpikeBound {
        s: usize,
        k: usize,
        q: usize,
        lhs: BigInt,
        rhs: BigInt,
    },
    /// `eps(j, m) < m` or `eps(j, m)^m < a(j, m)²`.
    EpsTooSmall { j: usize, m: usize },
    /// Radii must be nondecreasing in `m`.
    EpsDecreasing { j: usize, m: usize },
}

impl std::fmt::Display for SpikeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpikeViolation::NotIncreasing { j, m } => {
                write!(f, "sequence {j} fails to increase at position {m}")
            }
            SpikeViolation::SpikeBound { s, k, q, lhs, rhs } => write!(
                f,
                "spike {s} at k={k} (sequence {q}): value {lhs} does not exceed threshold {rhs}"
            ),
            SpikeViolation::EpsTooSmall { j, m } => {
                write!(f, "radius for sequence {j} at position {m} is below its floor")
            }
            SpikeViolation::EpsDecreasing { j, m } => {
                write!(f, "radius for sequence {j} decreases at position {m}")
            }
        }
    }
}

/// Outcome of [`verify_spike_conditions`].
#[derive(Debug, Clone)]
pub struct SpikeCheck {
    pub pass: bool,
    pub violations: Vec<SpikeViolation>,
}

/// Re-derives every growth and radius condition of a family from scratch,
/// exactly; returns all violations rather than stopping at the first.
pub fn verify_spike_conditions(family: &SequenceFamily) -> SpikeCheck {
    let mut violations = Vec::new();
    for j in 1..=family.n {
        for m in 2..=family.m_max {
            if family.a(j, m) <= family.a(j, m - 1) {
                violations.push(SpikeViolation::NotIncreasing { j, m });
            }
            if family.eps(j, m) < family.eps(j, m - 1) {
                violations.push(SpikeViolation::EpsDecreasing { j, m });
            }
        }
        for m in 1..=family.m_max {
            let e = BigInt::from(family.eps(j, m));
            let a = family.a(j, m);
            if family.eps(j, m) < m as u128 || e.pow(m as u32) < a * a {
                violations.push(SpikeViolation::EpsTooSmall { j, m });
            }
        }
    }
    for (s0, &k) in family.spikes.iter().enumerate() {
        let s = s0 + 1;
        let q = spike_designee(s, family.n);
        let rhs = spike_growth_rhs(&family.a, q, k);
        let lhs = family.a(q, k).clone();
        if lhs <= rhs {
            violations.push(SpikeViolation::SpikeBound { s, k, q, lhs, rhs });
        }
    }
    SpikeCheck {
        pass: violations.is_empty(),
        violations,
    }
}

impl Serialize for SequenceFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("SequenceFamily", 5)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("M_max", &self.m_max)?;
        st.serialize_field("spikes", &self.spikes)?;
        let a: Vec<Vec<String>> = self
            .a
            .iter()
            .map(|row| row.iter().map(|x| x.to_string()).collect())
            .collect();
        st.serialize_field("a", &a)?;
        st.serialize_field("eps", &self.eps)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for SequenceFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            #[serde(rename = "M_max")]
            m_max: usize,
            spikes: Vec<usize>,
            a: Vec<Vec<String>>,
            eps: Vec<Vec<u128>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut a = Vec::with_capacity(raw.a.len());
        for row in raw.a {
            let mut out = Vec::with_capacity(row.len());
            for s in row {
                let x: BigInt = s
                    .parse()
                    .map_err(|_| serde::de::Error::custom(format!("malformed integer `{s}`")))?;
                out.push(x);
            }
            a.push(out);
        }
        SequenceFamily::from_raw_parts(raw.n, raw.m_max, raw.spikes, a, raw.eps)
            .map_err(serde::de::Error::custom)
    }
}

/// A coefficient family assembled with the smooth ingredients into a model
/// surface: per-coordinate potentials `f_j = Σ_m (u_{j,m} + v_{j,m})` with
///   u = cutoff(eps²|z|²) · Re(a z^m),
///   v = c · (m a / eps^m) · profile(log|z|² + 2 log eps).
#[derive(Debug, Clone)]
pub struct SurfaceModel {
    family: SequenceFamily,
    chi: CutoffSpec,
    profile: ConvexProfileSpec,
    constant: SubharmonicityConstant,
}

impl SurfaceModel {
    pub fn new(family: SequenceFamily) -> Self {
        let chi = CutoffSpec::new();
        let profile = ConvexProfileSpec::new();
        let constant = compute_constant(&chi, &profile);
        SurfaceModel {
            family,
            chi,
            profile,
            constant,
        }
    }

    /// Same assembly with a caller-chosen balancing constant; exists so the
    /// failure mode of an undersized constant can be demonstrated.
    pub fn with_constant(family: SequenceFamily, constant: SubharmonicityConstant) -> Self {
        let chi = CutoffSpec::new();
        let profile = ConvexProfileSpec::new();
        SurfaceModel {
            family,
            chi,
            profile,
            constant,
        }
    }

    pub fn family(&self) -> &SequenceFamily {
        &self.family
    }

    pub fn constant(&self) -> &SubharmonicityConstant {
        &self.constant
    }

    /// `Re(a^j_m z^m)` in polar form, with a log-space fallback when the
    /// magnitude product over- or underflows intermediate `f64`s.
    fn re_a_zm(&self, j: usize, m: usize, r: f64, theta: f64) -> f64 {
        let direct = self.family.a_f64(j, m) * r.powi(m as i32);
        let mag = if direct.is_finite() {
            direct
        } else {
            (self.family.ln_a(j, m) + m as f64 * r.ln()).exp()
        };
        mag * (m as f64 * theta).cos()
    }

    /// `c · m · a^j_m / eps(j,m)^m`, the scale of the `m`-th bump term.
    fn v_coefficient(&self, j: usize, m: usize) -> f64 {
        let direct = self.family.a_f64(j, m) / self.family.eps_f64(j, m).powi(m as i32);
        let ratio = if direct.is_finite() {
            direct
        } else {
            (self.family.ln_a(j, m) - m as f64 * self.family.ln_eps(j, m)).exp()
        };
        self.constant.c * m as f64 * ratio
    }

    /// Oscillating term `u_{j,m}(z) = cutoff(eps²|z|²) · Re(a z^m)`.
    pub fn eval_u(&self, j: usize, m: usize, z: Complex64) -> f64 {
        let eps = self.family.eps_f64(j, m);
        let chi = self.chi.eval(eps * eps * z.norm_sqr(), 0);
        if chi == 0.0 || z.norm_sqr() == 0.0 {
            return 0.0;
        }
        chi * self.re_a_zm(j, m, z.norm(), z.arg())
    }

    /// Bump term `v_{j,m}(z) = c·(m a/eps^m) · profile(log|z|² + 2 log eps)`.
    pub fn eval_v(&self, j: usize, m: usize, z: Complex64) -> f64 {
        let rsq = z.norm_sqr();
        if rsq == 0.0 {
            return 0.0;
        }
        let arg = rsq.ln() + 2.0 * self.family.ln_eps(j, m);
        let lam = self.profile.eval(arg, 0);
        if lam == 0.0 {
            return 0.0;
        }
        self.v_coefficient(j, m) * lam
    }

    /// Coordinate potential truncated at `m_upper`.
    pub fn eval_f_trunc(&self, j: usize, z: Complex64, m_upper: usize) -> f64 {
        assert!((1..=self.family.m_max).contains(&m_upper));
        (1..=m_upper)
            .map(|m| self.eval_u(j, m, z) + self.eval_v(j, m, z))
            .sum()
    }

    /// Laplacian of one term, `Δ(u_{j,m} + v_{j,m})`, via the closed forms
    ///   Δu = 4[eps²(m+1)·cutoff′ + eps⁴|z|²·cutoff″]·Re(a z^m),
    ///   Δv = 4·c·(m a/eps^m)·profile″(log|z|² + 2 log eps)/|z|².
    pub fn laplacian_term(&self, j: usize, m: usize, z: Complex64) -> Result<f64, ConstructError> {
        let rsq = z.norm_sqr();
        if rsq == 0.0 {
            return Err(ConstructError::OriginSingularity);
        }
        let eps = self.family.eps_f64(j, m);
        let eps2 = eps * eps;
        let t = eps2 * rsq;
        let chi1 = self.chi.eval(t, 1);
        let chi2 = self.chi.eval(t, 2);
        let u_part = if chi1 == 0.0 && chi2 == 0.0 {
            0.0
        } else {
            let re = self.re_a_zm(j, m, rsq.sqrt(), z.arg());
            (eps2 * (m as f64 + 1.0) * chi1 + eps2 * eps2 * rsq * chi2) * re
        };
        let arg = rsq.ln() + 2.0 * self.family.ln_eps(j, m);
        let lam2 = self.profile.eval(arg, 2);
        let v_part = if lam2 == 0.0 {
            0.0
        } else {
            self.v_coefficient(j, m) * lam2 / rsq
        };
        Ok(4.0 * (u_part + v_part))
    }

    /// `Δ f_j` truncated at `m_upper`.
    pub fn laplacian_f_trunc(
        &self,
        j: usize,
        z: Complex64,
        m_upper: usize,
    ) -> Result<f64, ConstructError> {
        assert!((1..=self.family.m_max).contains(&m_upper));
        let mut acc = 0.0;
        for m in 1..=m_upper {
            acc += self.laplacian_term(j, m, z)?;
        }
        Ok(acc)
    }
}

/// Where a batch of subharmonicity samples was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleRegion {
    /// The support annulus `0.5/eps ≤ |z| ≤ 1/eps` of one term.
    Annulus { m: usize },
    /// Log-uniform radii spanning every annulus of the coordinate, with the
    /// full truncated Laplacian evaluated.
    Global,
}

/// Worst sample of one region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionReport {
    pub j: usize,
    pub region: SampleRegion,
    pub samples: usize,
    /// Most negative Laplacian value seen (signed).
    pub min_laplacian: f64,
    /// Most negative Laplacian relative to the region's natural scale.
    pub min_relative: f64,
    /// The scale: `4·m·a·eps²/eps^m` for an annulus, the max over `m` for
    /// the global region.
    pub scale: f64,
    /// Polar coordinates of the worst sample.
    pub argmin: (f64, f64),
}

/// Sampled verdict on `Δf ≥ 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubharmonicReport {
    pub tol: f64,
    pub entries: Vec<RegionReport>,
    pub pass: bool,
}

const GLOBAL_SAMPLES: usize = 1000;
const GLOBAL_SEED: u64 = 0xC1AB_0001;

/// Samples every term's support annulus (deterministic log-polar grid) and a
/// global log-uniform cloud per coordinate, and checks the Laplacian stays
/// above `−tol` relative to each region's natural scale.
pub fn check_subharmonic(
    model: &SurfaceModel,
    m_upper: usize,
    samples_per_annulus: usize,
    tol: f64,
) -> SubharmonicReport {
    check_subharmonic_impl(model, m_upper, samples_per_annulus, tol, true)
}

/// Sequential twin of [`check_subharmonic`]; same output, single-threaded.
pub fn check_subharmonic_seq(
    model: &SurfaceModel,
    m_upper: usize,
    samples_per_annulus: usize,
    tol: f64,
) -> SubharmonicReport {
    check_subharmonic_impl(model, m_upper, samples_per_annulus, tol, false)
}

fn term_scale(family: &SequenceFamily, j: usize, m: usize) -> f64 {
    let ln_scale = (4.0 * m as f64).ln() + family.ln_a(j, m) + 2.0 * family.ln_eps(j, m)
        - m as f64 * family.ln_eps(j, m);
    let scale = ln_scale.exp();
    if scale > 0.0 && scale.is_finite() {
        scale
    } else {
        f64::MIN_POSITIVE
    }
}

fn check_subharmonic_impl(
    model: &SurfaceModel,
    m_upper: usize,
    samples_per_annulus: usize,
    tol: f64,
    parallel: bool,
) -> SubharmonicReport {
    assert!((1..=model.family.m_max()).contains(&m_upper));
    assert!(samples_per_annulus >= 4);
    let mut regions = Vec::new();
    for j in 1..=model.family.n() {
        for m in 1..=m_upper {
            regions.push((j, SampleRegion::Annulus { m }));
        }
        regions.push((j, SampleRegion::Global));
    }
    let entries = exec::map_collect(regions, parallel, |(j, region)| {
        sample_region(model, j, region, m_upper, samples_per_annulus)
    });
    let pass = entries.iter().all(|e| e.min_relative >= -tol);
    SubharmonicReport { tol, entries, pass }
}

fn sample_region(
    model: &SurfaceModel,
    j: usize,
    region: SampleRegion,
    m_upper: usize,
    samples_per_annulus: usize,
) -> RegionReport {
    let family = model.family();
    let mut min_lap = f64::INFINITY;
    let mut min_rel = f64::INFINITY;
    let mut argmin = (0.0, 0.0);
    let mut record = |lap: f64, scale: f64, r: f64, theta: f64| {
        let rel = lap / scale;
        min_lap = min_lap.min(lap);
        if rel < min_rel {
            min_rel = rel;
            argmin = (r, theta);
        }
    };
    let (samples, scale) = match region {
        SampleRegion::Annulus { m } => {
            let eps = family.eps_f64(j, m);
            let r_in = 0.5 / eps;
            let scale = term_scale(family, j, m);
            let n_r = ((samples_per_annulus as f64).sqrt().round() as usize).max(3);
            let n_t = samples_per_annulus.div_ceil(n_r);
            for ir in 0..n_r {
                let frac = (ir as f64 + 0.5) / n_r as f64;
                let r = r_in * 2f64.powf(frac);
                for it in 0..n_t {
                    let theta =
                        2.0 * std::f64::consts::PI * (it as f64 + 0.31) / n_t as f64;
                    let z = Complex64::from_polar(r, theta);
                    let lap = model
                        .laplacian_term(j, m, z)
                        .expect("annulus radii are positive");
                    record(lap, scale, r, theta);
                }
            }
            (n_r * n_t, scale)
        }
        SampleRegion::Global => {
            let mut rng = ChaCha8Rng::seed_from_u64(GLOBAL_SEED ^ j as u64);
            let ln_lo = (0.25 / family.eps_f64(j, m_upper)).ln();
            let ln_hi = (2.0 / family.eps_f64(j, 1)).ln();
            let scale = (1..=m_upper)
                .map(|m| term_scale(family, j, m))
                .fold(f64::MIN_POSITIVE, f64::max);
            for _ in 0..GLOBAL_SAMPLES {
                let r = rng.random_range(ln_lo..ln_hi).exp();
                let theta = rng.random_range(0.0..2.0 * std::f64::consts::PI);
                let z = Complex64::from_polar(r, theta);
                let lap = model
                    .laplacian_f_trunc(j, z, m_upper)
                    .expect("global radii are positive");
                record(lap, scale, r, theta);
            }
            (GLOBAL_SAMPLES, scale)
        }
    };
    RegionReport {
        j,
        region,
        samples,
        min_laplacian: min_lap,
        min_relative: min_rel,
        scale,
        argmin,
    }
}

/// `Dd` image of a big integer: leading f64 plus the rounding remainder.
fn dd_from_bigint(x: &BigInt) -> Dd {
    let hi = x.to_f64().unwrap_or(f64::INFINITY);
    if !hi.is_finite() {
        return Dd { hi, lo: 0.0 };
    }
    let back = BigInt::from_f64(hi).expect("finite by construction");
    let lo = (x - back).to_f64().unwrap_or(0.0);
    Dd { hi, lo }
}

/// Recovers the degree-`m` Taylor coefficient of coordinate `j`'s analytic
/// part from circle averages:
///   (2 / r^m) · mean over equispaced nodes of `f_j(r e^{iθ}) · cos(mθ)`.
///
/// The radius must lie strictly inside the identity region of every retained
/// term (`r < 1/(e·eps(j, m_upper))`), where the potential equals
/// `Σ a_l Re(z^l)` exactly. Node values and the average are accumulated in
/// double-double precision: the target coefficient sits ~`r^m` below the
/// sample magnitude, far under plain f64 quadrature noise for interesting
/// radii.
pub fn taylor_extract(
    model: &SurfaceModel,
    j: usize,
    m_upper: usize,
    m: usize,
    r: f64,
    nodes: usize,
) -> Result<f64, ConstructError> {
    let family = model.family();
    assert!((1..=family.n()).contains(&j));
    assert!((1..=family.m_max()).contains(&m_upper));
    assert!(m >= 1);
    let max_r = family.identity_radius(j, m_upper);
    if !(r > 0.0 && r < max_r) {
        return Err(ConstructError::RadiusTooLarge { r, max_r });
    }
    let min_nodes = (2 * (m_upper + m)).max(8);
    if !nodes.is_power_of_two() || nodes < min_nodes {
        return Err(ConstructError::InvalidNodes {
            nodes,
            min: min_nodes,
        });
    }
    let table = cos_table(nodes);
    let r_dd = Dd::from_f64(r);
    // Per-term radial factors; the cutoff is exactly 1 and the bump exactly 0
    // in the identity region, but both are evaluated honestly.
    let mut f: Vec<Dd> = vec![Dd::ZERO; nodes];
    let mut r_pow = Dd::ONE;
    for l in 1..=m_upper {
        r_pow = r_pow.mul(r_dd);
        let eps = family.eps_f64(j, l);
        let chi = model.chi.eval(eps * eps * r * r, 0);
        let radial = dd_from_bigint(family.a(j, l)).mul(r_pow).mul_f64(chi);
        let arg = 2.0 * (r.ln() + family.ln_eps(j, l));
        let lam = model.profile.eval(arg, 0);
        let bump = if lam == 0.0 {
            Dd::ZERO
        } else {
            Dd::from_f64(model.v_coefficient(j, l) * lam)
        };
        for (k, slot) in f.iter_mut().enumerate() {
            *slot = slot.add(radial.mul(table[(l * k) % nodes])).add(bump);
        }
    }
    let mut acc = Dd::ZERO;
    for (k, value) in f.iter().enumerate() {
        acc = acc.add(value.mul(table[(m * k) % nodes]));
    }
    let mut r_m = Dd::ONE;
    for _ in 0..m {
        r_m = r_m.mul(r_dd);
    }
    Ok(acc.div_u64(nodes as u64).mul_f64(2.0).div(r_m).to_f64())
}
