//! Minimal double-double arithmetic (~32 significant digits).
//!
//! The Fourier-style coefficient extraction on a circle of radius `r` must
//! resolve contributions of size `a_m r^m` against samples dominated by the
//! `m = 1` term — a dynamic range of `r^{m-1}`, far below one f64 ulp of the
//! sample for the radii and orders we certify. The extraction therefore runs
//! its node values and accumulation in double-double precision: each value is
//! an unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
//!
//! Only the handful of operations the extraction needs are implemented, plus
//! a cosine table at the exact node angles `2πi/n` for power-of-two `n`.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Error-free sum: `a + b = s + e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free sum assuming `|a| ≥ |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via fused multiply-add: `a·b = p + e` exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// 2π to double-double precision.
    pub const TWO_PI: Dd = Dd {
        hi: 6.283185307179586,
        lo: 2.4492935982947064e-16,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + rhs.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, rhs: Dd) -> Dd {
        self.add(rhs.neg())
    }

    #[inline]
    pub fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, rhs: f64) -> Dd {
        let (p, e) = two_prod(self.hi, rhs);
        let (hi, lo) = quick_two_sum(p, e + self.lo * rhs);
        Dd { hi, lo }
    }

    pub fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self.sub(rhs.mul_f64(q1));
        let q2 = (r.hi + r.lo) / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    pub fn div_u64(self, rhs: u64) -> Dd {
        self.div(Dd::from_f64(rhs as f64))
    }
}

/// Reciprocal factorials `1/k!` in double-double, for the sin/cos series.
fn inv_factorials(up_to: usize) -> Vec<Dd> {
    let mut fact = Dd::ONE;
    let mut out = vec![Dd::ONE];
    for k in 1..=up_to {
        fact = fact.mul_f64(k as f64);
        out.push(Dd::ONE.div(fact));
    }
    out
}

/// cos(x) for `x ∈ [0, π/4]` by its Taylor series in double-double.
fn cos_small(x: Dd, inv_fact: &[Dd]) -> Dd {
    let y = x.mul(x);
    // Σ_{j=0}^{15} (−1)^j y^j / (2j)! — the tail is below 1e-35 on [0, π/4].
    let mut acc = Dd::ZERO;
    for j in (0..=15).rev() {
        let c = inv_fact[2 * j];
        let term = if j % 2 == 0 { c } else { c.neg() };
        acc = acc.mul(y).add(term);
    }
    acc
}

/// sin(x) for `x ∈ [0, π/4]` by its Taylor series in double-double.
fn sin_small(x: Dd, inv_fact: &[Dd]) -> Dd {
    let y = x.mul(x);
    let mut acc = Dd::ZERO;
    for j in (0..=15).rev() {
        let c = inv_fact[2 * j + 1];
        let term = if j % 2 == 0 { c } else { c.neg() };
        acc = acc.mul(y).add(term);
    }
    acc.mul(x)
}

/// Table of `cos(2πi/n)` for `i = 0..n`, accurate to double-double precision.
///
/// Requires `n` to be a power of two (≥ 8): then every node fraction `i/n` is
/// an exact dyadic, index reductions by the dihedral symmetries of the circle
/// are exact integer arithmetic, and only arguments in `[0, π/4]` ever reach
/// the Taylor kernels.
pub(crate) fn cos_table(n: usize) -> Vec<Dd> {
    assert!(n >= 8 && n.is_power_of_two(), "node count must be a power of two ≥ 8");
    let inv_fact = inv_factorials(31);
    let angle = |i: usize| -> Dd {
        // 2π·(i/n); i/n is exact because n is a power of two.
        Dd::TWO_PI.mul_f64(i as f64 / n as f64)
    };
    (0..n)
        .map(|i0| {
            let mut i = i0.min(n - i0); // cos(2π(n−i)/n) = cos(2πi/n)
            let mut sign = 1.0;
            if i > n / 4 {
                i = n / 2 - i; // cos(π − x) = −cos(x)
                sign = -1.0;
            }
            let value = if i > n / 8 {
                sin_small(angle(n / 4 - i), &inv_fact) // cos(x) = sin(π/2 − x)
            } else {
                cos_small(angle(i), &inv_fact)
            };
            if sign < 0.0 {
                value.neg()
            } else {
                value
            }
        })
        .collect()
}
