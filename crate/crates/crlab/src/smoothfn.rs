//! Smooth scalar ingredients for the hypersurface models: a C-infinity cutoff
//! with pinned transition window, a convex C-infinity profile with prescribed
//! curvature window, and the curvature-ratio constant that makes the bump
//! terms dominate the oscillating terms.
//!
//! Everything here is plain `f64`; each function is exactly `0.0` or exactly
//! `1.0` outside its active window so that downstream support-separation
//! arguments hold in floating point, not merely in the ideal reals.

use serde::{Deserialize, Serialize};

use crate::quad;

/// exp(−1/x) for x > 0, extended by 0: the basic flat-at-zero ingredient.
/// Returns the value together with first and second derivatives.
///
/// For x ≤ 0 (and for 1/x large enough that exp underflows) everything is
/// exactly zero, which keeps quotients downstream free of 0/0.
fn flat_exp(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let w = 1.0 / x;
    if w > 700.0 {
        // e^{-700} ≈ 1e-304; even multiplied by w⁴ ≈ 2.4e11 the result is
        // below any tolerance used here, and clamping avoids 0 * inf.
        return (0.0, 0.0, 0.0);
    }
    let e = (-w).exp();
    (e, e * w * w, e * (w * w * w * w - 2.0 * w * w * w))
}

/// Smooth cutoff: identically 1 on (−∞, 1/4], identically 0 on [1, ∞),
/// strictly decreasing in between.
///
/// Construction: with φ(x) = exp(−1/x)·[x > 0] and the affine window maps
/// u = (1−t)/(3/4), v = (t−1/4)/(3/4) (so u + v = 1 on the transition),
///   χ(t) = φ(u) / (φ(u) + φ(v)).
/// The denominator is bounded below by φ(1/2) = e⁻² on the transition, so the
/// quotient-rule derivatives are numerically tame everywhere.
#[derive(Debug, Clone, Default)]
pub struct CutoffSpec {
    _private: (),
}

impl CutoffSpec {
    pub fn new() -> Self {
        CutoffSpec { _private: () }
    }

    /// χ and derivatives; `order` ∈ {0, 1, 2}.
    pub fn eval(&self, t: f64, order: u8) -> f64 {
        assert!(order <= 2, "cutoff derivatives available up to order 2");
        // Outside the transition all derivatives vanish identically. The
        // formula below reproduces the exact 0.0/1.0 values on its own, but
        // short-circuiting skips pointless exp() calls.
        if t <= 0.25 {
            return if order == 0 { 1.0 } else { 0.0 };
        }
        if t >= 1.0 {
            return 0.0;
        }
        const SLOPE: f64 = 4.0 / 3.0; // |d/dt| of both window maps
        let u = (1.0 - t) * SLOPE;
        let v = (t - 0.25) * SLOPE;
        let (fu, fu1, fu2) = flat_exp(u);
        let (fv, fv1, fv2) = flat_exp(v);
        // u' = −SLOPE, v' = +SLOPE; chain rule through the affine maps.
        let n0 = fu;
        let n1 = -SLOPE * fu1;
        let n2 = SLOPE * SLOPE * fu2;
        let d0 = fu + fv;
        let d1 = -SLOPE * fu1 + SLOPE * fv1;
        let d2 = SLOPE * SLOPE * (fu2 + fv2);
        match order {
            0 => n0 / d0,
            1 => (n1 * d0 - n0 * d1) / (d0 * d0),
            _ => {
                let first = (n2 * d0 - n0 * d2) / (d0 * d0);
                let second = 2.0 * d1 * (n1 * d0 - n0 * d1) / (d0 * d0 * d0);
                first - second
            }
        }
    }
}

/// Convex C-infinity profile Λ: identically 0 on (−∞, −2], strictly convex on
/// (−2, 2) with Λ″(x) = exp(−1/(4−x²)), and exactly affine on [2, ∞).
///
/// Λ′ and Λ are tabulated once on a 10⁴-point grid over [−2, 2] by adaptive
/// quadrature and evaluated by cubic Hermite interpolation, using the closed
/// forms of Λ″ (resp. Λ′) as the exact slope data; beyond the grid the affine
/// continuation Λ(2) + (x−2)·Λ′(2) is used verbatim.
#[derive(Debug, Clone)]
pub struct ConvexProfileSpec {
    grid_lo: f64,
    step: f64,
    /// Λ at the grid nodes.
    values: Vec<f64>,
    /// Λ′ at the grid nodes.
    slopes: Vec<f64>,
    /// Λ′(2) = ∫ Λ″ over the support: slope of the affine continuation.
    total_curvature: f64,
    /// Λ(2): offset of the affine continuation.
    value_at_two: f64,
}

/// Curvature Λ″: the symmetric bump exp(−1/(4−x²)) on (−2, 2), else 0.
fn curvature_bump(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        return 0.0;
    }
    let s = 4.0 - x * x;
    let w = 1.0 / s;
    if w > 700.0 {
        return 0.0;
    }
    (-w).exp()
}

const GRID_POINTS: usize = 10_000;
const CELL_TOL: f64 = 1e-15;

impl ConvexProfileSpec {
    /// Builds the table. Cost: ~10⁴ adaptive panels over an analytic bump;
    /// tens of milliseconds.
    pub fn new() -> Self {
        let (gl_nodes, gl_weights) = quad::gauss_legendre(20);
        let grid_lo = -2.0;
        let grid_hi = 2.0;
        let step = (grid_hi - grid_lo) / (GRID_POINTS - 1) as f64;
        let mut slopes = Vec::with_capacity(GRID_POINTS);
        let mut values = Vec::with_capacity(GRID_POINTS);
        slopes.push(0.0);
        values.push(0.0);
        for i in 1..GRID_POINTS {
            let x0 = grid_lo + (i - 1) as f64 * step;
            let x1 = grid_lo + i as f64 * step;
            let d_slope = quad::integrate(&curvature_bump, x0, x1, CELL_TOL, &gl_nodes, &gl_weights);
            // Fubini: ∫∫ collapses the double integral for Λ to a single one,
            //   Λ(x₁) = Λ(x₀) + Λ′(x₀)(x₁−x₀) + ∫ (x₁−r)·Λ″(r) dr over [x₀, x₁].
            let d_value = quad::integrate(
                &|r| (x1 - r) * curvature_bump(r),
                x0,
                x1,
                CELL_TOL,
                &gl_nodes,
                &gl_weights,
            );
            let prev_slope = slopes[i - 1];
            let prev_value = values[i - 1];
            slopes.push(prev_slope + d_slope);
            values.push(prev_value + prev_slope * step + d_value);
        }
        let total_curvature = slopes[GRID_POINTS - 1];
        let value_at_two = values[GRID_POINTS - 1];
        ConvexProfileSpec {
            grid_lo,
            step,
            values,
            slopes,
            total_curvature,
            value_at_two,
        }
    }

    /// Λ and derivatives; `order` ∈ {0, 1, 2}.
    pub fn eval(&self, x: f64, order: u8) -> f64 {
        assert!(order <= 2, "profile derivatives available up to order 2");
        if order == 2 {
            return curvature_bump(x);
        }
        if x <= -2.0 {
            return 0.0;
        }
        if x >= 2.0 {
            return match order {
                0 => self.value_at_two + (x - 2.0) * self.total_curvature,
                _ => self.total_curvature,
            };
        }
        let pos = (x - self.grid_lo) / self.step;
        let cell = (pos.floor() as usize).min(GRID_POINTS - 2);
        let x0 = self.grid_lo + cell as f64 * self.step;
        match order {
            0 => hermite(
                x - x0,
                self.step,
                self.values[cell],
                self.values[cell + 1],
                self.slopes[cell],
                self.slopes[cell + 1],
            ),
            _ => hermite(
                x - x0,
                self.step,
                self.slopes[cell],
                self.slopes[cell + 1],
                curvature_bump(x0),
                curvature_bump(x0 + self.step),
            ),
        }
    }

    /// Slope of the affine continuation, Λ′(2) = ∫ Λ″.
    pub fn total_curvature(&self) -> f64 {
        self.total_curvature
    }

    /// Λ(2), where the affine continuation starts.
    pub fn value_at_two(&self) -> f64 {
        self.value_at_two
    }
}

impl Default for ConvexProfileSpec {
    fn default() -> Self {
        Self::new()
    }
}

/// Cubic Hermite interpolant on a cell of width `h`, local coordinate `dx`.
fn hermite(dx: f64, h: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> f64 {
    let s = dx / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * f0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * f1
        + (s3 - s2) * h * d1
}

/// The constant balancing bump curvature against cutoff oscillation, with the
/// extrema it was computed from.
///
/// `c = 2 · (2·sup|χ′| + sup|χ″|) / min Λ″`, the minimum taken over the
/// window [−2 ln 2, 0] that the radial change of variables maps the cutoff
/// transition into. The leading factor 2 absorbs the density of the extremum
/// sampling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubharmonicityConstant {
    pub c: f64,
    pub chi_d1_sup: f64,
    pub chi_d2_sup: f64,
    pub lambda_dd_min: f64,
}

const EXTREMUM_SAMPLES: usize = 100_000;

/// Computes the balancing constant by dense sampling of the three extrema.
pub fn compute_constant(chi: &CutoffSpec, profile: &ConvexProfileSpec) -> SubharmonicityConstant {
    let mut chi_d1_sup: f64 = 0.0;
    let mut chi_d2_sup: f64 = 0.0;
    for i in 0..=EXTREMUM_SAMPLES {
        let t = 0.25 + 0.75 * i as f64 / EXTREMUM_SAMPLES as f64;
        chi_d1_sup = chi_d1_sup.max(chi.eval(t, 1).abs());
        chi_d2_sup = chi_d2_sup.max(chi.eval(t, 2).abs());
    }
    let window_lo = -2.0 * std::f64::consts::LN_2;
    let mut lambda_dd_min = f64::INFINITY;
    for i in 0..=EXTREMUM_SAMPLES {
        let x = window_lo + (0.0 - window_lo) * i as f64 / EXTREMUM_SAMPLES as f64;
        lambda_dd_min = lambda_dd_min.min(profile.eval(x, 2));
    }
    let c = 2.0 * (2.0 * chi_d1_sup + chi_d2_sup) / lambda_dd_min;
    SubharmonicityConstant {
        c,
        chi_d1_sup,
        chi_d2_sup,
        lambda_dd_min,
    }
}
