//! Adaptive Gauss–Legendre quadrature for the smooth-ingredient integrals.
//!
//! A fixed 20-point rule is refined by interval bisection until two levels
//! agree within the requested absolute tolerance. The integrands here are
//! compactly supported bump-type functions: analytic in the interior and flat
//! to all orders at the support edges, so convergence is immediate on any
//! panel and the adaptive layer exists for safety rather than need.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi's initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term
/// recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// One panel of the rule over `[a, b]`.
fn panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub(crate) fn integrate(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    nodes: &[f64],
    weights: &[f64],
) -> f64 {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        whole: f64,
        depth: u32,
        nodes: &[f64],
        weights: &[f64],
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = panel(f, a, mid, nodes, weights);
        let right = panel(f, mid, b, nodes, weights);
        let split = left + right;
        if (split - whole).abs() <= tol || depth >= 30 {
            return split;
        }
        recurse(f, a, mid, 0.5 * tol, left, depth + 1, nodes, weights)
            + recurse(f, mid, b, 0.5 * tol, right, depth + 1, nodes, weights)
    }
    let whole = panel(f, a, b, nodes, weights);
    recurse(f, a, b, tol, whole, 0, nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_over_half_period() {
        let (n, w) = gauss_legendre(20);
        let got = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13, &n, &w);
        assert!((got - 2.0).abs() < 1e-12);
    }

    #[test]
    fn polynomial_is_exact() {
        let (n, w) = gauss_legendre(20);
        let got = integrate(&|x: f64| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-13, &n, &w);
        // ∫ (x³ − 2x + 1) over [−1, 3] = [x⁴/4 − x² + x] = (81/4 − 9 + 3) − (1/4 − 1 − 1) = 16.
        assert!((got - 16.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_spike_needs_subdivision() {
        let (n, w) = gauss_legendre(20);
        let f = |x: f64| (-(x * x) / 2e-4).exp();
        let got = integrate(&f, -1.0, 1.0, 1e-13, &n, &w);
        let expect = (2e-4 * std::f64::consts::PI).sqrt(); // full Gaussian mass
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }
}
