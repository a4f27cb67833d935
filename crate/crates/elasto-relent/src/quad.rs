//! Gauss-Legendre quadrature with panel-doubling refinement.
//!
//! Used for kernel moments and Fourier symbols of the mollifier. The
//! integrands are smooth with compact support, so doubling the panel count
//! until two successive levels agree gives certified values quickly.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes per panel; the composite rule starts from two panels per interval.
pub(crate) const GL_NODES: usize = 64;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// The 64-point rule on [-1, 1], shared by the composite integrator and the
/// kernel node tables.
pub(crate) fn base_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_NODES))
}

/// Composite Gauss-Legendre value of `f` over `[a, b]` with `panels` panels.
pub(crate) fn composite(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = base_rule();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + half * x);
        }
        total += half * acc;
    }
    total
}

/// Integrates `f` over `[a, b]`, doubling the panel count (starting from two)
/// until successive values differ by less than `tol`.
pub(crate) fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_REFINEMENTS: usize = 12;
    let mut panels = 2;
    let mut prev = composite(f, a, b, panels);
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_REFINEMENTS {
        panels *= 2;
        let next = composite(f, a, b, panels);
        last_change = (next - prev).abs();
        if last_change < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureDiverged {
        tolerance: tol,
        refinements: MAX_REFINEMENTS,
        last_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_integrated_exactly() {
        let v = composite(&|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 2);
        // antiderivative x^4/4 - x^2 + x evaluated on [-1, 3]
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_integration_converges_on_oscillatory_integrand() {
        let v = integrate(&|x: f64| (40.0 * x).cos(), 0.0, 1.0, 1e-13).unwrap();
        let exact = (40.0f64).sin() / 40.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn hopeless_tolerance_reports_divergence() {
        // a kink keeps panel doubling from ever hitting 1e-30
        let res = integrate(&|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-30);
        assert!(matches!(res, Err(Error::QuadratureDiverged { .. })));
    }
}
