//! Shared helpers for the integration tests.
#![allow(dead_code)] // each test binary uses a different subset

use elasto_relent::TorusField;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random real field with modes `1..=k_max`, amplitudes O(1/k).
pub fn band_limited(rng: &mut StdRng, n: usize, k_max: u32) -> TorusField {
    let modes: Vec<(f64, f64, f64)> = (1..=k_max)
        .map(|k| {
            (
                k as f64,
                rng.random_range(-1.0..1.0) / k as f64,
                rng.random_range(-1.0..1.0) / k as f64,
            )
        })
        .collect();
    TorusField::from_fn(n, |x| {
        modes
            .iter()
            .map(|&(k, a, b)| {
                let arg = 2.0 * std::f64::consts::PI * k * x;
                a * arg.sin() + b * arg.cos()
            })
            .sum()
    })
    .unwrap()
    .project_mean_zero()
}

/// Adaptive Simpson quadrature, independent of the crate's Gauss-Legendre
/// machinery; used as the oracle for kernel moments and Fourier symbols.
pub fn simpson_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 40)
}

/// The unnormalized smooth bump, restated independently for oracle use.
pub fn bump_raw(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
