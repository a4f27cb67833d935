//! Independent oracles for the kernel and the non-local operator: adaptive
//! Simpson quadrature (no shared code with the crate's Gauss-Legendre
//! machinery) for moments and Fourier symbols, plus the structural operator
//! identities used throughout the stability arguments.

mod common;

use std::f64::consts::PI;

use elasto_relent::dynamics::{surface_energy, surface_energy_direct};
use elasto_relent::experiments::fit_order;
use elasto_relent::mollifier::{apply_nonlocal_direct, bump_second_moment, Mollifier};
use elasto_relent::TorusField;

use common::{band_limited, bump_raw, rel_err, rng, simpson_adaptive};

const GAMMA: f64 = 0.005;

#[test]
fn bump_constant_matches_simpson_oracle() {
    let norm = simpson_adaptive(&bump_raw, -1.0, 1.0, 1e-13);
    let m2 = simpson_adaptive(&|s| s * s * bump_raw(s), -1.0, 1.0, 1e-13) / norm;
    assert!(
        (bump_second_moment() - m2).abs() < 1e-12,
        "crate {} oracle {}",
        bump_second_moment(),
        m2
    );
}

#[test]
fn kernel_moments_match_simpson_oracle() {
    let phi = Mollifier::new(GAMMA).unwrap();
    let b = phi.scale_b();
    let eval = |s: f64| phi.eval(s);
    let mass = simpson_adaptive(&eval, -b, b, 1e-13);
    let m2 = simpson_adaptive(&|s| s * s * eval(s), -b, b, 1e-13);
    assert!((phi.mass() - mass).abs() < 1e-12);
    assert!((phi.second_moment() - m2).abs() < 1e-12);
    assert!((m2 - 2.0 * GAMMA).abs() < 1e-12);
}

#[test]
fn single_mode_operator_matches_scalar_symbol_oracle() {
    // L_eps applied to sin(2 pi x) scales it by (Phi(eps) - 1)/eps^2, with
    // Phi evaluated by an independent 1d quadrature
    let n = 128;
    let eps = 0.1;
    let phi = Mollifier::new(GAMMA).unwrap();
    let b = phi.scale_b();
    let phi_hat =
        simpson_adaptive(&|s| phi.eval(s) * (2.0 * PI * eps * s).cos(), -b, b, 1e-13);
    let symbol = (phi_hat - 1.0) / (eps * eps);

    let w = TorusField::from_fn(n, |x| (2.0 * PI * x).sin()).unwrap();
    let direct = apply_nonlocal_direct(&w, &phi, eps).unwrap();
    let expected = w.scale(symbol);
    let rel = (&direct - &expected).l2_norm() / expected.l2_norm();
    assert!(rel < 1e-8, "relative error {rel:.3e}");

    // and the surface energy of the same mode is (1 - Phi(eps))/(4 eps^2)
    let mult = phi.multiplier_table(eps, n).unwrap();
    let f = surface_energy(&w, &mult).unwrap();
    let expected_f = (1.0 - phi_hat) / (4.0 * eps * eps);
    assert!(rel_err(f, expected_f) < 1e-8);
    let f_direct = surface_energy_direct(&w, &phi, eps).unwrap();
    assert!(rel_err(f_direct, expected_f) < 1e-8);
}

#[test]
fn multiplier_taylor_error_is_fourth_order_in_mode_and_quadratic_in_eps() {
    // |m_k + gamma (2 pi k)^2| <= C eps^2 k^4 with C from the fourth moment
    let phi = Mollifier::new(GAMMA).unwrap();
    let m4 = phi.moment(4).unwrap();
    let c = (2.0 * PI).powi(4) * m4 / 24.0 * 1.1; // 10% headroom for the next term
    let eps_list = [0.1, 0.05, 0.025];
    let n = 64;
    for k in [1i64, 2, 4] {
        let mut pairs = Vec::new();
        for &eps in &eps_list {
            let mult = phi.multiplier_table(eps, n).unwrap();
            let gap = (mult.value(k) + GAMMA * (2.0 * PI * k as f64).powi(2)).abs();
            assert!(
                gap <= c * eps * eps * (k as f64).powi(4),
                "k {k} eps {eps}: gap {gap:.3e} bound {:.3e}",
                c * eps * eps * (k as f64).powi(4)
            );
            pairs.push((eps, gap));
        }
        let (order, _) = fit_order(&pairs).unwrap();
        assert!(order >= 1.9, "k {k}: fitted order {order}");
    }
}

#[test]
fn operator_is_self_adjoint_and_negative() {
    let n = 128;
    let phi = Mollifier::new(GAMMA).unwrap();
    let mult = phi.multiplier_table(0.1, n).unwrap();
    let mut generator = rng(0x0ada_2024);
    for _ in 0..20 {
        let w1 = band_limited(&mut generator, n, 40);
        let w2 = band_limited(&mut generator, n, 40);
        let a = mult.apply(&w1).unwrap().inner(&w2).unwrap();
        let b = w1.inner(&mult.apply(&w2).unwrap()).unwrap();
        assert!(
            (a - b).abs() <= 1e-10 * a.abs().max(1.0),
            "asymmetry {a} vs {b}"
        );
        let quad = mult.apply(&w1).unwrap().inner(&w1).unwrap();
        assert!(quad <= 1e-12, "quadratic form positive: {quad}");
    }
}

#[test]
fn operator_commutes_with_derivative() {
    let n = 128;
    let phi = Mollifier::new(GAMMA).unwrap();
    let mult = phi.multiplier_table(0.05, n).unwrap();
    let mut generator = rng(0xc0_fe);
    for _ in 0..10 {
        let w = band_limited(&mut generator, n, 40);
        let a = mult.apply(&w.derivative(1).unwrap()).unwrap();
        let b = mult.apply(&w).unwrap().derivative(1).unwrap();
        let scale = a.l2_norm().max(1e-12);
        assert!((&a - &b).l2_norm() <= 1e-10 * scale);
    }
}

#[test]
fn smooth_field_consistency_has_taylor_order() {
    // || L_eps w - gamma w_xx || decays quadratically for smooth w (the
    // proven floor is order 1/2; the smooth rate is what shows up)
    let n = 256;
    let phi = Mollifier::new(GAMMA).unwrap();
    let w = TorusField::from_fn(n, |x| {
        0.3 * (2.0 * PI * x).sin() + 0.05 * (8.0 * PI * x).sin()
    })
    .unwrap();
    let w_xx = w.derivative(2).unwrap().scale(GAMMA);
    let mut pairs = Vec::new();
    for &eps in &[0.2, 0.1, 0.05, 0.025] {
        let mult = phi.multiplier_table(eps, n).unwrap();
        let gap = (&mult.apply(&w).unwrap() - &w_xx).l2_norm();
        pairs.push((eps, gap));
    }
    let (order, _) = fit_order(&pairs).unwrap();
    assert!(order >= 1.9, "fitted order {order}");
}

#[test]
fn nonlocal_rhs_approaches_local_rhs_on_a_fixed_state() {
    use elasto_relent::dynamics::{local_rhs, nonlocal_rhs, ModelParams, State};
    use elasto_relent::potential::Potential;

    let n = 256;
    let phi = Mollifier::new(GAMMA).unwrap();
    let pot = Potential::double_well();
    let u = TorusField::from_fn(n, |x| {
        0.2 * (2.0 * PI * x).sin() + 0.1 * (4.0 * PI * x).sin()
    })
    .unwrap();
    let v = TorusField::from_fn(n, |x| 0.1 * (2.0 * PI * x).sin()).unwrap();
    let s = State::new(u, v, 0.0).unwrap();
    let (_, vt_local) = local_rhs(&s, &ModelParams::local(0.5, GAMMA), &pot).unwrap();

    let mut pairs = Vec::new();
    for &eps in &[0.2, 0.1, 0.05, 0.025] {
        let mult = phi.multiplier_table(eps, n).unwrap();
        let params = ModelParams::nonlocal(0.5, GAMMA, eps);
        let (_, vt_nl) = nonlocal_rhs(&s, &params, &pot, &mult).unwrap();
        pairs.push((eps, (&vt_nl - &vt_local).l2_norm()));
    }
    let (order, _) = fit_order(&pairs).unwrap();
    assert!(order >= 1.9, "fitted order {order}");
}

#[test]
fn direct_and_spectral_paths_agree_on_random_fields() {
    let n = 128;
    let phi = Mollifier::new(GAMMA).unwrap();
    let eps = 0.1;
    let mult = phi.multiplier_table(eps, n).unwrap();
    let mut generator = rng(0xdead_beef);
    for _ in 0..5 {
        let w = band_limited(&mut generator, n, 40);
        let spectral = mult.apply(&w).unwrap();
        let direct = apply_nonlocal_direct(&w, &phi, eps).unwrap();
        let rel = (&spectral - &direct).l2_norm() / spectral.l2_norm();
        assert!(rel <= 1e-8, "relative gap {rel:.3e}");
    }
}

#[test]
fn surface_energy_paths_agree_on_random_fields() {
    let n = 128;
    let phi = Mollifier::new(GAMMA).unwrap();
    for &eps in &[0.2, 0.05] {
        let mult = phi.multiplier_table(eps, n).unwrap();
        let mut generator = rng(0xf00d + eps.to_bits());
        for _ in 0..10 {
            let w = band_limited(&mut generator, n, 40);
            let f_spec = surface_energy(&w, &mult).unwrap();
            let f_direct = surface_energy_direct(&w, &phi, eps).unwrap();
            assert!(rel_err(f_direct, f_spec) <= 1e-8);
        }
    }
}
