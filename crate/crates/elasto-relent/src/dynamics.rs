//! Right-hand sides and energy functionals of the two models.
//!
//! Local model (viscosity mu, capillarity gamma):
//!
//! ```text
//! u_t = v_x
//! v_t = W'(u)_x + mu v_xx - gamma u_xxx
//! ```
//!
//! Non-local model: the capillarity term is replaced by `L_eps[u]_x`. Both
//! dissipate their total energy at the rate `mu ||v_x||^2`; the non-local
//! total energy carries the surface functional `F_eps` in place of the
//! gradient term `(gamma/2) ||u_x||^2`.
//!
//! The nonlinear stress `W'(u)` is evaluated pointwise on a 3/2 zero-padded
//! grid and truncated before spectral differentiation.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::TorusField;
use crate::mollifier::{Mollifier, NonlocalMultiplier};
use crate::potential::Potential;

/// Viscosity, capillarity, and (for the non-local model) the kernel width.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ModelParams {
    pub mu: f64,
    pub gamma: f64,
    /// Present for the non-local model, absent for the local one.
    pub eps: Option<f64>,
}

impl ModelParams {
    pub fn local(mu: f64, gamma: f64) -> Self {
        Self {
            mu,
            gamma,
            eps: None,
        }
    }

    pub fn nonlocal(mu: f64, gamma: f64, eps: f64) -> Self {
        Self {
            mu,
            gamma,
            eps: Some(eps),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "viscosity mu must be positive, got {}",
                self.mu
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "capillarity gamma must be positive, got {}",
                self.gamma
            )));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "eps must be positive, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

/// Mean-zero pair `(u, v)` at a fixed time.
#[derive(Debug, Clone)]
pub struct State {
    u: TorusField,
    v: TorusField,
    time: f64,
}

impl State {
    /// Builds a state, enforcing shared grids and mean-zero components.
    pub fn new(u: TorusField, v: TorusField, time: f64) -> Result<Self> {
        if u.n() != v.n() {
            return Err(Error::InvalidArgument(format!(
                "state components must share a grid, got {} and {}",
                u.n(),
                v.n()
            )));
        }
        for (name, f) in [("u", &u), ("v", &v)] {
            let mean = f.mean().abs();
            if mean > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "state component {name} must be mean-zero, |mean| = {mean:.3e}"
                )));
            }
        }
        Ok(Self { u, v, time })
    }

    pub fn u(&self) -> &TorusField {
        &self.u
    }

    pub fn v(&self) -> &TorusField {
        &self.v
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn n(&self) -> usize {
        self.u.n()
    }
}

/// Right-hand side of the local model; both components are mean-zero.
pub fn local_rhs(
    state: &State,
    params: &ModelParams,
    potential: &Potential,
) -> Result<(TorusField, TorusField)> {
    params.validate()?;
    if params.eps.is_some() {
        return Err(Error::InvalidArgument(
            "local model must not carry eps".into(),
        ));
    }
    let stress = state.u.map_dealiased(|u| potential.d1(u));
    let u_t = state.v.derivative(1)?;
    let v_t_field = &(&stress.derivative(1)? + &state.v.derivative(2)?.scale(params.mu))
        - &state.u.derivative(3)?.scale(params.gamma);
    Ok((u_t, v_t_field))
}

/// Right-hand side of the non-local model.
pub fn nonlocal_rhs(
    state: &State,
    params: &ModelParams,
    potential: &Potential,
    mult: &NonlocalMultiplier,
) -> Result<(TorusField, TorusField)> {
    params.validate()?;
    match params.eps {
        Some(eps) if eps == mult.eps() => {}
        Some(eps) => {
            return Err(Error::InvalidArgument(format!(
                "params eps {eps} does not match multiplier eps {}",
                mult.eps()
            )))
        }
        None => {
            return Err(Error::InvalidArgument(
                "non-local model requires eps in params".into(),
            ))
        }
    }
    let stress = state.u.map_dealiased(|u| potential.d1(u));
    let u_t = state.v.derivative(1)?;
    let v_t = &(&stress.derivative(1)? + &state.v.derivative(2)?.scale(params.mu))
        - &mult.apply(&state.u)?.derivative(1)?;
    Ok((u_t, v_t))
}

/// Non-local surface energy `F_eps[w] = -1/2 <w, L_eps w>`, a nonnegative
/// quadratic form replacing `(gamma/2)||w_x||^2`.
pub fn surface_energy(w: &TorusField, mult: &NonlocalMultiplier) -> Result<f64> {
    Ok(-0.5 * w.inner(&mult.apply(w)?)?)
}

/// Double-integral form of the surface energy,
/// `(1/4 eps^2) * int int phi_eps(x-y) (w(y) - w(x))^2`, evaluated by tensor
/// quadrature. Cross-check for [`surface_energy`].
pub fn surface_energy_direct(w: &TorusField, phi: &Mollifier, eps: f64) -> Result<f64> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    let eps_b = eps * phi.scale_b();
    if eps_b >= 0.5 {
        return Err(Error::SupportTooWide { eps_b });
    }
    let rel_tol = 1e-10;
    let mut segments = 256;
    let mut prev: Option<f64> = None;
    let mut last_change = f64::INFINITY;
    for _ in 0..8 {
        let current = surface_energy_trapezoid(w, phi, eps, segments);
        if let Some(p) = prev {
            last_change = (current - p).abs() / current.abs().max(1e-300);
            if last_change < rel_tol {
                return Ok(current);
            }
        }
        prev = Some(current);
        segments *= 2;
    }
    Err(Error::QuadratureDiverged {
        tolerance: rel_tol,
        refinements: 8,
        last_change,
    })
}

fn surface_energy_trapezoid(w: &TorusField, phi: &Mollifier, eps: f64, segments: usize) -> f64 {
    let b = phi.scale_b();
    let ds = 2.0 * b / segments as f64;
    let n_inv = 1.0 / w.n() as f64;
    let mut total = 0.0;
    for i in 1..segments {
        let s = -b + i as f64 * ds;
        let weight = ds * phi.eval(s);
        if weight == 0.0 {
            continue;
        }
        let shifted = w.shifted(-eps * s); // samples of w(x + eps s)
        let mean_sq: f64 = shifted
            .values()
            .iter()
            .zip(w.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            * n_inv;
        total += weight * mean_sq;
    }
    total / (4.0 * eps * eps)
}

/// Total energy of a state: `int W(u) + v^2/2` plus the gradient term
/// (local) or the surface functional (non-local).
pub fn total_energy(
    state: &State,
    params: &ModelParams,
    potential: &Potential,
    mult: Option<&NonlocalMultiplier>,
) -> Result<f64> {
    params.validate()?;
    let base = state
        .u
        .values()
        .iter()
        .zip(state.v.values())
        .map(|(&u, &v)| potential.eval(u) + 0.5 * v * v)
        .sum::<f64>()
        / state.n() as f64;
    match (params.eps, mult) {
        (None, None) => {
            let grad = state.u.h1_seminorm();
            Ok(base + 0.5 * params.gamma * grad * grad)
        }
        (Some(eps), Some(m)) if eps == m.eps() => Ok(base + surface_energy(&state.u, m)?),
        _ => Err(Error::InvalidArgument(
            "total_energy needs a multiplier exactly when params carry eps".into(),
        )),
    }
}

/// Largest H1 seminorm of `u` along a stored trajectory; the non-local runs
/// stay uniformly bounded in this quantity across the eps sweep.
pub fn max_h1_seminorm(states: &[State]) -> f64 {
    states
        .iter()
        .fold(0.0, |acc, s| acc.max(s.u().h1_seminorm()))
}

/// Per-snapshot energy bookkeeping of a run: total energy, cumulative viscous
/// dissipation, and the balance residual `E(t) + D(t) - E(0)`.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissipation_cum: Vec<f64>,
    pub residual: Vec<f64>,
}

impl EnergyLedger {
    pub(crate) fn push(&mut self, time: f64, energy: f64, dissipation_cum: f64) {
        let residual = if self.energy.is_empty() {
            0.0
        } else {
            energy + dissipation_cum - self.energy[0]
        };
        self.times.push(time);
        self.energy.push(energy);
        self.dissipation_cum.push(dissipation_cum);
        self.residual.push(residual);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |acc, r| acc.max(r.abs()))
    }

    pub fn initial_energy(&self) -> f64 {
        self.energy.first().copied().unwrap_or(0.0)
    }

    /// CSV export `t,energy,cumulative_dissipation,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,energy,cumulative_dissipation,residual\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], self.energy[i], self.dissipation_cum[i], self.residual[i]
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
