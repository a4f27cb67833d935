//! Spectral laboratory for one-dimensional viscosity-capillarity
//! elastodynamics with a non-convex stored energy, on the periodic unit
//! interval.
//!
//! Two regularizations of the same first-order system are implemented side
//! by side: the *local* model with viscosity `mu v_xx` and capillarity
//! `-gamma u_xxx`, and a *non-local* family where the capillarity is
//! replaced by `L_eps[u]_x` with `L_eps[u] = (phi_eps * u - u)/eps^2` for an
//! even, compactly supported mollifier whose second moment equals
//! `2 gamma`. As `eps -> 0` the non-local solutions converge to the local
//! one; the crate measures that convergence, audits the energy balances, and
//! tracks the relative-entropy functionals that drive the stability
//! estimates.
//!
//! ## Capabilities (one runnable example each)
//!
//! - **`convergence_in_eps`** - the headline experiment: run both models
//!   from identical smooth data, sweep `eps`, fit the order of
//!   `sup_t (||u_eps - u||^2 + ||v_eps - v||^2)`.
//! - **`energy_audit`** - discrete energy-balance residuals of both models.
//! - **`entropy_rate_audit`** - relative entropy along a trajectory pair,
//!   its exact rate identity and the one-sided rate bound.
//! - **`continuous_dependence`** - perturbation response of the non-local
//!   model at fixed `eps`.
//! - **`reg_gap_sweep`** - consistency `||L_eps[u] - gamma u_xx|| -> 0`.
//! - **`surface_gap_sweep`** - decay of the surface-term mismatch.
//! - **`kernel_and_multipliers`** - mollifier construction and its Fourier
//!   symbol table.
//!
//! ```bash
//! cargo run --release -p elasto-relent --example convergence_in_eps
//! ```
//!
//! The same experiments are reachable through the thin `elasto-relent` CLI
//! (`run`/`validate` on a JSON config); see the README.

pub mod config;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod field;
pub mod integrator;
pub mod mollifier;
pub mod potential;
mod quad;

pub use config::{Experiment, ExperimentConfig};
pub use dynamics::{EnergyLedger, ModelParams, State};
pub use error::{Error, Result};
pub use field::{HarmonicMode, Spectrum, TorusField};
pub use integrator::Trajectory;
pub use mollifier::{Mollifier, NonlocalMultiplier};
pub use potential::Potential;
