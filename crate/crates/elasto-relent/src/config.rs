//! Experiment configuration: a single JSON document with defaults for every
//! field.
//!
//! Validation pins the rules that keep a run meaningful: the capillarity has
//! to be achievable by the kernel family, the scaled kernel support must fit
//! inside half a period, and `eps >= 8/n` so the discrete grid resolves the
//! kernel before the continuum limit is probed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{HarmonicMode, TorusField};
use crate::mollifier::{bump_second_moment, Mollifier};
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    ConvergenceInEps,
    EnergyAudit,
    EntropyRateAudit,
    ContinuousDependence,
    RegGapSweep,
    SurfaceGapSweep,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::ConvergenceInEps => "convergence_in_eps",
            Experiment::EnergyAudit => "energy_audit",
            Experiment::EntropyRateAudit => "entropy_rate_audit",
            Experiment::ContinuousDependence => "continuous_dependence",
            Experiment::RegGapSweep => "reg_gap_sweep",
            Experiment::SurfaceGapSweep => "surface_gap_sweep",
        }
    }

    /// Experiments that integrate trajectories (and therefore need enough
    /// recorded snapshots for sup-in-time measurements).
    pub fn runs_trajectories(&self) -> bool {
        !matches!(
            self,
            Experiment::RegGapSweep | Experiment::SurfaceGapSweep
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wbar: Option<f64>,
}

impl PotentialConfig {
    pub fn build(&self) -> Result<Potential> {
        match self.name.as_str() {
            "double_well" => Ok(Potential::double_well()),
            "quadratic" => Ok(Potential::quadratic()),
            "zero" => Ok(Potential::zero()),
            "polynomial" => {
                let coeffs = self.coeffs.clone().ok_or_else(|| {
                    Error::Config("polynomial potential needs `coeffs`".into())
                })?;
                let wbar = self
                    .wbar
                    .ok_or_else(|| Error::Config("polynomial potential needs `wbar`".into()))?;
                Potential::polynomial("polynomial", coeffs, wbar)
                    .map_err(|e| Error::Config(e.to_string()))
            }
            other => Err(Error::Config(format!(
                "unknown potential `{other}`; expected double_well, quadratic, zero, polynomial"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataConfig {
    /// Only the `modes` family is defined: finite lists of harmonics.
    pub family: String,
    pub u: Vec<HarmonicMode>,
    pub v: Vec<HarmonicMode>,
}

impl InitialDataConfig {
    pub fn build(&self, n: usize) -> Result<(TorusField, TorusField)> {
        if self.family != "modes" {
            return Err(Error::Config(format!(
                "unknown initial data family `{}`; expected `modes`",
                self.family
            )));
        }
        let u = TorusField::from_modes(n, &self.u)?;
        let v = TorusField::from_modes(n, &self.v)?;
        Ok((u, v))
    }
}

/// Which component the continuous-dependence experiment perturbs, and with
/// which harmonic.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub component: String,
    pub mode: u32,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            component: "u".into(),
            mode: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub t_end: f64,
    pub dt: f64,
    pub mu: f64,
    pub gamma: f64,
    /// Kernel width for single-eps experiments (energy audit, entropy rate
    /// audit, continuous dependence).
    pub eps: f64,
    /// Sweep values, strictly decreasing (dyadic ratios recommended).
    pub eps_list: Vec<f64>,
    /// Perturbation amplitudes for the continuous-dependence experiment.
    pub delta_list: Vec<f64>,
    pub record_every: usize,
    pub potential: PotentialConfig,
    pub initial_data: InitialDataConfig,
    pub perturbation: PerturbationConfig,
    pub kernel: String,
    pub quad_tolerance: f64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::ConvergenceInEps,
            n: 1024,
            t_end: 0.5,
            dt: 1e-4,
            mu: 0.5,
            gamma: 0.005,
            eps: 0.05,
            eps_list: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            delta_list: vec![1e-2, 1e-3, 1e-4],
            // keeps centered time differences of the entropy series accurate
            // while staying far above the 50-snapshot floor
            record_every: 10,
            potential: PotentialConfig {
                name: "double_well".into(),
                coeffs: None,
                wbar: None,
            },
            initial_data: InitialDataConfig {
                family: "modes".into(),
                u: vec![
                    HarmonicMode {
                        k: 1,
                        sin: 0.2,
                        cos: 0.0,
                    },
                    HarmonicMode {
                        k: 2,
                        sin: 0.1,
                        cos: 0.0,
                    },
                ],
                v: vec![HarmonicMode {
                    k: 1,
                    sin: 0.1,
                    cos: 0.0,
                }],
            },
            perturbation: PerturbationConfig::default(),
            kernel: "bump".into(),
            quad_tolerance: 1e-12,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {path:?}: {e}")))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{path:?}: {e}")))?;
        Ok(cfg)
    }

    /// Builds the kernel after checking the whole document; returns the
    /// mollifier so callers do not pay for it twice.
    pub fn validate(&self) -> Result<Mollifier> {
        if self.n < crate::field::MIN_SAMPLES || !self.n.is_power_of_two() {
            return Err(Error::Config(format!(
                "n = {} must be a power of two >= {}",
                self.n,
                crate::field::MIN_SAMPLES
            )));
        }
        for (name, value) in [("t_end", self.t_end), ("dt", self.dt), ("mu", self.mu)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {value}")));
            }
        }
        if self.dt > self.t_end {
            return Err(Error::Config(format!(
                "dt = {} must not exceed t_end = {}",
                self.dt, self.t_end
            )));
        }
        if self.kernel != "bump" {
            return Err(Error::Config(format!(
                "unknown kernel `{}`; only `bump` is available",
                self.kernel
            )));
        }
        let max_gamma = bump_second_moment() / 2.0;
        if !(self.gamma > 0.0 && self.gamma <= max_gamma) {
            return Err(Error::Config(format!(
                "gamma = {} outside the admissible interval (0, {max_gamma:.12e}]",
                self.gamma
            )));
        }
        let phi = Mollifier::with_tolerance(self.gamma, self.quad_tolerance)
            .map_err(|e| Error::Config(e.to_string()))?;

        let mut all_eps = self.eps_list.clone();
        all_eps.push(self.eps);
        for &eps in &all_eps {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::Config(format!("eps = {eps} must be positive")));
            }
            let floor = 8.0 / self.n as f64;
            if eps < floor {
                return Err(Error::Config(format!(
                    "eps = {eps} under-resolves the kernel: require eps >= 8/n = {floor}"
                )));
            }
            let eps_b = eps * phi.scale_b();
            if eps_b >= 0.5 {
                return Err(Error::Config(format!(
                    "eps = {eps} puts the scaled support eps*b = {eps_b:.4} beyond half a period"
                )));
            }
        }
        if self.eps_list.len() < 3
            && matches!(
                self.experiment,
                Experiment::ConvergenceInEps
                    | Experiment::RegGapSweep
                    | Experiment::SurfaceGapSweep
            )
        {
            return Err(Error::Config(
                "sweep experiments need at least 3 eps values for the order fit".into(),
            ));
        }
        if !self.eps_list.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::Config(
                "eps_list must be strictly decreasing".into(),
            ));
        }
        if self.experiment == Experiment::ContinuousDependence {
            // zero deltas are allowed and skipped by the experiment, but at
            // least one positive amplitude must remain
            if !self.delta_list.iter().any(|d| *d > 0.0) {
                return Err(Error::Config(
                    "continuous_dependence needs at least one positive delta".into(),
                ));
            }
            if !self.delta_list.iter().all(|d| *d >= 0.0 && d.is_finite()) {
                return Err(Error::Config(
                    "delta_list entries must be nonnegative and finite".into(),
                ));
            }
            match self.perturbation.component.as_str() {
                "u" | "v" => {}
                other => {
                    return Err(Error::Config(format!(
                        "perturbation component must be `u` or `v`, got `{other}`"
                    )))
                }
            }
            if self.perturbation.mode == 0 {
                return Err(Error::Config(
                    "perturbation mode must be >= 1 to stay mean-zero".into(),
                ));
            }
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be >= 1".into()));
        }
        if self.experiment.runs_trajectories() {
            let snapshots = (self.t_end / self.dt) as usize / self.record_every;
            if snapshots < 50 {
                return Err(Error::Config(format!(
                    "record_every = {} leaves only {snapshots} snapshots; need >= 50 for \
                     sup-in-time measurements",
                    self.record_every
                )));
            }
        }
        let max_mode = self.n as u32 / 3;
        for (label, modes) in [("u", &self.initial_data.u), ("v", &self.initial_data.v)] {
            for m in modes {
                if m.k == 0 {
                    return Err(Error::Config(format!(
                        "initial data {label} contains a k = 0 mode; data must be mean-zero"
                    )));
                }
                if m.k > max_mode {
                    return Err(Error::Config(format!(
                        "initial data {label} mode k = {} exceeds the band limit n/3 = {max_mode}",
                        m.k
                    )));
                }
                if !m.sin.is_finite() || !m.cos.is_finite() {
                    return Err(Error::Config("mode amplitudes must be finite".into()));
                }
            }
        }
        self.potential.build().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        self.initial_data
            .build(self.n)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        let cfg = ExperimentConfig::default();
        let phi = cfg.validate().expect("default config must be valid");
        assert!((phi.gamma() - 0.005).abs() < 1e-15);
    }

    #[test]
    fn gamma_out_of_range_names_the_interval() {
        let cfg = ExperimentConfig {
            gamma: 1.0,
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("admissible interval"), "{msg}");
    }

    #[test]
    fn eps_floor_rule_is_enforced() {
        let cfg = ExperimentConfig {
            n: 64,
            eps_list: vec![0.2, 0.1, 0.05],
            eps: 0.05,
            ..Default::default()
        };
        // 8/64 = 0.125 > 0.05
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("8/n"), "{err}");
    }

    #[test]
    fn eps_list_must_decrease() {
        let cfg = ExperimentConfig {
            eps_list: vec![0.1, 0.2, 0.05],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"frobnicate": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn minimal_json_round_trips_through_defaults() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"experiment": "reg_gap_sweep"}"#).unwrap();
        assert_eq!(cfg.experiment, Experiment::RegGapSweep);
        assert_eq!(cfg.n, 1024);
        cfg.validate().unwrap();
    }

    #[test]
    fn zero_mode_initial_data_is_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.initial_data.u.push(HarmonicMode {
            k: 0,
            sin: 0.0,
            cos: 1.0,
        });
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn too_few_snapshots_is_a_config_error() {
        let cfg = ExperimentConfig {
            record_every: 5000,
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("snapshots"), "{err}");
    }
}
