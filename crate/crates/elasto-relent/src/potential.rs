//! Stored-energy densities `W` and their derivatives.
//!
//! The stress driving the dynamics is `W'(u)`; the models assume `W >= 0` and
//! a uniform curvature floor `W'' > -wbar`. Potentials are polynomial by
//! construction so `W` is smooth and the derivative chain is exact.

use crate::error::{Error, Result};

/// Polynomial energy density with certified curvature floor.
#[derive(Debug, Clone)]
pub struct Potential {
    name: String,
    wbar: f64,
    /// Coefficients of `W`, then of `W'`, `W''`, `W'''`.
    coeffs: [Vec<f64>; 4],
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| i as f64 * c)
        .collect()
}

impl Potential {
    /// Polynomial potential `W(u) = sum_i coeffs[i] u^i`.
    pub fn polynomial(name: impl Into<String>, coeffs: Vec<f64>, wbar: f64) -> Result<Self> {
        if !(wbar.is_finite() && wbar > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "curvature floor wbar must be positive and finite, got {wbar}"
            )));
        }
        if !coeffs.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument(
                "potential coefficients must be finite".into(),
            ));
        }
        let d1 = poly_derivative(&coeffs);
        let d2 = poly_derivative(&d1);
        let d3 = poly_derivative(&d2);
        Ok(Self {
            name: name.into(),
            wbar,
            coeffs: [coeffs, d1, d2, d3],
        })
    }

    /// The quartic double well `W(u) = (u^2 - 1)^2 / 4` with wells at +-1 and
    /// curvature floor `wbar = 1`.
    pub fn double_well() -> Self {
        Self::polynomial("double_well", vec![0.25, 0.0, -0.5, 0.0, 0.25], 1.0)
            .expect("built-in coefficients are valid")
    }

    /// Convex reference `W(u) = u^2 / 2` (used to exercise the quadratic-well
    /// degeneracies of the entropy functionals).
    pub fn quadratic() -> Self {
        Self::polynomial("quadratic", vec![0.0, 0.0, 0.5], 1.0)
            .expect("built-in coefficients are valid")
    }

    /// `W = 0`: switches the stress off entirely, leaving linear dynamics.
    pub fn zero() -> Self {
        Self::polynomial("zero", vec![], 1.0).expect("built-in coefficients are valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Certified lower bound: `W''(u) >= -wbar` on the validated range.
    pub fn wbar(&self) -> f64 {
        self.wbar
    }

    pub fn eval(&self, u: f64) -> f64 {
        horner(&self.coeffs[0], u)
    }

    pub fn d1(&self, u: f64) -> f64 {
        horner(&self.coeffs[1], u)
    }

    pub fn d2(&self, u: f64) -> f64 {
        horner(&self.coeffs[2], u)
    }

    pub fn d3(&self, u: f64) -> f64 {
        horner(&self.coeffs[3], u)
    }

    /// Probes `W` on a dense grid over `[lo, hi]`: nonnegativity, the
    /// curvature floor, and agreement of each derivative with a centered
    /// finite difference of the previous one.
    pub fn validate(&self, lo: f64, hi: f64, samples: usize) -> ValidationReport {
        assert!(lo < hi, "validation range must satisfy lo < hi");
        assert!(samples >= 100, "validation needs at least 100 samples");
        let h = 1e-5;
        let mut report = ValidationReport {
            min_w: f64::INFINITY,
            min_curvature_margin: f64::INFINITY,
            max_d1_error: 0.0,
            max_d2_error: 0.0,
            max_d3_error: 0.0,
        };
        for i in 0..samples {
            let u = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            report.min_w = report.min_w.min(self.eval(u));
            report.min_curvature_margin = report.min_curvature_margin.min(self.d2(u) + self.wbar);
            let fd1 = (self.eval(u + h) - self.eval(u - h)) / (2.0 * h);
            let fd2 = (self.d1(u + h) - self.d1(u - h)) / (2.0 * h);
            let fd3 = (self.d2(u + h) - self.d2(u - h)) / (2.0 * h);
            report.max_d1_error = report.max_d1_error.max((fd1 - self.d1(u)).abs());
            report.max_d2_error = report.max_d2_error.max((fd2 - self.d2(u)).abs());
            report.max_d3_error = report.max_d3_error.max((fd3 - self.d3(u)).abs());
        }
        report
    }
}

/// Outcome of probing a potential on a range.
#[derive(Debug, Clone, Copy)]
pub struct ValidationReport {
    pub min_w: f64,
    /// Minimum of `W'' + wbar`; the floor hypothesis holds when this stays
    /// above (numerically) zero.
    pub min_curvature_margin: f64,
    pub max_d1_error: f64,
    pub max_d2_error: f64,
    pub max_d3_error: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.min_w >= -1e-12
            && self.min_curvature_margin >= -1e-12
            && self.max_d1_error <= 1e-6
            && self.max_d2_error <= 1e-6
            && self.max_d3_error <= 1e-6
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_well_values() {
        let w = Potential::double_well();
        assert_eq!(w.eval(1.0), 0.0);
        assert_eq!(w.eval(-1.0), 0.0);
        assert_eq!(w.eval(0.0), 0.25);
        assert_eq!(w.d2(0.0), -1.0);
        assert_eq!(w.d1(2.0), 6.0);
        assert_eq!(w.d3(1.0), 6.0);
        // the curvature infimum sits exactly at -wbar; the validator allows it
        assert!(w.d2(0.0) >= -w.wbar() - 1e-12);
    }

    #[test]
    fn double_well_is_even() {
        let w = Potential::double_well();
        for i in 0..200 {
            let u = -3.0 + 6.0 * i as f64 / 199.0;
            assert!((w.eval(u) - w.eval(-u)).abs() < 1e-14);
        }
    }

    #[test]
    fn double_well_validates_on_wide_range() {
        let report = Potential::double_well().validate(-2.0, 2.0, 1000);
        assert!(report.passed(), "{report:?}");
        assert!(report.min_w >= 0.0);
    }

    #[test]
    fn derivative_chain_matches_finite_differences() {
        let report = Potential::double_well().validate(-3.0, 3.0, 1000);
        assert!(report.max_d1_error <= 1e-6);
        assert!(report.max_d2_error <= 1e-6);
        assert!(report.max_d3_error <= 1e-6);
    }

    #[test]
    fn negative_potential_fails_validation() {
        let p = Potential::polynomial("inverted", vec![0.0, 0.0, -1.0], 1.0).unwrap();
        let report = p.validate(-2.0, 2.0, 500);
        assert!(!report.passed());
        assert!(report.min_w < -1e-12);
    }

    #[test]
    fn too_small_wbar_fails_validation() {
        let p = Potential::polynomial("shallow", vec![0.25, 0.0, -0.5, 0.0, 0.25], 0.5).unwrap();
        let report = p.validate(-2.0, 2.0, 1001);
        assert!(!report.passed());
        assert!(report.min_curvature_margin < -1e-12);
    }

    #[test]
    fn wbar_must_be_positive() {
        assert!(Potential::polynomial("bad", vec![1.0], 0.0).is_err());
        assert!(Potential::polynomial("bad", vec![1.0], -1.0).is_err());
    }
}
