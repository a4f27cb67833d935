//! Periodic scalar fields on the unit circle and their spectral calculus.
//!
//! A [`TorusField`] stores uniform samples of a real 1-periodic function,
//! `values[j] = w(j/n)` with `n` a power of two. All calculus (derivatives,
//! norms, mean projection, dealiased pointwise maps) goes through the discrete
//! Fourier representation with the convention
//!
//! ```text
//! w(x) = sum_k c_k exp(2 pi i k x),   k in {-n/2+1, ..., n/2}
//! ```
//!
//! so that `c_0` is the mean and `c_{-k} = conj(c_k)` for real fields.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::ops::{Add, Sub};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest admissible grid.
pub const MIN_SAMPLES: usize = 8;

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<PlanCache> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Signed wavenumber of FFT bin `i` on a grid of `n` points: bins
/// `0..=n/2` map to `k = 0..=n/2`, the rest to negative wavenumbers.
pub fn bin_to_wavenumber(bin: usize, n: usize) -> i64 {
    debug_assert!(bin < n);
    if bin <= n / 2 {
        bin as i64
    } else {
        bin as i64 - n as i64
    }
}

/// FFT bin of signed wavenumber `k` on a grid of `n` points.
pub fn wavenumber_to_bin(k: i64, n: usize) -> usize {
    debug_assert!(k > -(n as i64) / 2 && k <= n as i64 / 2);
    if k >= 0 {
        k as usize
    } else {
        (k + n as i64) as usize
    }
}

/// Projects complex coefficients onto the Hermitian subspace so the field
/// they represent is exactly real. Removes last-ulp asymmetry left by the FFT.
pub(crate) fn hermitian_project(coeffs: &mut [Complex64]) {
    let n = coeffs.len();
    coeffs[0].im = 0.0;
    if n.is_multiple_of(2) {
        coeffs[n / 2].im = 0.0;
    }
    let mut i = 1;
    while 2 * i < n {
        let avg = 0.5 * (coeffs[i] + coeffs[n - i].conj());
        coeffs[i] = avg;
        coeffs[n - i] = avg.conj();
        i += 1;
    }
}

/// Forward transform of real samples into normalized coefficients.
pub(crate) fn forward_coeffs(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_plan(n, false).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    hermitian_project(&mut buf);
    buf
}

/// Inverse transform of normalized coefficients into real samples.
pub(crate) fn inverse_values(coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    fft_plan(buf.len(), true).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Zero-pads normalized coefficients from an `n`-grid onto an `m`-grid
/// (`m > n`), splitting the Nyquist mode so the interpolant stays real.
pub(crate) fn pad_coeffs(coeffs: &[Complex64], n: usize, m: usize) -> Vec<Complex64> {
    debug_assert!(m > n);
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    for (bin, &c) in coeffs.iter().enumerate() {
        let k = bin_to_wavenumber(bin, n);
        if k.unsigned_abs() < (n as u64) / 2 {
            padded[wavenumber_to_bin(k, m)] = c;
        } else {
            // k == n/2: distribute onto +-n/2 of the fine grid
            let half = 0.5 * c;
            padded[wavenumber_to_bin(k, m)] = half;
            padded[wavenumber_to_bin(-k, m)] = half.conj();
        }
    }
    padded
}

/// Truncates normalized coefficients from an `m`-grid back to an `n`-grid,
/// recombining the +-n/2 pair onto the single Nyquist bin.
pub(crate) fn truncate_coeffs(coeffs_m: &[Complex64], m: usize, n: usize) -> Vec<Complex64> {
    debug_assert!(m > n);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (bin, slot) in out.iter_mut().enumerate() {
        let k = bin_to_wavenumber(bin, n);
        if k.unsigned_abs() < (n as u64) / 2 {
            *slot = coeffs_m[wavenumber_to_bin(k, m)];
        } else {
            *slot = coeffs_m[wavenumber_to_bin(k, m)] + coeffs_m[wavenumber_to_bin(-k, m)];
        }
    }
    out
}

/// One harmonic of a mode-list initial datum: amplitude of `sin(2 pi k x)`
/// and `cos(2 pi k x)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HarmonicMode {
    pub k: u32,
    #[serde(default)]
    pub sin: f64,
    #[serde(default)]
    pub cos: f64,
}

/// Real-valued 1-periodic function sampled on the uniform grid `x_j = j/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    n: usize,
    values: Vec<f64>,
}

impl TorusField {
    /// Wraps samples, enforcing the grid invariants (`n >= 8` power of two,
    /// finite values).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < MIN_SAMPLES || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid size {n} must be a power of two >= {MIN_SAMPLES}"
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "field samples must all be finite".into(),
            ));
        }
        Ok(Self { n, values })
    }

    /// Internal constructor for values produced by our own transforms.
    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        let n = values.len();
        debug_assert!(n >= MIN_SAMPLES && n.is_power_of_two());
        Self { n, values }
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    /// Samples `f` on the grid.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n).map(|j| f(j as f64 / n as f64)).collect();
        Self::new(values)
    }

    /// Builds a field from a finite list of harmonics; the result is exactly
    /// band-limited and mean-zero when every mode has `k >= 1`.
    pub fn from_modes(n: usize, modes: &[HarmonicMode]) -> Result<Self> {
        Self::from_fn(n, |x| {
            modes
                .iter()
                .map(|m| {
                    let arg = 2.0 * std::f64::consts::PI * m.k as f64 * x;
                    m.sin * arg.sin() + m.cos * arg.cos()
                })
                .sum()
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid point `x_j = j / n`.
    pub fn grid_point(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n as f64
    }

    /// Forward transform into normalized Fourier coefficients.
    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            n: self.n,
            coeffs: forward_coeffs(&self.values),
        }
    }

    /// Spectral derivative of the given order (1 through 4). The Nyquist mode
    /// is zeroed for odd orders.
    pub fn derivative(&self, order: u32) -> Result<TorusField> {
        if !(1..=4).contains(&order) {
            return Err(Error::InvalidArgument(format!(
                "derivative order {order} outside supported range 1..=4"
            )));
        }
        let mut sp = self.spectrum();
        sp.differentiate(order);
        Ok(sp.to_field())
    }

    /// Removes the mean (zeroes the `k = 0` mode, all others untouched).
    pub fn project_mean_zero(&self) -> TorusField {
        let mean = self.mean();
        let values = self.values.iter().map(|v| v - mean).collect();
        Self::from_values_unchecked(values)
    }

    /// Discrete L2 norm, `sqrt((1/n) sum w_j^2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.n as f64).sqrt()
    }

    /// H1 seminorm: L2 norm of the first spectral derivative.
    pub fn h1_seminorm(&self) -> f64 {
        self.derivative(1)
            .expect("order 1 is always valid")
            .l2_norm()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Discrete L2 inner product `(1/n) sum w1_j w2_j`.
    pub fn inner(&self, other: &TorusField) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::InvalidArgument(format!(
                "inner product needs matching grids, got {} and {}",
                self.n, other.n
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.n as f64)
    }

    /// Applies `f` pointwise on the same grid (no dealiasing).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> TorusField {
        Self::from_values_unchecked(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two same-grid fields.
    pub fn zip_map(&self, other: &TorusField, f: impl Fn(f64, f64) -> f64) -> TorusField {
        assert_eq!(self.n, other.n, "zip_map needs matching grids");
        Self::from_values_unchecked(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, factor: f64) -> TorusField {
        self.map(|v| factor * v)
    }

    /// Applies `f` pointwise on a 3/2 zero-padded grid and truncates back
    /// (standard dealiasing for the nonlinear stress).
    pub fn map_dealiased(&self, f: impl Fn(f64) -> f64) -> TorusField {
        let n = self.n;
        let m = 3 * n / 2;
        let padded = pad_coeffs(&self.spectrum().coeffs, n, m);
        let fine_values = inverse_values(&padded);
        let mapped: Vec<f64> = fine_values.into_iter().map(f).collect();
        let mut coeffs_m = forward_coeffs(&mapped);
        hermitian_project(&mut coeffs_m);
        Spectrum {
            n,
            coeffs: truncate_coeffs(&coeffs_m, m, n),
        }
        .to_field()
    }

    /// Band-limited translate `x -> w(x - delta)` via the shift theorem.
    pub(crate) fn shifted(&self, delta: f64) -> TorusField {
        let mut sp = self.spectrum();
        for (bin, c) in sp.coeffs.iter_mut().enumerate() {
            let k = bin_to_wavenumber(bin, self.n) as f64;
            let phase = -2.0 * std::f64::consts::PI * k * delta;
            *c *= Complex64::new(phase.cos(), phase.sin());
        }
        hermitian_project(&mut sp.coeffs);
        sp.to_field()
    }

    /// CSV serialization: header `x,value`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.n * 48 + 16);
        out.push_str("x,value\n");
        for (j, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e}", self.grid_point(j), v);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

impl Add for &TorusField {
    type Output = TorusField;
    fn add(self, rhs: &TorusField) -> TorusField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &TorusField {
    type Output = TorusField;
    fn sub(self, rhs: &TorusField) -> TorusField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

/// Normalized Fourier coefficients of a real field, stored in FFT bin order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficients in FFT bin order; use [`bin_to_wavenumber`] to interpret
    /// indices.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn from_coeffs(n: usize, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(n, coeffs.len());
        Self { n, coeffs }
    }

    /// Coefficient of signed wavenumber `k`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs[wavenumber_to_bin(k, self.n)]
    }

    /// Sum of squared moduli; equals the squared L2 norm by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// In-place spectral differentiation `c_k -> (2 pi i k)^order c_k`; the
    /// Nyquist mode is zeroed for odd orders.
    pub(crate) fn differentiate(&mut self, order: u32) {
        let n = self.n;
        for (bin, c) in self.coeffs.iter_mut().enumerate() {
            let k = bin_to_wavenumber(bin, n);
            if order % 2 == 1 && bin == n / 2 {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let ik = Complex64::new(0.0, 2.0 * std::f64::consts::PI * k as f64);
            *c *= ik.powu(order);
        }
    }

    /// Inverse transform back to samples.
    pub fn to_field(&self) -> TorusField {
        TorusField::from_values_unchecked(inverse_values(&self.coeffs))
    }
}
