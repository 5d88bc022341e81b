//! Uniform space-time grids, the 2D Fourier transform under the Minkowski
//! sign convention, and the four cone sectors of the spectral plane.
//!
//! Signals are indexed `(t-row, x-column)`. The forward transform is
//!
//! ```text
//! f̂(ω/c, k_x) = ∫∫ f(ct, x) e^{+iωt - i k_x x} d(ct) dx
//! ```
//!
//! so the time axis uses the `e^{+i}` DFT kernel while the space axis uses
//! `e^{-i}`. The inverse carries the factor `1/(2π)²`. Spectra are stored on
//! a centered dual grid: index `p` along the time axis is `ω/c = (p - n_t/2)·dσ_t`.

use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ApwtError, Result};
use crate::fft::{analyse_axis, synthesise_axis, CenteredAxis, KernelSign};
use crate::geometry::Wavevector;

/// Uniform grid over `(ct, x)`. The first axis (rows) is `ct`, the second is `x`.
///
/// The same type describes purely spatial windows over `(y, x)`; the first
/// axis is then `y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub n_t: usize,
    pub n_x: usize,
    pub dt: f64,
    pub dx: f64,
    /// Coordinates `(ct₀, x₀)` of sample `[0, 0]`.
    pub origin: (f64, f64),
}

impl Grid2D {
    pub fn new(n_t: usize, n_x: usize, dt: f64, dx: f64, origin: (f64, f64)) -> Result<Self> {
        if n_t < 2 || n_x < 2 {
            return Err(ApwtError::InvalidGrid(format!("need at least 2x2 samples, got {n_t}x{n_x}")));
        }
        if !(dt > 0.0 && dx > 0.0 && dt.is_finite() && dx.is_finite()) {
            return Err(ApwtError::InvalidGrid(format!("spacings must be positive, got dt={dt}, dx={dx}")));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(ApwtError::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { n_t, n_x, dt, dx, origin })
    }

    /// Grid covering `[-half_extent, half_extent]` in both axes with step `step`,
    /// e.g. `symmetric(128.0, 0.5)` gives the 513×513 mesh of the moving-source run.
    pub fn symmetric(half_extent: f64, step: f64) -> Result<Self> {
        let half = (half_extent / step).round();
        if (half * step - half_extent).abs() > 1e-9 * half_extent.abs().max(1.0) {
            return Err(ApwtError::InvalidGrid(format!(
                "half extent {half_extent} is not a multiple of step {step}"
            )));
        }
        let n = 2 * half as usize + 1;
        Self::new(n, n, step, step, (-half * step, -half * step))
    }

    /// Grid of `n_t × n_x` samples centred on zero (sample `n/2` sits at 0).
    pub fn centered(n_t: usize, n_x: usize, dt: f64, dx: f64) -> Result<Self> {
        Self::new(n_t, n_x, dt, dx, (-((n_t / 2) as f64) * dt, -((n_x / 2) as f64) * dx))
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_t, self.n_x)
    }

    pub fn ct(&self, row: usize) -> f64 {
        self.origin.0 + row as f64 * self.dt
    }

    pub fn x(&self, col: usize) -> f64 {
        self.origin.1 + col as f64 * self.dx
    }

    pub fn cell_area(&self) -> f64 {
        self.dt * self.dx
    }

    /// `(dσ_t, dk_x) = (2π/(n_t dt), 2π/(n_x dx))`.
    pub fn dual_spacing(&self) -> (f64, f64) {
        (self.time_axis().dual_spacing(), self.space_axis().dual_spacing())
    }

    pub fn dual_cell_area(&self) -> f64 {
        let (a, b) = self.dual_spacing();
        a * b
    }

    /// `ω/c` at spectral row `p`.
    pub fn sigma_t(&self, p: usize) -> f64 {
        self.time_axis().dual(p)
    }

    /// `k_x` at spectral column `q`.
    pub fn k_x(&self, q: usize) -> f64 {
        self.space_axis().dual(q)
    }

    pub fn wavevector(&self, p: usize, q: usize) -> Wavevector {
        Wavevector::new(self.sigma_t(p), self.k_x(q))
    }

    pub(crate) fn time_axis(&self) -> CenteredAxis {
        CenteredAxis { n: self.n_t, spacing: self.dt, origin: self.origin.0 }
    }

    pub(crate) fn space_axis(&self) -> CenteredAxis {
        CenteredAxis { n: self.n_x, spacing: self.dx, origin: self.origin.1 }
    }

    pub(crate) fn check_shape(&self, values: &Array2<Complex64>) -> Result<()> {
        if values.dim() != self.shape() {
            return Err(ApwtError::GridMismatch(format!(
                "values have shape {:?}, grid expects {:?}",
                values.dim(),
                self.shape()
            )));
        }
        Ok(())
    }

    /// True when both grids describe the same sample positions.
    pub fn same_as(&self, other: &Grid2D) -> bool {
        self == other
    }
}

fn check_finite(values: &Array2<Complex64>) -> Result<()> {
    for ((row, col), v) in values.indexed_iter() {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(ApwtError::NonFinite { row, col });
        }
    }
    Ok(())
}

/// Complex samples of boundary data `f(ct, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySignal {
    grid: Grid2D,
    values: Array2<Complex64>,
}

impl BoundarySignal {
    pub fn new(grid: Grid2D, values: Array2<Complex64>) -> Result<Self> {
        grid.check_shape(&values)?;
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self { grid, values: Array2::zeros(grid.shape()) }
    }

    /// Samples `f(ct, x)` at every grid point.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> Complex64) -> Result<Self> {
        let values = Array2::from_shape_fn(grid.shape(), |(m, n)| f(grid.ct(m), grid.x(n)));
        Self::new(grid, values)
    }

    /// Embeds real data with zero imaginary part.
    pub fn from_real(grid: Grid2D, values: &Array2<f64>) -> Result<Self> {
        Self::new(grid, values.mapv(|v| Complex64::new(v, 0.0)))
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<Complex64> {
        self.values
    }

    /// `Σ|f|² dt dx`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `‖self - other‖ / ‖other‖` over the sample values.
    pub fn relative_l2_error(&self, reference: &BoundarySignal) -> Result<f64> {
        if !self.grid.same_as(&reference.grid) {
            return Err(ApwtError::GridMismatch("signals live on different grids".into()));
        }
        let diff: f64 = self
            .values
            .iter()
            .zip(reference.values.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let base: f64 = reference.values.iter().map(|v| v.norm_sqr()).sum();
        Ok(if base == 0.0 { diff.sqrt() } else { (diff / base).sqrt() })
    }
}

/// Fixed record of the Fourier sign convention: `(σ, χ) = -ωt + k_x x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    Minkowski,
}

/// Samples of `f̂(ω/c, k_x)` on the centered dual of a coordinate grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid2D,
    values: Array2<Complex64>,
    convention: Convention,
}

impl Spectrum {
    /// Wraps spectral samples that belong to the dual of `grid` (the coordinate grid).
    pub fn new(grid: Grid2D, values: Array2<Complex64>) -> Result<Self> {
        grid.check_shape(&values)?;
        check_finite(&values)?;
        Ok(Self { grid, values, convention: Convention::Minkowski })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self { grid, values: Array2::zeros(grid.shape()), convention: Convention::Minkowski }
    }

    /// Evaluates `g(σ)` on every spectral bin.
    pub fn from_fn(grid: Grid2D, mut g: impl FnMut(Wavevector) -> Complex64) -> Result<Self> {
        let values = Array2::from_shape_fn(grid.shape(), |(p, q)| g(grid.wavevector(p, q)));
        Self::new(grid, values)
    }

    /// The coordinate grid this spectrum is dual to.
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<Complex64> {
        self.values
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn wavevector(&self, p: usize, q: usize) -> Wavevector {
        self.grid.wavevector(p, q)
    }

    /// `Σ|f̂|² dσ_t dk_x`; equals `(2π)²‖f‖²` for the transform of `f`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dual_cell_area()
    }

    /// Iterates `(p, q, σ, f̂(σ))` over all bins.
    pub fn bins(&self) -> impl Iterator<Item = (usize, usize, Wavevector, Complex64)> + '_ {
        self.values.indexed_iter().map(move |((p, q), v)| (p, q, self.grid.wavevector(p, q), *v))
    }

    pub fn map_bins(&self, mut g: impl FnMut(Wavevector, Complex64) -> Complex64) -> Spectrum {
        let mut out = self.clone();
        for ((p, q), v) in out.values.indexed_iter_mut() {
            *v = g(self.grid.wavevector(p, q), *v);
        }
        out
    }
}

/// One of the four cone sectors of the `(ω/c, k_x)` plane.
///
/// * `D1`: `ω > 0, |k_x| < ω/c` (propagating, positive frequency)
/// * `D2`: `ω < 0, |k_x| < |ω|/c`
/// * `D3`: `k_x > 0, |ω|/c < k_x` (evanescent)
/// * `D4`: `k_x < 0, |ω|/c < |k_x|`
///
/// Points on the lines `ω = ±c k_x` belong to no sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Sector {
    D1 = 1,
    D2 = 2,
    D3 = 3,
    D4 = 4,
}

impl Sector {
    pub const ALL: [Sector; 4] = [Sector::D1, Sector::D2, Sector::D3, Sector::D4];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn is_propagating(self) -> bool {
        matches!(self, Sector::D1 | Sector::D2)
    }

    pub fn contains(self, sigma: Wavevector) -> bool {
        Sector::of(sigma) == Some(self)
    }

    /// Sector of a spectral point, `None` on the light cone.
    pub fn of(sigma: Wavevector) -> Option<Sector> {
        let (k, kx) = (sigma.k, sigma.kx);
        let (ak, akx) = (k.abs(), kx.abs());
        if akx < ak {
            Some(if k > 0.0 { Sector::D1 } else { Sector::D2 })
        } else if ak < akx {
            Some(if kx > 0.0 { Sector::D3 } else { Sector::D4 })
        } else {
            None
        }
    }
}

impl TryFrom<u8> for Sector {
    type Error = ApwtError;

    fn try_from(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Sector::D1),
            2 => Ok(Sector::D2),
            3 => Ok(Sector::D3),
            4 => Ok(Sector::D4),
            _ => Err(ApwtError::InvalidParameter(format!("sector must be 1..=4, got {j}"))),
        }
    }
}

impl From<Sector> for u8 {
    fn from(s: Sector) -> u8 {
        s.index()
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.index())
    }
}

/// Minkowski-convention forward transform `f ↦ f̂`.
pub fn forward_fourier(signal: &BoundarySignal) -> Spectrum {
    let grid = signal.grid;
    let mut values = signal.values.clone();
    // +iωt on the time axis, -i k_x x on the space axis.
    analyse_axis(&mut values, 0, &grid.time_axis(), KernelSign::Plus);
    analyse_axis(&mut values, 1, &grid.space_axis(), KernelSign::Minus);
    let scale = grid.cell_area();
    values.mapv_inplace(|v| v * scale);
    Spectrum { grid, values, convention: Convention::Minkowski }
}

/// Inverse of [`forward_fourier`]: `f(χ) = (2π)^{-2} Σ f̂(σ) e^{i(σ,χ)} dσ_t dk_x`.
pub fn inverse_fourier(spectrum: &Spectrum) -> BoundarySignal {
    let grid = spectrum.grid;
    let mut values = spectrum.values.clone();
    synthesise_axis(&mut values, 0, &grid.time_axis(), KernelSign::Minus);
    synthesise_axis(&mut values, 1, &grid.space_axis(), KernelSign::Plus);
    let scale = 1.0 / (grid.n_t as f64 * grid.n_x as f64 * grid.cell_area());
    values.mapv_inplace(|v| v * scale);
    BoundarySignal { grid, values }
}

/// Validating entry point for raw arrays: rejects non-finite input.
pub fn try_forward_fourier(grid: Grid2D, values: Array2<Complex64>) -> Result<Spectrum> {
    Ok(forward_fourier(&BoundarySignal::new(grid, values)?))
}

/// Zeroes every bin outside `D_j`, including the light-cone lines.
pub fn sector_mask(spectrum: &Spectrum, sector: Sector) -> Spectrum {
    spectrum.map_bins(|sigma, v| if sector.contains(sigma) { v } else { Complex64::new(0.0, 0.0) })
}

/// The bins on `ω = ±c k_x` that no sector owns.
pub fn light_cone_bins(spectrum: &Spectrum) -> Spectrum {
    spectrum.map_bins(|sigma, v| if Sector::of(sigma).is_none() { v } else { Complex64::new(0.0, 0.0) })
}
