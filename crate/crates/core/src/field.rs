//! Continuation of boundary data into the half-plane `y > 0`.
//!
//! Sector by sector the boundary spectrum is multiplied by
//! `e^{+i√(k² - k_x²) y}` (sectors 1, 2) or `e^{-√(k_x² - k²) y}` (sectors 3, 4),
//! the outgoing and bounded solutions respectively.

use std::f64::consts::PI;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{ApwtError, Result};
use crate::lattice::{forward_fourier, inverse_fourier, sector_mask, BoundarySignal, Grid2D, Sector, Spectrum};

/// One sector's field `u_j(ct, x; y)` at a fixed height.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSlice {
    pub y: f64,
    pub sector: Sector,
    pub grid: Grid2D,
    pub values: Array2<Complex64>,
}

impl FieldSlice {
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn to_signal(&self) -> Result<BoundarySignal> {
        BoundarySignal::new(self.grid, self.values.clone())
    }
}

/// The four sector fields at one height.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfplaneLevel {
    pub y: f64,
    pub slices: [FieldSlice; 4],
}

impl HalfplaneLevel {
    /// `u = Σ_j u_j`.
    pub fn total(&self) -> Array2<Complex64> {
        let mut out = self.slices[0].values.clone();
        for s in &self.slices[1..] {
            out += &s.values;
        }
        out
    }
}

fn check_height(y: f64) -> Result<()> {
    if y >= 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(ApwtError::InvalidParameter(format!("height must be finite and nonnegative, got {y}")))
    }
}

/// Propagator symbol of `sector` at `(k, k_x)`; `None` outside the open sector.
#[inline]
fn symbol(sector: Sector, k: f64, kx: f64, y: f64) -> Option<Complex64> {
    if !sector.contains(crate::geometry::Wavevector::new(k, kx)) {
        return None;
    }
    Some(if sector.is_propagating() {
        Complex64::from_polar(1.0, ((k - kx) * (k + kx)).sqrt() * y)
    } else {
        Complex64::new((-((kx - k) * (kx + k)).sqrt() * y).exp(), 0.0)
    })
}

/// Multiplies the sector-`j` bins of `spectrum` by the half-plane propagator.
pub fn propagate(spectrum: &Spectrum, sector: Sector, y: f64) -> Result<Spectrum> {
    check_height(y)?;
    let grid = *spectrum.grid();
    let mut out = spectrum.clone();
    for ((p, q), v) in out.values_mut().indexed_iter_mut() {
        if let Some(m) = symbol(sector, grid.sigma_t(p), grid.k_x(q), y) {
            *v *= m;
        }
    }
    Ok(out)
}

/// Splits `f` into sectors and continues each to every height in `y_list`.
pub fn solve_halfplane(f: &BoundarySignal, y_list: &[f64]) -> Result<Vec<HalfplaneLevel>> {
    for &y in y_list {
        check_height(y)?;
    }
    let fhat = forward_fourier(f);
    let masked: Vec<Spectrum> = Sector::ALL.iter().map(|&j| sector_mask(&fhat, j)).collect();
    y_list
        .iter()
        .map(|&y| {
            let mut slices = Vec::with_capacity(4);
            for (spectrum, &sector) in masked.iter().zip(Sector::ALL.iter()) {
                let values = inverse_fourier(&propagate(spectrum, sector, y)?).into_values();
                slices.push(FieldSlice { y, sector, grid: *f.grid(), values });
            }
            let slices: [FieldSlice; 4] = slices.try_into().expect("four sectors");
            Ok(HalfplaneLevel { y, slices })
        })
        .collect()
}

/// Field of one sector spectrum at height `y`.
pub fn field_slice(spectrum_j: &Spectrum, sector: Sector, y: f64) -> Result<FieldSlice> {
    let values = inverse_fourier(&propagate(spectrum_j, sector, y)?).into_values();
    Ok(FieldSlice { y, sector, grid: *spectrum_j.grid(), values })
}

/// Spectrum of `u_tt - u_xx - u_yy` at the middle slice, with spectral
/// `(t, x)` derivatives and a central difference in `y`, plus the spectrum
/// of `u_tt` used for normalisation.
fn residual_spectra(below: &FieldSlice, at: &FieldSlice, above: &FieldSlice) -> Result<(Array2<Complex64>, f64)> {
    if !(below.grid.same_as(&at.grid) && above.grid.same_as(&at.grid)) {
        return Err(ApwtError::GridMismatch("residual slices live on different grids".into()));
    }
    if below.sector != at.sector || above.sector != at.sector {
        return Err(ApwtError::InvalidParameter("residual slices belong to different sectors".into()));
    }
    let step = at.y - below.y;
    if !(step > 0.0) || ((above.y - at.y) - step).abs() > 1e-12 * step.max(at.y.abs()) {
        return Err(ApwtError::InvalidParameter(format!(
            "slices must be equally spaced in y, got {}, {}, {}",
            below.y, at.y, above.y
        )));
    }
    let spectrum = |s: &FieldSlice| forward_fourier(&s.to_signal().expect("finite field")).into_values();
    let (lo, mid, hi) = (spectrum(below), spectrum(at), spectrum(above));
    let grid = at.grid;
    let mut residual = Array2::zeros(grid.shape());
    let mut reference = 0.0;
    Zip::indexed(&mut residual).and(&lo).and(&mid).and(&hi).for_each(|(p, q), r, &l, &m, &h| {
        let (k, kx) = (grid.sigma_t(p), grid.k_x(q));
        let u_tt = -k * k * m;
        let u_xx = -kx * kx * m;
        let u_yy = (h - 2.0 * m + l) / (step * step);
        *r = u_tt - u_xx - u_yy;
        reference += u_tt.norm_sqr();
    });
    Ok((residual, reference))
}

/// `‖u_tt - u_xx - u_yy‖ / ‖u_tt‖` at the middle of three equally spaced slices.
pub fn wave_residual(below: &FieldSlice, at: &FieldSlice, above: &FieldSlice) -> Result<f64> {
    let (residual, reference) = residual_spectra(below, at, above)?;
    let norm: f64 = residual.iter().map(|v| v.norm_sqr()).sum();
    Ok(if reference == 0.0 { norm.sqrt() } else { (norm / reference).sqrt() })
}

/// Residual of the wave equation under halving of the `y` step.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualStudy {
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `log₂` of the last residual ratio; 2 for a second-order difference.
    pub observed_order: f64,
    /// Relative norm of the Richardson-extrapolated residual `(4R(Δ/2) - R(Δ))/3`.
    pub extrapolated: f64,
}

/// Wave-equation residual of `spectrum_j` continued to `y`, for steps
/// `Δ, Δ/2, …` (`levels` of them), extrapolated to `Δ → 0`.
pub fn residual_convergence(spectrum_j: &Spectrum, sector: Sector, y: f64, step: f64, levels: usize) -> Result<ResidualStudy> {
    if levels < 2 || !(step > 0.0) {
        return Err(ApwtError::InvalidParameter("need at least two levels and a positive step".into()));
    }
    let at = field_slice(spectrum_j, sector, y)?;
    let mut steps = Vec::new();
    let mut residuals = Vec::new();
    let mut vectors = Vec::new();
    let mut reference = 0.0;
    for l in 0..levels {
        let h = step / 2f64.powi(l as i32);
        if y - h < 0.0 {
            return Err(ApwtError::InvalidParameter(format!("step {h} reaches below y = 0 from y = {y}")));
        }
        let below = field_slice(spectrum_j, sector, y - h)?;
        let above = field_slice(spectrum_j, sector, y + h)?;
        let (r, norm_ref) = residual_spectra(&below, &at, &above)?;
        reference = norm_ref;
        let norm: f64 = r.iter().map(|v| v.norm_sqr()).sum();
        steps.push(h);
        residuals.push(if norm_ref == 0.0 { norm.sqrt() } else { (norm / norm_ref).sqrt() });
        vectors.push(r);
    }
    let n = residuals.len();
    let observed_order = (residuals[n - 2] / residuals[n - 1]).log2();
    let richardson = (&vectors[n - 1] * Complex64::new(4.0, 0.0) - &vectors[n - 2]) / Complex64::new(3.0, 0.0);
    let norm: f64 = richardson.iter().map(|v| v.norm_sqr()).sum();
    let extrapolated = if reference == 0.0 { norm.sqrt() } else { (norm / reference).sqrt() };
    if residuals[n - 1] > 1e-8 && (observed_order - 2.0).abs() > 0.5 {
        return Err(ApwtError::Resolution(format!(
            "residuals {residuals:?} for steps {steps:?} do not show second-order decay (order {observed_order:.2})"
        )));
    }
    Ok(ResidualStudy { steps, residuals, observed_order, extrapolated })
}

/// `|u|²`-weighted centroid `(ct, x)` of a slice.
pub fn centroid(slice: &FieldSlice) -> (f64, f64) {
    let (mut st, mut sx, mut total) = (0.0, 0.0, 0.0);
    for ((m, n), v) in slice.values.indexed_iter() {
        let w = v.norm_sqr();
        st += w * slice.grid.ct(m);
        sx += w * slice.grid.x(n);
        total += w;
    }
    (st / total, sx / total)
}

/// `Σ |f̂|² e^{-2√(k_x²-k²) y} dσ / (2π)²` over the bins of an evanescent sector.
pub fn evanescent_energy(spectrum: &Spectrum, sector: Sector, y: f64) -> Result<f64> {
    if sector.is_propagating() {
        return Err(ApwtError::UnsupportedSector(sector, "energy decay applies to evanescent sectors"));
    }
    check_height(y)?;
    let grid = spectrum.grid();
    let mut acc = 0.0;
    for (_, _, sigma, v) in spectrum.bins() {
        if let Some(m) = symbol(sector, sigma.k, sigma.kx, y) {
            acc += v.norm_sqr() * m.norm_sqr();
        }
    }
    Ok(acc * grid.dual_cell_area() / (4.0 * PI * PI))
}
