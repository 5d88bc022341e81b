//! Forward transform, Plancherel check and reconstruction.
//!
//! Everything goes through the Fourier domain. For fixed `(a, φ)` the
//! coefficients over all grid shifts `b` form a slab
//!
//! ```text
//! F(b, a, φ) = (2π)⁻² Σ_σ f̂(σ) conj(ψ̂_{a,φ,0}(σ)) e^{i(σ,b)} dσ
//! ```
//!
//! which is one inverse FFT. The `b`-integral of `|F|²` follows from Parseval,
//! so the Plancherel ratio and the diagram never loop over `b`.

mod diagram;

pub use diagram::{
    detect_peaks, scale_rapidity_diagram, scale_rapidity_diagram_direct, scale_rapidity_diagram_spectrum, Diagram,
    DiagramConfig, FrequencyCalibration, Peak, PeakReport,
};

use std::f64::consts::PI;
use std::ops::Range;

use ndarray::{s, Array2, Array4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ApwtError, Result};
use crate::lattice::{forward_fourier, inverse_fourier, sector_mask, BoundarySignal, Grid2D, Sector, Spectrum};
use crate::wavelets::{AdmissibilityConstant, FamilyMember, MotherSpec, WaveletPoint};

/// Uniform rapidity samples `min, min + Δφ, …, max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiAxis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl PhiAxis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n == 0 || !min.is_finite() || !max.is_finite() || max < min || (n == 1) != (min == max) {
            return Err(ApwtError::InvalidParameter(format!("bad rapidity axis [{min}, {max}] with {n} points")));
        }
        Ok(Self { min, max, n })
    }

    /// `n` points with spacing `step` centred on `center`.
    pub fn centered(center: f64, half_width: f64, step: f64) -> Result<Self> {
        let half = (half_width / step).round() as usize;
        Self::new(center - half as f64 * step, center + half as f64 * step, 2 * half + 1)
    }

    pub fn step(&self) -> f64 {
        if self.n == 1 {
            1.0
        } else {
            (self.max - self.min) / (self.n - 1) as f64
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }
}

/// Log-uniform scale samples `a_i = min · r^i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleAxis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl ScaleAxis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n < 2 || !(min > 0.0) || !max.is_finite() || max <= min {
            return Err(ApwtError::InvalidParameter(format!("bad scale axis [{min}, {max}] with {n} points")));
        }
        Ok(Self { min, max, n })
    }

    /// `octaves` octaves centred (geometrically) on `center`, `per_octave` cells each.
    pub fn octaves(center: f64, octaves: f64, per_octave: usize) -> Result<Self> {
        let half = 2f64.powf(octaves / 2.0);
        Self::new(center / half, center * half, (octaves * per_octave as f64).round() as usize + 1)
    }

    pub fn ratio(&self) -> f64 {
        (self.max / self.min).powf(1.0 / (self.n - 1) as f64)
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min * self.ratio().powi(i as i32)
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }

    /// `∫ da/a³` over the log cell `[a_i r^-½, a_i r^½]`.
    pub fn cell_weight(&self, i: usize) -> f64 {
        let r = self.ratio();
        let a = self.value(i);
        0.5 * (r - 1.0 / r) / (a * a)
    }
}

/// Sampling of the `(φ, a)` part of `μ`; `b` always runs over the signal grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuSampling {
    pub phi: PhiAxis,
    pub scale: ScaleAxis,
}

impl MuSampling {
    /// `φ ∈ [-1.5, 1.5]` with 61 points, four octaves of `a` with 65 points.
    pub fn production(center_scale: f64) -> Result<Self> {
        Ok(Self { phi: PhiAxis::new(-1.5, 1.5, 61)?, scale: ScaleAxis::octaves(center_scale, 4.0, 16)? })
    }

    /// Coarse, production and fine sampling, in that order.
    pub fn refinement_ladder(center_scale: f64) -> Result<Vec<Self>> {
        Ok(vec![
            Self { phi: PhiAxis::new(-0.75, 0.75, 16)?, scale: ScaleAxis::octaves(center_scale, 2.0, 8)? },
            Self::production(center_scale)?,
            Self { phi: PhiAxis::new(-2.25, 2.25, 181)?, scale: ScaleAxis::octaves(center_scale, 6.0, 32)? },
        ])
    }

    /// Same axes with every `φ` shifted by `phi_center`.
    pub fn shifted(&self, phi_center: f64) -> Self {
        Self { phi: PhiAxis { min: self.phi.min + phi_center, max: self.phi.max + phi_center, n: self.phi.n }, ..*self }
    }

    pub fn len(&self) -> usize {
        self.phi.n * self.scale.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Δφ · ∫da/a³` for slab `(i_phi, i_a)`.
    pub fn weight(&self, _phi_index: usize, i_a: usize) -> f64 {
        self.phi.step() * self.scale.cell_weight(i_a)
    }
}

/// Scale at which the mother centre meets the energy-weighted Minkowski
/// radius of the signal's sector-`j` spectrum, and the matching rapidity.
pub fn dominant_parameters(spectrum: &Spectrum, spec: &MotherSpec) -> Result<(f64, f64)> {
    let (mut w_sum, mut log_rho, mut angle) = (0.0, 0.0, 0.0);
    for (_, _, sigma, v) in spectrum.bins() {
        if !spec.sector.contains(sigma) {
            continue;
        }
        let w = v.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let h = crate::geometry::hyperbolic_coords(sigma)?;
        w_sum += w;
        log_rho += w * h.rho.ln();
        angle += w * h.phi0;
    }
    if w_sum == 0.0 {
        return Err(ApwtError::Degenerate(format!("no energy in sector {}", spec.sector)));
    }
    Ok((spec.kappa / (log_rho / w_sum).exp(), angle / w_sum))
}

/// `(2π)⁻²`.
const INV_TWO_PI_SQ: f64 = 1.0 / (4.0 * PI * PI);

/// Index range of a centered dual axis covering `[lo, hi]`.
fn dual_range(lo: f64, hi: f64, n: usize, spacing: f64) -> Range<usize> {
    let half = (n / 2) as f64;
    let first = (lo / spacing + half).ceil().max(0.0);
    let last = (hi / spacing + half).floor().min(n as f64 - 1.0);
    if last < first {
        0..0
    } else {
        first as usize..last as usize + 1
    }
}

/// Bins of `grid`'s dual lattice inside the numerical support of `member`.
pub(crate) fn support_bins(grid: &Grid2D, member: &FamilyMember) -> (Range<usize>, Range<usize>) {
    let ((k_lo, k_hi), (x_lo, x_hi)) = member.support_box();
    let (ds, dk) = grid.dual_spacing();
    (dual_range(k_lo, k_hi, grid.n_t, ds), dual_range(x_lo, x_hi, grid.n_x, dk))
}

fn check_scale(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(ApwtError::InvalidParameter(format!("scale must be positive, got {a}")))
    }
}

/// `F_j(μ) = (2π)⁻² Σ f̂ conj(ψ̂_μ) dσ`.
pub fn apwt_point(f: &BoundarySignal, spec: &MotherSpec, mu: &WaveletPoint) -> Result<Complex64> {
    apwt_point_spectrum(&forward_fourier(f), spec, mu)
}

pub fn apwt_point_spectrum(fhat: &Spectrum, spec: &MotherSpec, mu: &WaveletPoint) -> Result<Complex64> {
    let mu = WaveletPoint::new(mu.b, mu.a, mu.phi)?;
    let member = FamilyMember::new(spec, mu.a, mu.phi);
    let grid = fhat.grid();
    let (rows, cols) = support_bins(grid, &member);
    let mut acc = Complex64::new(0.0, 0.0);
    for p in rows {
        for q in cols.clone() {
            let sigma = grid.wavevector(p, q);
            let psi = member.value(sigma, 0.0) * Complex64::from_polar(1.0, -sigma.pair(mu.b));
            acc += fhat.values()[[p, q]] * psi.conj();
        }
    }
    Ok(acc * grid.dual_cell_area() * INV_TWO_PI_SQ)
}

/// `f̂ · conj(ψ̂_{a,φ,0})` restricted to the wavelet support.
fn slab_spectrum(fhat: &Spectrum, member: &FamilyMember) -> Spectrum {
    let grid = fhat.grid();
    let (rows, cols) = support_bins(grid, member);
    let mut out = Array2::zeros(grid.shape());
    for p in rows {
        for q in cols.clone() {
            out[[p, q]] = fhat.values()[[p, q]] * member.value(grid.wavevector(p, q), 0.0);
        }
    }
    // member.value is real at y = 0, so it equals its conjugate
    Spectrum::new(*grid, out).expect("product of finite spectra")
}

/// `F_j(b, a, φ)` for every `b` on the signal grid.
pub fn apwt_slab(f: &BoundarySignal, spec: &MotherSpec, a: f64, phi: f64) -> Result<Array2<Complex64>> {
    apwt_slab_spectrum(&forward_fourier(f), spec, a, phi)
}

pub fn apwt_slab_spectrum(fhat: &Spectrum, spec: &MotherSpec, a: f64, phi: f64) -> Result<Array2<Complex64>> {
    check_scale(a)?;
    if !phi.is_finite() {
        return Err(ApwtError::InvalidParameter(format!("rapidity must be finite, got {phi}")));
    }
    let member = FamilyMember::new(spec, a, phi);
    Ok(inverse_fourier(&slab_spectrum(fhat, &member)).into_values())
}

/// `(2π)⁻² Σ |f̂|² |ψ̂_{a,φ}|² dσ = ∫ d²b |F(b, a, φ)|²`.
pub(crate) fn slab_energy(fhat: &Spectrum, member: &FamilyMember) -> f64 {
    let grid = fhat.grid();
    let (rows, cols) = support_bins(grid, member);
    let mut acc = 0.0;
    for p in rows {
        for q in cols.clone() {
            let m = member.magnitude(grid.wavevector(p, q));
            if m != 0.0 {
                acc += fhat.values()[[p, q]].norm_sqr() * m * m;
            }
        }
    }
    acc * grid.dual_cell_area() * INV_TWO_PI_SQ
}

/// `F_j(φ, a, cτ, b_x)` on a `(φ, a)` lattice and the full signal grid of shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientGrid {
    pub sector: Sector,
    pub sampling: MuSampling,
    pub b_grid: Grid2D,
    /// Indexed `[φ][a][cτ][b_x]`.
    pub values: Array4<Complex64>,
    pub mother: MotherSpec,
}

impl CoefficientGrid {
    pub fn new(mother: MotherSpec, sampling: MuSampling, b_grid: Grid2D, values: Array4<Complex64>) -> Result<Self> {
        let expected = (sampling.phi.n, sampling.scale.n, b_grid.n_t, b_grid.n_x);
        if values.dim() != expected {
            return Err(ApwtError::GridMismatch(format!(
                "coefficient array {:?} does not match sampling {:?}",
                values.dim(),
                expected
            )));
        }
        Ok(Self { sector: mother.sector, sampling, b_grid, values, mother })
    }

    pub fn phi_axis(&self) -> Vec<f64> {
        self.sampling.phi.values()
    }

    pub fn a_axis(&self) -> Vec<f64> {
        self.sampling.scale.values()
    }

    pub fn zeros(mother: MotherSpec, sampling: MuSampling, b_grid: Grid2D) -> Self {
        let values = Array4::zeros((sampling.phi.n, sampling.scale.n, b_grid.n_t, b_grid.n_x));
        Self { sector: mother.sector, sampling, b_grid, values, mother }
    }
}

fn slab_indices(sampling: &MuSampling) -> Vec<(usize, usize)> {
    (0..sampling.phi.n).flat_map(|i| (0..sampling.scale.n).map(move |j| (i, j))).collect()
}

/// Slabs for every `(φ, a)` of `sampling`.
pub fn apwt_grid(f: &BoundarySignal, spec: &MotherSpec, sampling: &MuSampling) -> Result<CoefficientGrid> {
    let fhat = forward_fourier(f);
    let mut grid = CoefficientGrid::zeros(*spec, *sampling, *f.grid());
    let slabs: Vec<_> = slab_indices(sampling)
        .into_par_iter()
        .map(|(i, j)| {
            let member = FamilyMember::new(spec, sampling.scale.value(j), sampling.phi.value(i));
            (i, j, inverse_fourier(&slab_spectrum(&fhat, &member)).into_values())
        })
        .collect();
    for (i, j, slab) in slabs {
        grid.values.slice_mut(s![i, j, .., ..]).assign(&slab);
    }
    Ok(grid)
}

/// Outcome of one Plancherel evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlancherelReport {
    /// `∫dφ ∫da/a³ ∫d²b |F_j|²`.
    pub numerator: f64,
    /// `‖f_j‖²`.
    pub sector_norm_sq: f64,
    pub admissibility: f64,
    pub ratio: f64,
}

fn check_constant(spec: &MotherSpec, c: &AdmissibilityConstant) -> Result<()> {
    if c.sector != spec.sector {
        return Err(ApwtError::InvalidParameter(format!(
            "admissibility constant is for {}, mother is {}",
            c.sector, spec.sector
        )));
    }
    if !(c.value > 0.0 && c.value.is_finite()) {
        return Err(ApwtError::InvalidParameter(format!("admissibility constant must be positive, got {}", c.value)));
    }
    Ok(())
}

pub fn plancherel_check(
    f: &BoundarySignal,
    spec: &MotherSpec,
    sampling: &MuSampling,
    c: &AdmissibilityConstant,
) -> Result<PlancherelReport> {
    plancherel_check_spectrum(&forward_fourier(f), spec, sampling, c)
}

pub fn plancherel_check_spectrum(
    fhat: &Spectrum,
    spec: &MotherSpec,
    sampling: &MuSampling,
    c: &AdmissibilityConstant,
) -> Result<PlancherelReport> {
    check_constant(spec, c)?;
    let sector_norm_sq = sector_mask(fhat, spec.sector).norm_sq() * INV_TWO_PI_SQ;
    // below this the sector content is FFT round-off from other sectors
    if sector_norm_sq <= 1e-24 * fhat.norm_sq() * INV_TWO_PI_SQ {
        return Err(ApwtError::Degenerate(format!("signal has no energy in sector {}", spec.sector)));
    }
    let terms: Vec<f64> = slab_indices(sampling)
        .into_par_iter()
        .map(|(i, j)| {
            let member = FamilyMember::new(spec, sampling.scale.value(j), sampling.phi.value(i));
            sampling.weight(i, j) * slab_energy(fhat, &member)
        })
        .collect();
    let numerator: f64 = terms.iter().sum();
    Ok(PlancherelReport {
        numerator,
        sector_norm_sq,
        admissibility: c.value,
        ratio: numerator / (c.value * sector_norm_sq),
    })
}

/// Plancherel ratios along a refinement ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlancherelStudy {
    pub reports: Vec<PlancherelReport>,
    /// `|ratio - 1|` never grows along the ladder.
    pub monotone: bool,
}

impl PlancherelStudy {
    pub fn deviations(&self) -> Vec<f64> {
        self.reports.iter().map(|r| (r.ratio - 1.0).abs()).collect()
    }
}

pub fn plancherel_study(
    f: &BoundarySignal,
    spec: &MotherSpec,
    ladder: &[MuSampling],
    c: &AdmissibilityConstant,
) -> Result<PlancherelStudy> {
    let fhat = forward_fourier(f);
    let reports = ladder
        .iter()
        .map(|s| plancherel_check_spectrum(&fhat, spec, s, c))
        .collect::<Result<Vec<_>>>()?;
    let dev: Vec<f64> = reports.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    // 1e-12 slack: once the plateau is reached, round-off may reorder equal deviations
    let monotone = dev.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    if !monotone {
        log::warn!("Plancherel ratio is not converging monotonically: {dev:?}");
    }
    Ok(PlancherelStudy { reports, monotone })
}

fn check_height(spec: &MotherSpec, y: f64) -> Result<()> {
    if !y.is_finite() || (y < 0.0 && !spec.sector.is_propagating()) {
        return Err(ApwtError::InvalidParameter(format!("height {y} is not allowed for sector {}", spec.sector)));
    }
    Ok(())
}

/// Accumulates `Σ w F̂_{aφ}(σ) Ψ̂_{aφ0}(σ; y)` in slab chunks of fixed size so
/// that the summation order does not depend on the thread count.
fn accumulate_slabs(
    grid: &Grid2D,
    sampling: &MuSampling,
    spec: &MotherSpec,
    y: f64,
    slab: impl Fn(usize, usize, &FamilyMember) -> Array2<Complex64> + Sync,
) -> Array2<Complex64> {
    const CHUNK: usize = 16;
    let mut total = Array2::<Complex64>::zeros(grid.shape());
    for chunk in slab_indices(sampling).chunks(CHUNK) {
        let parts: Vec<Array2<Complex64>> = chunk
            .par_iter()
            .map(|&(i, j)| {
                let member = FamilyMember::new(spec, sampling.scale.value(j), sampling.phi.value(i));
                let coeff = BoundarySignal::new(*grid, slab(i, j, &member)).expect("finite coefficients");
                let spectrum = forward_fourier(&coeff).into_values();
                let w = sampling.weight(i, j);
                let (rows, cols) = support_bins(grid, &member);
                let mut out = Array2::zeros(grid.shape());
                for p in rows {
                    for q in cols.clone() {
                        out[[p, q]] = spectrum[[p, q]] * member.value(grid.wavevector(p, q), y) * w;
                    }
                }
                out
            })
            .collect();
        for part in parts {
            total += &part;
        }
    }
    total
}

/// `u_j(χ, y) = C_j⁻¹ Σ_μ Δμ F_j(μ) Ψ_{jμ}(χ, y)`, assembled per slab in the
/// Fourier domain.
pub fn reconstruct(
    coeffs: &CoefficientGrid,
    spec: &MotherSpec,
    c: &AdmissibilityConstant,
    y: f64,
    out_grid: &Grid2D,
) -> Result<BoundarySignal> {
    if coeffs.mother != *spec {
        return Err(ApwtError::InvalidParameter("coefficients were computed with a different mother".into()));
    }
    check_constant(spec, c)?;
    check_height(spec, y)?;
    if !out_grid.same_as(&coeffs.b_grid) {
        return Err(ApwtError::GridMismatch("output grid must equal the coefficient shift grid".into()));
    }
    let total = accumulate_slabs(out_grid, &coeffs.sampling, spec, y, |i, j, _| {
        coeffs.values.slice(s![i, j, .., ..]).to_owned()
    });
    finish(out_grid, total, c)
}

/// [`reconstruct`] without storing the coefficient grid: each slab is
/// computed from `f` and folded in immediately.
pub fn reconstruct_streaming(
    f: &BoundarySignal,
    spec: &MotherSpec,
    sampling: &MuSampling,
    c: &AdmissibilityConstant,
    y: f64,
) -> Result<BoundarySignal> {
    check_constant(spec, c)?;
    check_height(spec, y)?;
    let fhat = forward_fourier(f);
    let total = accumulate_slabs(f.grid(), sampling, spec, y, |_, _, member| {
        inverse_fourier(&slab_spectrum(&fhat, member)).into_values()
    });
    finish(f.grid(), total, c)
}

fn finish(grid: &Grid2D, mut total: Array2<Complex64>, c: &AdmissibilityConstant) -> Result<BoundarySignal> {
    total.mapv_inplace(|v| v / c.value);
    Ok(inverse_fourier(&Spectrum::new(*grid, total)?))
}
