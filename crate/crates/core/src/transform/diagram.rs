//! Scale-rapidity diagram `S(a, φ) = a⁻³ ∫ d²b |F(b, a, φ)|²` and its peaks.

use std::cmp::Ordering;
use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apwt_slab_spectrum, check_scale, slab_energy, PhiAxis, ScaleAxis};
use crate::error::{ApwtError, Result};
use crate::lattice::{forward_fourier, BoundarySignal, Spectrum};
use crate::wavelets::{FamilyMember, MotherSpec};

/// `S(a, φ)` sampled on `a_axis × phi_axis`; `values[[i, j]]` belongs to
/// `(a_axis[i], phi_axis[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    pub a_axis: Vec<f64>,
    pub phi_axis: Vec<f64>,
    pub values: Array2<f64>,
}

impl Diagram {
    pub fn new(a_axis: Vec<f64>, phi_axis: Vec<f64>, values: Array2<f64>) -> Result<Self> {
        check_axes(&a_axis, &phi_axis)?;
        if values.dim() != (a_axis.len(), phi_axis.len()) {
            return Err(ApwtError::GridMismatch(format!(
                "diagram values {:?} do not match axes ({}, {})",
                values.dim(),
                a_axis.len(),
                phi_axis.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ApwtError::InvalidParameter("diagram values must be finite and nonnegative".into()));
        }
        Ok(Self { a_axis, phi_axis, values })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Grid indices of the largest value (first in raster order on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for ((i, j), v) in self.values.indexed_iter() {
            if *v > self.values[best] {
                best = (i, j);
            }
        }
        best
    }

    /// Columns `a, phi, S`, one row per sample, `a` varying slowest.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "a,phi,S")?;
        for ((i, j), v) in self.values.indexed_iter() {
            writeln!(w, "{:e},{:e},{:e}", self.a_axis[i], self.phi_axis[j], v)?;
        }
        Ok(())
    }
}

fn check_axes(a_axis: &[f64], phi_axis: &[f64]) -> Result<()> {
    if a_axis.is_empty() || phi_axis.is_empty() {
        return Err(ApwtError::InvalidParameter("diagram axes must not be empty".into()));
    }
    for &a in a_axis {
        check_scale(a)?;
    }
    if phi_axis.iter().any(|p| !p.is_finite()) {
        return Err(ApwtError::InvalidParameter("rapidity axis must be finite".into()));
    }
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    if !increasing(a_axis) || !increasing(phi_axis) {
        return Err(ApwtError::InvalidParameter("diagram axes must be strictly increasing".into()));
    }
    Ok(())
}

fn check_sector(spec: &MotherSpec) -> Result<()> {
    if spec.sector.is_propagating() {
        Ok(())
    } else {
        Err(ApwtError::UnsupportedSector(spec.sector, "diagrams are defined for the propagating sectors only"))
    }
}

/// Fast path: `S = a⁻³ (2π)⁻² Σ |f̂|² |a ψ̂(aΛσ)|² dσ`.
pub fn scale_rapidity_diagram(f: &BoundarySignal, spec: &MotherSpec, a_axis: &[f64], phi_axis: &[f64]) -> Result<Diagram> {
    scale_rapidity_diagram_spectrum(&forward_fourier(f), spec, a_axis, phi_axis)
}

pub fn scale_rapidity_diagram_spectrum(
    fhat: &Spectrum,
    spec: &MotherSpec,
    a_axis: &[f64],
    phi_axis: &[f64],
) -> Result<Diagram> {
    check_sector(spec)?;
    check_axes(a_axis, phi_axis)?;
    let n_phi = phi_axis.len();
    let values: Vec<f64> = (0..a_axis.len() * n_phi)
        .into_par_iter()
        .map(|idx| {
            let (a, phi) = (a_axis[idx / n_phi], phi_axis[idx % n_phi]);
            slab_energy(fhat, &FamilyMember::new(spec, a, phi)) / (a * a * a)
        })
        .collect();
    Diagram::new(a_axis.to_vec(), phi_axis.to_vec(), Array2::from_shape_vec((a_axis.len(), n_phi), values).expect("shape"))
}

/// Slow path: explicit slabs and a sum over all grid shifts `b`.
pub fn scale_rapidity_diagram_direct(
    f: &BoundarySignal,
    spec: &MotherSpec,
    a_axis: &[f64],
    phi_axis: &[f64],
) -> Result<Diagram> {
    check_sector(spec)?;
    check_axes(a_axis, phi_axis)?;
    let fhat = forward_fourier(f);
    let area = f.grid().cell_area();
    let mut values = Array2::zeros((a_axis.len(), phi_axis.len()));
    for (i, &a) in a_axis.iter().enumerate() {
        for (j, &phi) in phi_axis.iter().enumerate() {
            let slab = apwt_slab_spectrum(&fhat, spec, a, phi)?;
            values[[i, j]] = slab.iter().map(|v| v.norm_sqr()).sum::<f64>() * area / (a * a * a);
        }
    }
    Diagram::new(a_axis.to_vec(), phi_axis.to_vec(), values)
}

/// Map from diagram scale to source frequency, `ω = c κ_eff / a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCalibration {
    pub kappa_eff: f64,
    pub c: f64,
}

impl FrequencyCalibration {
    /// Uncalibrated map `ω = c κ / a`: the boosted mother centre `a⁻¹Λ_φ(κ, 0)`.
    pub fn nominal(spec: &MotherSpec, c: f64) -> Self {
        Self { kappa_eff: spec.kappa, c }
    }

    pub fn omega(&self, a: f64) -> f64 {
        self.c * self.kappa_eff / a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub a: f64,
    pub phi: f64,
    /// Diagram sample at the grid maximum.
    pub height: f64,
    pub omega: f64,
    pub v_over_c: f64,
    pub a_index: usize,
    pub phi_index: usize,
    /// The grid maximum lies on the diagram boundary; no sub-grid refinement there.
    pub on_edge: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    /// Fewer local maxima than requested.
    pub truncated: bool,
}

fn is_local_max(values: &Array2<f64>, i: usize, j: usize) -> bool {
    let (n_a, n_p) = values.dim();
    let v = values[[i, j]];
    if !(v > 0.0) {
        return false;
    }
    for di in -1i64..=1 {
        for dj in -1i64..=1 {
            if di == 0 && dj == 0 {
                continue;
            }
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni >= n_a as i64 || nj >= n_p as i64 {
                continue;
            }
            let w = values[[ni as usize, nj as usize]];
            // on plateaus only the first sample in raster order survives
            if w > v || (w == v && (di < 0 || (di == 0 && dj < 0))) {
                return false;
            }
        }
    }
    true
}

/// Stationary point of the least-squares quadric through a 3×3 stencil, in
/// index offsets; `None` if the fit is not a proper maximum.
fn quadratic_offset(z: &[[f64; 3]; 3]) -> Option<(f64, f64)> {
    let (mut s_u, mut s_v, mut s_uv, mut edge_u, mut mid_u, mut edge_v, mut mid_v) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (iu, row) in z.iter().enumerate() {
        for (iv, &val) in row.iter().enumerate() {
            let (u, v) = (iu as f64 - 1.0, iv as f64 - 1.0);
            s_u += u * val;
            s_v += v * val;
            s_uv += u * v * val;
            if iu == 1 { mid_u += val } else { edge_u += val }
            if iv == 1 { mid_v += val } else { edge_v += val }
        }
    }
    let (c1, c2, c4) = (s_u / 6.0, s_v / 6.0, s_uv / 4.0);
    let c3 = edge_u / 6.0 - mid_u / 3.0;
    let c5 = edge_v / 6.0 - mid_v / 3.0;
    let (h11, h12, h22) = (2.0 * c3, c4, 2.0 * c5);
    let det = h11 * h22 - h12 * h12;
    if !(h11 < 0.0 && det > 0.0) {
        return None;
    }
    let u = (-c1 * h22 + c2 * h12) / det;
    let v = (-c2 * h11 + c1 * h12) / det;
    (u.abs() <= 1.0 && v.abs() <= 1.0).then_some((u, v))
}

/// Sample position `index + offset` on an axis, interpolating in `ln` for
/// the scale axis.
fn interpolate(axis: &[f64], index: usize, offset: f64, log: bool) -> f64 {
    let map = |x: f64| if log { x.ln() } else { x };
    let unmap = |x: f64| if log { x.exp() } else { x };
    let other = if offset >= 0.0 { index + 1 } else { index - 1 };
    let (x0, x1) = (map(axis[index]), map(axis[other]));
    unmap(x0 + offset.abs() * (x1 - x0))
}

/// Local maxima of `d` (8-neighbourhood), highest first, ties broken by
/// `(a, φ)`; positions refined by a 3×3 quadratic fit.
pub fn detect_peaks(d: &Diagram, count: usize, calibration: &FrequencyCalibration) -> Result<PeakReport> {
    if count == 0 {
        return Err(ApwtError::InvalidParameter("peak count must be at least 1".into()));
    }
    let (n_a, n_p) = d.values.dim();
    let mut peaks = Vec::new();
    for i in 0..n_a {
        for j in 0..n_p {
            if !is_local_max(&d.values, i, j) {
                continue;
            }
            let on_edge = i == 0 || j == 0 || i + 1 == n_a || j + 1 == n_p;
            let (mut a, mut phi) = (d.a_axis[i], d.phi_axis[j]);
            if !on_edge {
                let mut z = [[0.0; 3]; 3];
                for (u, row) in z.iter_mut().enumerate() {
                    for (v, val) in row.iter_mut().enumerate() {
                        *val = d.values[[i + u - 1, j + v - 1]];
                    }
                }
                if let Some((du, dv)) = quadratic_offset(&z) {
                    a = interpolate(&d.a_axis, i, du, true);
                    phi = interpolate(&d.phi_axis, j, dv, false);
                }
            }
            peaks.push(Peak {
                a,
                phi,
                height: d.values[[i, j]],
                omega: calibration.omega(a),
                v_over_c: phi.tanh(),
                a_index: i,
                phi_index: j,
                on_edge,
            });
        }
    }
    peaks.sort_by(|p, q| {
        q.height
            .partial_cmp(&p.height)
            .unwrap_or(Ordering::Equal)
            .then(p.a.total_cmp(&q.a))
            .then(p.phi.total_cmp(&q.phi))
    });
    let truncated = peaks.len() < count;
    peaks.truncate(count);
    Ok(PeakReport { peaks, truncated })
}

/// Axes, wavelet and peak selection for a diagram run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramConfig {
    pub mother: MotherSpec,
    pub scale: ScaleAxis,
    pub phi: PhiAxis,
    /// Upper bound on reported maxima.
    #[serde(default = "default_max_peaks")]
    pub max_peaks: usize,
    /// A maximum is dominant if it reaches this fraction of the highest one.
    #[serde(default = "default_dominance")]
    pub dominance: f64,
}

fn default_max_peaks() -> usize {
    16
}

fn default_dominance() -> f64 {
    0.1
}

impl DiagramConfig {
    /// `κ = 4, σ∥ = 2√55, σ⊥ = 8`; `a ∈ [3, 6]` (one octave, 160 cells) and
    /// `φ ∈ [-0.2, 1.2]` in steps of 0.01.
    pub fn moving_source() -> Self {
        Self {
            mother: MotherSpec::moving_source_default(),
            scale: ScaleAxis { min: 3.0, max: 6.0, n: 161 },
            phi: PhiAxis { min: -0.2, max: 1.2, n: 141 },
            max_peaks: default_max_peaks(),
            dominance: default_dominance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_sector(&self.mother)?;
        ScaleAxis::new(self.scale.min, self.scale.max, self.scale.n)?;
        PhiAxis::new(self.phi.min, self.phi.max, self.phi.n)?;
        if self.max_peaks == 0 {
            return Err(ApwtError::InvalidParameter("max_peaks must be at least 1".into()));
        }
        if !(self.dominance > 0.0 && self.dominance <= 1.0) {
            return Err(ApwtError::InvalidParameter(format!("dominance must lie in (0, 1], got {}", self.dominance)));
        }
        Ok(())
    }

    pub fn diagram(&self, fhat: &Spectrum) -> Result<Diagram> {
        self.validate()?;
        scale_rapidity_diagram_spectrum(fhat, &self.mother, &self.scale.values(), &self.phi.values())
    }

    /// Maxima that reach `dominance` times the highest one.
    pub fn dominant_peaks(&self, d: &Diagram, calibration: &FrequencyCalibration) -> Result<Vec<Peak>> {
        if d.max() <= 0.0 {
            return Ok(Vec::new());
        }
        let report = detect_peaks(d, self.max_peaks, calibration)?;
        let top = report.peaks.first().map_or(0.0, |p| p.height);
        Ok(report.peaks.into_iter().filter(|p| p.height >= self.dominance * top).collect())
    }
}
