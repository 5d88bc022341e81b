//! Gaussian-packet mother solutions, the wavelet family and admissibility constants.
//!
//! The sector-1 mother solution has the boundary spectrum
//!
//! ```text
//! Ψ̂₁(σ; y) = (k/k_y) exp(-σ∥²(k_y-κ)²/2 - σ⊥²k_x²/2 - 1/k_y) e^{i k_y y},   k_y = √(k² - k_x²)
//! ```
//!
//! for `σ = (k, k_x) ∈ D1` and zero elsewhere. Sector 3 swaps the roles of `k`
//! and `k_x` and decays as `e^{-√(k_x²-k²) y}`. Sectors 2 and 4 are the mirror
//! images `ω ↦ -ω` and `k_x ↦ -k_x`. The factor `exp(-1/k_y)` is always
//! applied: it makes the admissibility integral finite near the light cone.
//!
//! Spectral values are the source of truth. Coordinate-domain values come from
//! FFTs of these spectra (see [`time_slice`]).

use std::f64::consts::PI;

use log::warn;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ApwtError, Result};
use crate::fft::{synthesise_axis, KernelSign};
use crate::geometry::{boost_scale_unchecked, Event, HyperbolicPoint, Wavevector};
use crate::lattice::{Grid2D, Sector};

/// `(sector, κ, σ∥, σ⊥)` of a Gaussian-packet mother solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MotherSpecFields")]
pub struct MotherSpec {
    pub sector: Sector,
    pub kappa: f64,
    pub sigma_par: f64,
    pub sigma_perp: f64,
}

#[derive(Deserialize)]
struct MotherSpecFields {
    sector: Sector,
    kappa: f64,
    sigma_par: f64,
    sigma_perp: f64,
}

impl TryFrom<MotherSpecFields> for MotherSpec {
    type Error = ApwtError;

    fn try_from(f: MotherSpecFields) -> Result<Self> {
        MotherSpec::new(f.sector, f.kappa, f.sigma_par, f.sigma_perp)
    }
}

impl MotherSpec {
    pub fn new(sector: Sector, kappa: f64, sigma_par: f64, sigma_perp: f64) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("sigma_par", sigma_par), ("sigma_perp", sigma_perp)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ApwtError::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let spec = Self { sector, kappa, sigma_par, sigma_perp };
        if kappa * sigma_par <= 2.0 {
            warn!(
                "mother packet is poorly localised: kappa*sigma_par = {:.3} <= 2 (p = {:.3})",
                kappa * sigma_par,
                spec.localization_quality()
            );
        }
        Ok(spec)
    }

    /// Wavelet of the moving-source analysis: `κ = 4, σ∥ = 2√55, σ⊥ = 8`.
    pub fn moving_source_default() -> Self {
        Self { sector: Sector::D1, kappa: 4.0, sigma_par: 2.0 * 55f64.sqrt(), sigma_perp: 8.0 }
    }

    /// `p = (κσ∥)²`.
    pub fn localization_quality(&self) -> f64 {
        (self.kappa * self.sigma_par).powi(2)
    }

    pub fn with_sector(&self, sector: Sector) -> Self {
        Self { sector, ..*self }
    }

    /// Splits `σ` into the coordinate along the sector axis and the one across
    /// it; `None` outside the open sector.
    #[inline]
    fn cone_frame(&self, sigma: Wavevector) -> Option<(f64, f64)> {
        let (k, kx) = (sigma.k, sigma.kx);
        let (along, across) = match self.sector {
            Sector::D1 => (k, kx),
            Sector::D2 => (-k, kx),
            Sector::D3 => (kx, k),
            Sector::D4 => (-kx, k),
        };
        (along > across.abs()).then_some((along, across))
    }

    /// Modulus of the packet and `q = √(along² - across²)` (the `k_y` of the
    /// propagating sectors, the decay rate of the evanescent ones).
    #[inline]
    fn amplitude(&self, along: f64, across: f64, regularized: bool) -> (f64, f64) {
        let q = ((along - across) * (along + across)).sqrt();
        let d = q - self.kappa;
        let mut expo = -0.5 * ((self.sigma_par * d).powi(2) + (self.sigma_perp * across).powi(2));
        if regularized {
            expo -= 1.0 / q;
        }
        if expo < -745.0 || q == 0.0 {
            return (0.0, q);
        }
        (along / q * expo.exp(), q)
    }

    /// `|ψ̂(σ)|` at `y = 0`; exactly zero outside the sector.
    #[inline]
    pub(crate) fn magnitude(&self, sigma: Wavevector) -> f64 {
        match self.cone_frame(sigma) {
            Some((along, across)) => self.amplitude(along, across, true).0,
            None => 0.0,
        }
    }

    #[inline]
    pub(crate) fn value_unchecked(&self, sigma: Wavevector, y: f64) -> Complex64 {
        let Some((along, across)) = self.cone_frame(sigma) else {
            return Complex64::new(0.0, 0.0);
        };
        let (amp, q) = self.amplitude(along, across, true);
        if amp == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if y == 0.0 {
            return Complex64::new(amp, 0.0);
        }
        if self.sector.is_propagating() {
            Complex64::from_polar(amp, q * y)
        } else {
            Complex64::new(amp * (-q * y).exp(), 0.0)
        }
    }
}

fn check_height(spec: &MotherSpec, y: f64) -> Result<()> {
    if !y.is_finite() {
        return Err(ApwtError::InvalidParameter(format!("height must be finite, got {y}")));
    }
    if y < 0.0 && !spec.sector.is_propagating() {
        return Err(ApwtError::InvalidParameter(format!(
            "evanescent sector {} grows exponentially for y < 0 (y = {y})",
            spec.sector
        )));
    }
    Ok(())
}

/// Mother spectrum `Ψ̂_j(σ; y)`.
pub fn mother_hat(spec: &MotherSpec, sigma: Wavevector, y: f64) -> Result<Complex64> {
    check_height(spec, y)?;
    Ok(spec.value_unchecked(sigma, y))
}

/// Family parameters `μ = {b, a, φ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletPoint {
    pub b: Event,
    pub a: f64,
    pub phi: f64,
}

impl WaveletPoint {
    pub fn new(b: Event, a: f64, phi: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(ApwtError::InvalidParameter(format!("scale must be positive, got {a}")));
        }
        if !(phi.is_finite() && b.ct.is_finite() && b.x.is_finite()) {
            return Err(ApwtError::InvalidParameter("wavelet point must be finite".into()));
        }
        Ok(Self { b, a, phi })
    }

    pub fn identity() -> Self {
        Self { b: Event::default(), a: 1.0, phi: 0.0 }
    }
}

/// Precomputed `(a, cosh φ, sinh φ)` for evaluating one family member on many bins.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FamilyMember {
    spec: MotherSpec,
    a: f64,
    ch: f64,
    sh: f64,
}

impl FamilyMember {
    pub fn new(spec: &MotherSpec, a: f64, phi: f64) -> Self {
        Self { spec: *spec, a, ch: phi.cosh(), sh: phi.sinh() }
    }

    /// `a ψ̂(a Λ_φ σ)` at `y = 0` and `b = 0`.
    #[inline]
    pub fn magnitude(&self, sigma: Wavevector) -> f64 {
        self.a * self.spec.magnitude(boost_scale_unchecked(sigma, self.a, self.ch, self.sh))
    }

    /// `a Ψ̂(a Λ_φ σ; y/a)` with `b = 0`.
    #[inline]
    pub fn value(&self, sigma: Wavevector, y: f64) -> Complex64 {
        self.spec.value_unchecked(boost_scale_unchecked(sigma, self.a, self.ch, self.sh), y / self.a) * self.a
    }

    /// Bounding box `((k_lo, k_hi), (kx_lo, kx_hi))` outside which `|ψ̂_μ|²`
    /// is below `e^-81` of its peak.
    pub fn support_box(&self) -> ((f64, f64), (f64, f64)) {
        let s = &self.spec;
        let q_lo = (s.kappa - SUPPORT_WIDTH / s.sigma_par).max(0.0);
        let q_hi = s.kappa + SUPPORT_WIDTH / s.sigma_par;
        let across = SUPPORT_WIDTH / s.sigma_perp;
        let along_hi = q_hi.hypot(across);
        let mut k = (f64::INFINITY, f64::NEG_INFINITY);
        let mut kx = (f64::INFINITY, f64::NEG_INFINITY);
        for along in [q_lo, along_hi] {
            for t in [-across, across] {
                let rest = match s.sector {
                    Sector::D1 => Wavevector::new(along, t),
                    Sector::D2 => Wavevector::new(-along, t),
                    Sector::D3 => Wavevector::new(t, along),
                    Sector::D4 => Wavevector::new(t, -along),
                };
                // σ = a⁻¹ Λ_φ⁻¹ σ'
                let sk = (self.ch * rest.k + self.sh * rest.kx) / self.a;
                let sx = (self.sh * rest.k + self.ch * rest.kx) / self.a;
                k = (k.0.min(sk), k.1.max(sk));
                kx = (kx.0.min(sx), kx.1.max(sx));
            }
        }
        (k, kx)
    }
}

const SUPPORT_WIDTH: f64 = 9.0;

/// Spectrum of family member `μ`: `a Ψ̂(a Λ_φ σ; y/a) e^{-i(σ, b)}`.
pub fn family_hat(spec: &MotherSpec, mu: &WaveletPoint, sigma: Wavevector, y: f64) -> Result<Complex64> {
    check_height(spec, y)?;
    if !(mu.a > 0.0) {
        return Err(ApwtError::InvalidParameter(format!("scale must be positive, got {}", mu.a)));
    }
    let base = FamilyMember::new(spec, mu.a, mu.phi).value(sigma, y);
    Ok(base * Complex64::from_polar(1.0, -sigma.pair(mu.b)))
}

/// Controls the tensor trapezoid rule used for admissibility constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureControl {
    pub rho_nodes: usize,
    pub angle_nodes: usize,
    pub max_doublings: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureControl {
    fn default() -> Self {
        Self { rho_nodes: 48, angle_nodes: 48, max_doublings: 6, rel_tol: 1e-11 }
    }
}

/// `C_j = ∫_{D_j} |ψ̂_j(σ)|² / |(ω/c)² - k_x²| d²σ` with its quadrature error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityConstant {
    pub sector: Sector,
    pub value: f64,
    pub quadrature_error: f64,
}

// Integration box in (ln ρ, u = sinh θ): the packet is below e^-40 of its
// peak outside κ ± 9/σ∥ radially and |ρ u| > 7/σ⊥ transversally.
const RADIAL_HALF_WIDTH: f64 = 9.0;
const TRANSVERSE_HALF_WIDTH: f64 = 7.0;
const RHO_FLOOR: f64 = 0.02;

/// Trapezoid rule over `ln ρ ∈ [ln rho_min, ln rho_max]` and `u ∈ [-U(ρ), U(ρ)]`.
///
/// In hyperbolic coordinates `d²σ / ρ² = dρ dθ / ρ = d(ln ρ) du / √(1+u²)`.
pub(crate) fn admissibility_sum(
    spec: &MotherSpec,
    rho_min: f64,
    rho_max: f64,
    rho_nodes: usize,
    angle_nodes: usize,
    regularized: bool,
) -> f64 {
    let (s0, s1) = (rho_min.ln(), rho_max.ln());
    let hs = (s1 - s0) / rho_nodes as f64;
    let mut total = 0.0;
    for i in 0..=rho_nodes {
        let rho = (s0 + i as f64 * hs).exp();
        let u_max = TRANSVERSE_HALF_WIDTH / (spec.sigma_perp * rho);
        let hu = 2.0 * u_max / angle_nodes as f64;
        let mut inner = 0.0;
        for m in 0..=angle_nodes {
            let u = -u_max + m as f64 * hu;
            let w = if m == 0 || m == angle_nodes { 0.5 } else { 1.0 };
            let sigma = HyperbolicPoint { rho, phi0: u.asinh(), branch: spec.sector }.to_wavevector();
            let amp = match spec.cone_frame(sigma) {
                Some((along, across)) => spec.amplitude(along, across, regularized).0,
                None => 0.0,
            };
            inner += w * amp * amp / (1.0 + u * u).sqrt();
        }
        let w = if i == 0 || i == rho_nodes { 0.5 } else { 1.0 };
        total += w * inner * hu;
    }
    total * hs
}

pub fn admissibility_constant(spec: &MotherSpec, control: &QuadratureControl) -> Result<AdmissibilityConstant> {
    if control.rho_nodes < 4 || control.angle_nodes < 4 {
        return Err(ApwtError::InvalidParameter("quadrature needs at least 4 nodes per axis".into()));
    }
    let rho_min = (spec.kappa - RADIAL_HALF_WIDTH / spec.sigma_par).max(RHO_FLOOR);
    let rho_max = spec.kappa + RADIAL_HALF_WIDTH / spec.sigma_par;
    let (mut nr, mut nu) = (control.rho_nodes, control.angle_nodes);
    let mut previous = admissibility_sum(spec, rho_min, rho_max, nr, nu, true);
    let mut previous_error = f64::INFINITY;
    for _ in 0..control.max_doublings {
        nr *= 2;
        nu *= 2;
        let value = admissibility_sum(spec, rho_min, rho_max, nr, nu, true);
        let error = (value - previous).abs();
        if error <= control.rel_tol * value.abs() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ApwtError::NoConvergence(format!("admissibility constant is {value}")));
            }
            return Ok(AdmissibilityConstant { sector: spec.sector, value, quadrature_error: error });
        }
        if error > previous_error {
            return Err(ApwtError::NoConvergence(format!(
                "refinement error grew from {previous_error:.3e} to {error:.3e} at {nr}x{nu} nodes"
            )));
        }
        previous = value;
        previous_error = error;
    }
    Err(ApwtError::NoConvergence(format!(
        "error {previous_error:.3e} above tolerance after {} doublings",
        control.max_doublings
    )))
}

/// Coordinate-domain samples of a family solution at a fixed time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSlice {
    pub ct: f64,
    /// Spatial window: rows are `y`, columns are `x`.
    pub window: Grid2D,
    pub values: Array2<Complex64>,
    /// Share of `Σ|Ψ|²` in the outer sixteenth of the window on each side.
    pub edge_energy_fraction: f64,
}

impl TimeSlice {
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.window.cell_area()
    }

    /// `|Ψ|²`-weighted mean position `(x, y)`.
    pub fn centroid(&self) -> (f64, f64) {
        let (mut sx, mut sy, mut total) = (0.0, 0.0, 0.0);
        for ((m, n), v) in self.values.indexed_iter() {
            let w = v.norm_sqr();
            sx += w * self.window.x(n);
            sy += w * self.window.ct(m);
            total += w;
        }
        (sx / total, sy / total)
    }
}

const LEAKAGE_LIMIT: f64 = 0.01;

fn edge_energy_fraction(values: &Array2<Complex64>) -> f64 {
    let (ny, nx) = values.dim();
    let (by, bx) = ((ny / 16).max(1), (nx / 16).max(1));
    let (mut edge, mut total) = (0.0, 0.0);
    for ((m, n), v) in values.indexed_iter() {
        let w = v.norm_sqr();
        total += w;
        if m < by || m >= ny - by || n < bx || n >= nx - bx {
            edge += w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        edge / total
    }
}

/// `Ψ_{jμ}(ct, x, y)` on a spatial window (rows `y`, columns `x`).
///
/// Propagating sectors integrate over `(k_x, k_y)` with `ω/c = ±√(k_x²+k_y²)`
/// and the Jacobian `k_y/k` of the change of variables from `(ω/c, k_x)`,
/// which is a single 2D FFT. Evanescent sectors keep the `(ω/c, k_x)`
/// parametrisation and apply the `y` decay row by row.
pub fn time_slice(spec: &MotherSpec, mu: &WaveletPoint, ct: f64, window: &Grid2D) -> Result<TimeSlice> {
    let mu = WaveletPoint::new(mu.b, mu.a, mu.phi)?;
    if !ct.is_finite() {
        return Err(ApwtError::InvalidParameter(format!("time must be finite, got {ct}")));
    }
    if !spec.sector.is_propagating() && window.origin.0 < 0.0 {
        return Err(ApwtError::InvalidParameter("evanescent slices need a window in y >= 0".into()));
    }
    let member = FamilyMember::new(spec, mu.a, mu.phi);
    let shift = |sigma: Wavevector| Complex64::from_polar(1.0, -sigma.pair(mu.b) - sigma.k * ct);
    let mut values;
    if spec.sector.is_propagating() {
        let sign = if spec.sector == Sector::D1 { 1.0 } else { -1.0 };
        values = Array2::from_shape_fn(window.shape(), |(p, q)| {
            let (ky, kx) = (window.sigma_t(p), window.k_x(q));
            if ky <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let k = kx.hypot(ky);
            let sigma = Wavevector::new(sign * k, kx);
            member.value(sigma, 0.0) * shift(sigma) * (ky / k)
        });
        synthesise_axis(&mut values, 0, &window.time_axis(), KernelSign::Plus);
    } else {
        // σ_t quadrature reuses the row dual axis of the window.
        values = Array2::zeros(window.shape());
        for m in 0..window.n_t {
            let y = window.ct(m);
            for q in 0..window.n_x {
                let kx = window.k_x(q);
                values[[m, q]] = (0..window.n_t)
                    .map(|p| {
                        let sigma = Wavevector::new(window.sigma_t(p), kx);
                        member.value(sigma, y) * shift(sigma)
                    })
                    .sum();
            }
        }
    }
    synthesise_axis(&mut values, 1, &window.space_axis(), KernelSign::Plus);
    let scale = window.dual_cell_area() / (4.0 * PI * PI);
    values.mapv_inplace(|v| v * scale);
    let edge = edge_energy_fraction(&values);
    if edge > LEAKAGE_LIMIT {
        warn!("time slice at ct = {ct}: {:.2}% of the energy sits at the window edge", 100.0 * edge);
    }
    Ok(TimeSlice { ct, window: *window, values, edge_energy_fraction: edge })
}

/// [`time_slice`] of the mother solution itself (`μ` = identity).
pub fn mother_time_slice(spec: &MotherSpec, ct: f64, window: &Grid2D) -> Result<TimeSlice> {
    time_slice(spec, &WaveletPoint::identity(), ct, window)
}

/// `(2πσ∥σ⊥)⁻¹ exp(iκy - y²/2σ∥² - x²/2σ⊥²)`: the `t = 0` packet without the
/// cone regulariser.
pub fn gaussian_packet_at_rest(spec: &MotherSpec, x: f64, y: f64) -> Complex64 {
    let env = (-(y * y) / (2.0 * spec.sigma_par.powi(2)) - x * x / (2.0 * spec.sigma_perp.powi(2))).exp();
    Complex64::from_polar(env / (2.0 * PI * spec.sigma_par * spec.sigma_perp), spec.kappa * y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(sector: Sector) -> MotherSpec {
        MotherSpec::new(sector, 4.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MotherSpec::new(Sector::D1, 0.0, 1.0, 1.0).is_err());
        assert!(MotherSpec::new(Sector::D1, 1.0, -1.0, 1.0).is_err());
        assert!(WaveletPoint::new(Event::default(), 0.0, 0.0).is_err());
        let json = r#"{"sector": 1, "kappa": 4.0, "sigma_par": -1.0, "sigma_perp": 2.0}"#;
        assert!(serde_json::from_str::<MotherSpec>(json).is_err());
        let json = r#"{"sector": 3, "kappa": 4.0, "sigma_par": 1.0, "sigma_perp": 2.0}"#;
        assert_eq!(serde_json::from_str::<MotherSpec>(json).unwrap(), spec(Sector::D3));
    }

    #[test]
    fn sector_one_peak_value() {
        let v = mother_hat(&spec(Sector::D1), Wavevector::new(4.0, 0.0), 0.0).unwrap();
        assert_abs_diff_eq!(v.re, (-0.25f64).exp(), epsilon = 1e-15);
        assert_eq!(v.im, 0.0);
        assert_abs_diff_eq!(v.re, 0.778_800_783_071_404_9, epsilon = 1e-15);
    }

    #[test]
    fn sector_one_vanishes_off_support() {
        let s = spec(Sector::D1);
        for sigma in [Wavevector::new(3.0, 3.0), Wavevector::new(3.0, -3.0), Wavevector::new(-4.0, 0.0), Wavevector::new(1.0, 2.0)] {
            assert_eq!(mother_hat(&s, sigma, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn sector_three_peak_decays_in_y() {
        let v = mother_hat(&spec(Sector::D3), Wavevector::new(0.0, 4.0), 1.0).unwrap();
        assert_abs_diff_eq!(v.re, (-0.25f64).exp() * (-4.0f64).exp(), epsilon = 1e-16);
        assert!(mother_hat(&spec(Sector::D3), Wavevector::new(0.0, 4.0), -1.0).is_err());
        assert!(mother_hat(&spec(Sector::D1), Wavevector::new(4.0, 0.0), -1.0).is_ok());
    }

    #[test]
    fn mirrored_sectors() {
        let sigma = Wavevector::new(3.1, -0.7);
        let one = mother_hat(&spec(Sector::D1), sigma, 0.4).unwrap();
        let two = mother_hat(&spec(Sector::D2), Wavevector::new(-3.1, -0.7), 0.4).unwrap();
        assert_eq!(one, two);
        let three = mother_hat(&spec(Sector::D3), Wavevector::new(0.5, 3.0), 0.4).unwrap();
        let four = mother_hat(&spec(Sector::D4), Wavevector::new(0.5, -3.0), 0.4).unwrap();
        assert_eq!(three, four);
        assert!(three.norm() > 0.0);
    }

    #[test]
    fn propagating_phase_is_k_y_times_y() {
        let sigma = Wavevector::new(5.0, 3.0);
        let at0 = mother_hat(&spec(Sector::D1), sigma, 0.0).unwrap();
        let at1 = mother_hat(&spec(Sector::D1), sigma, 0.5).unwrap();
        assert_abs_diff_eq!((at1 / at0).arg(), 4.0 * 0.5, epsilon = 1e-14);
    }

    #[test]
    fn identity_member_equals_mother() {
        let s = spec(Sector::D1);
        for sigma in [Wavevector::new(4.0, 0.3), Wavevector::new(2.0, -1.0), Wavevector::new(6.0, 5.9)] {
            let f = family_hat(&s, &WaveletPoint::identity(), sigma, 0.7).unwrap();
            assert_eq!(f, mother_hat(&s, sigma, 0.7).unwrap());
        }
    }

    #[test]
    fn shift_only_changes_phase() {
        let s = spec(Sector::D1);
        let sigma = Wavevector::new(4.5, 0.8);
        let b = Event::new(1.3, -2.1);
        let mu0 = WaveletPoint::new(Event::default(), 0.8, 0.2).unwrap();
        let mu = WaveletPoint::new(b, 0.8, 0.2).unwrap();
        let base = family_hat(&s, &mu0, sigma, 0.0).unwrap();
        let shifted = family_hat(&s, &mu, sigma, 0.0).unwrap();
        assert_abs_diff_eq!(shifted.norm(), base.norm(), epsilon = 1e-15);
        let expected = base * Complex64::from_polar(1.0, sigma.k * b.ct - sigma.kx * b.x);
        assert_abs_diff_eq!((shifted - expected).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn boosted_member_peaks_on_the_hyperbola() {
        let s = spec(Sector::D1);
        let mu = WaveletPoint::new(Event::default(), 0.5, 0.3).unwrap();
        let grid = Grid2D::centered(256, 256, 0.25, 0.25).unwrap();
        let (mut best, mut arg) = (0.0, Wavevector::default());
        for p in 0..grid.n_t {
            for q in 0..grid.n_x {
                let sigma = grid.wavevector(p, q);
                let v = family_hat(&s, &mu, sigma, 0.0).unwrap().norm();
                if v > best {
                    best = v;
                    arg = sigma;
                }
            }
        }
        let (ds, dk) = grid.dual_spacing();
        // The modulus maximum is pulled slightly off (κ, 0)/a by the k/k_y and
        // exp(-1/k_y) factors; it must stay within two bins of the prediction.
        assert!((arg.k - 8.0 * 0.3f64.cosh()).abs() <= 2.0 * ds, "{arg:?}");
        assert!((arg.kx - 8.0 * 0.3f64.sinh()).abs() <= 2.0 * dk, "{arg:?}");
    }

    #[test]
    fn family_never_leaves_its_sector() {
        let grid = Grid2D::centered(48, 48, 0.4, 0.4).unwrap();
        for sector in Sector::ALL {
            let s = spec(sector);
            for (a, phi) in [(0.3, -1.0), (1.0, 0.0), (2.5, 1.4)] {
                let mu = WaveletPoint::new(Event::new(0.3, -0.2), a, phi).unwrap();
                for p in 0..grid.n_t {
                    for q in 0..grid.n_x {
                        let sigma = grid.wavevector(p, q);
                        let v = family_hat(&s, &mu, sigma, 0.0).unwrap();
                        if !sector.contains(sigma) {
                            assert_eq!(v, Complex64::new(0.0, 0.0));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn family_is_isometric_on_resolving_grids() {
        let s = spec(Sector::D1);
        let grid = Grid2D::centered(512, 512, 0.2, 0.2).unwrap();
        let norm = |mu: &WaveletPoint| -> f64 {
            let mut acc = 0.0;
            for p in 0..grid.n_t {
                for q in 0..grid.n_x {
                    acc += family_hat(&s, mu, grid.wavevector(p, q), 0.0).unwrap().norm_sqr();
                }
            }
            acc * grid.dual_cell_area()
        };
        let reference = norm(&WaveletPoint::identity());
        for (a, phi) in [(0.7, 0.5), (1.5, -0.8), (2.0, 0.0)] {
            let mu = WaveletPoint::new(Event::new(1.0, 2.0), a, phi).unwrap();
            let ratio = norm(&mu) / reference;
            assert!((ratio - 1.0).abs() < 0.01, "a={a} phi={phi}: {ratio}");
        }
    }

    #[test]
    fn admissibility_is_stable_and_symmetric() {
        let control = QuadratureControl::default();
        let c1 = admissibility_constant(&spec(Sector::D1), &control).unwrap();
        assert!(c1.value > 0.0 && c1.value.is_finite());
        assert!(c1.quadrature_error <= 1e-10 * c1.value);
        // mesh doubling leaves three significant digits unchanged
        let rho = (RHO_FLOOR, 4.0 + RADIAL_HALF_WIDTH);
        let coarse = admissibility_sum(&spec(Sector::D1), rho.0, rho.1, 32, 32, true);
        let fine = admissibility_sum(&spec(Sector::D1), rho.0, rho.1, 64, 64, true);
        assert!(((coarse - fine) / fine).abs() < 5e-4, "{coarse} vs {fine}");
        for sector in [Sector::D2, Sector::D3, Sector::D4] {
            let cj = admissibility_constant(&spec(sector), &control).unwrap();
            assert!((cj.value - c1.value).abs() < 1e-10 * c1.value, "{sector}: {} vs {}", cj.value, c1.value);
        }
    }

    #[test]
    fn admissibility_matches_direct_cartesian_sum() {
        // brute-force Riemann sum of |ψ̂|²/|k² - k_x²| on a fine Cartesian grid
        let s = spec(Sector::D1);
        let c1 = admissibility_constant(&s, &QuadratureControl::default()).unwrap().value;
        let h = 0.01;
        let mut acc = 0.0;
        for i in 1..1500 {
            let k = i as f64 * h;
            for j in -800..=800 {
                let kx = j as f64 * h + 0.5 * h;
                let sigma = Wavevector::new(k, kx);
                let v = s.magnitude(sigma);
                if v > 0.0 {
                    acc += v * v / sigma.minkowski_norm_sq().abs();
                }
            }
        }
        acc *= h * h;
        assert!((acc / c1 - 1.0).abs() < 1e-3, "{acc} vs {c1}");
    }

    #[test]
    fn regulariser_is_what_keeps_the_constant_finite() {
        // a broad packet so the cone region carries visible weight
        let s = MotherSpec::new(Sector::D1, 1.0, 1.0, 1.0).unwrap();
        let hi = 1.0 + RADIAL_HALF_WIDTH;
        let mut bare = Vec::new();
        let mut regular = Vec::new();
        for rho_min in [0.02, 0.01, 0.005, 0.0025] {
            bare.push(admissibility_sum(&s, rho_min, hi, 512, 256, false));
            regular.push(admissibility_sum(&s, rho_min, hi, 512, 256, true));
        }
        for w in bare.windows(2) {
            // ∝ 1/ρ_min² growth near the cone
            assert!(w[1] / w[0] > 3.0, "{bare:?}");
        }
        for w in regular.windows(2) {
            assert!((w[1] - w[0]).abs() < 1e-12 * w[0], "{regular:?}");
        }
    }
}
