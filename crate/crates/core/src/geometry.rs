//! Lorentz boosts along `x`, hyperbolic coordinates on the spectral plane
//! and the distortion of a packet's envelope ellipse under a boost.

use serde::{Deserialize, Serialize};

use crate::error::{ApwtError, Result};
use crate::lattice::Sector;

/// A space-time point `(ct, x)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub ct: f64,
    pub x: f64,
}

impl Event {
    pub fn new(ct: f64, x: f64) -> Self {
        Self { ct, x }
    }
}

/// A spectral point `(ω/c, k_x)`; `k` is the temporal wavenumber `ω/c`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Wavevector {
    pub k: f64,
    pub kx: f64,
}

impl Wavevector {
    pub fn new(k: f64, kx: f64) -> Self {
        Self { k, kx }
    }

    /// `(ω/c)² - k_x²`.
    pub fn minkowski_norm_sq(&self) -> f64 {
        (self.k - self.kx) * (self.k + self.kx)
    }

    /// Minkowski pairing `(σ, χ) = -ωt + k_x x`.
    pub fn pair(&self, chi: Event) -> f64 {
        -self.k * chi.ct + self.kx * chi.x
    }

    pub fn scale(&self, a: f64) -> Wavevector {
        Wavevector::new(a * self.k, a * self.kx)
    }
}

/// Lorentz transformation with rapidity `φ`, `tanh φ = v/c`:
///
/// ```text
/// Λ_φ = [[cosh φ, -sinh φ], [-sinh φ, cosh φ]],   (ct', x') = Λ_φ (ct, x)
/// ```
///
/// maps stationary coordinates to those of a frame moving with speed `v` along `+x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Boost {
    phi: f64,
    matrix: [[f64; 2]; 2],
}

impl Boost {
    pub fn new(phi: f64) -> Self {
        let (ch, sh) = (phi.cosh(), phi.sinh());
        Self { phi, matrix: [[ch, -sh], [-sh, ch]] }
    }

    pub fn identity() -> Self {
        Self::new(0.0)
    }

    /// Boost with speed `v` in units where the wave speed is `c`.
    pub fn from_speed(v: f64, c: f64) -> Result<Self> {
        let beta = v / c;
        if !(beta.abs() < 1.0) {
            return Err(ApwtError::InvalidParameter(format!("|v| must be below c, got v/c = {beta}")));
        }
        Ok(Self::new(beta.atanh()))
    }

    pub fn rapidity(&self) -> f64 {
        self.phi
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.matrix
    }

    /// `v = c tanh φ`.
    pub fn speed(&self, c: f64) -> f64 {
        c * self.phi.tanh()
    }

    pub fn determinant(&self) -> f64 {
        let m = self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Boost {
        Boost::new(-self.phi)
    }

    /// `Λ_φ Λ_ψ = Λ_{φ+ψ}`, returned as the explicit matrix product.
    pub fn compose(&self, other: &Boost) -> Boost {
        let (a, b) = (self.matrix, other.matrix);
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Boost { phi: self.phi + other.phi, matrix: m }
    }

    /// Coordinates of `chi` in the moving frame.
    pub fn apply(&self, chi: Event) -> Event {
        let m = self.matrix;
        Event::new(m[0][0] * chi.ct + m[0][1] * chi.x, m[1][0] * chi.ct + m[1][1] * chi.x)
    }

    /// The same matrix applied to a spectral point: `Λ_φ σ` lowers the
    /// hyperbolic angle of `σ` by `φ`, i.e. it takes stationary-frame
    /// wavevectors to the moving frame.
    pub fn apply_matrix(&self, sigma: Wavevector) -> Wavevector {
        let m = self.matrix;
        Wavevector::new(m[0][0] * sigma.k + m[0][1] * sigma.kx, m[1][0] * sigma.k + m[1][1] * sigma.kx)
    }

    /// Image in the stationary frame of a wavevector seen in the moving frame:
    /// raises the hyperbolic angle by `φ`.
    pub fn apply_spectral(&self, sigma_rest: Wavevector) -> Wavevector {
        self.inverse().apply_matrix(sigma_rest)
    }
}

pub fn boost(phi: f64) -> Boost {
    Boost::new(phi)
}

/// Argument at which the mother spectrum is evaluated for family member
/// `(a, φ)`: `a Λ_φ σ`, which carries `a⁻¹(cosh φ, sinh φ)ρ` back to `(ρ, 0)`.
pub fn spectral_boost_scale(sigma: Wavevector, a: f64, phi: f64) -> Result<Wavevector> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(ApwtError::InvalidParameter(format!("scale must be positive, got {a}")));
    }
    Ok(boost_scale_unchecked(sigma, a, phi.cosh(), phi.sinh()))
}

#[inline]
pub(crate) fn boost_scale_unchecked(sigma: Wavevector, a: f64, ch: f64, sh: f64) -> Wavevector {
    Wavevector::new(a * (ch * sigma.k - sh * sigma.kx), a * (ch * sigma.kx - sh * sigma.k))
}

/// Hyperbolic coordinates of a spectral point off the light cone.
///
/// Sectors 1–2: `(ω/c, k_x) = ±ρ (cosh φ₀, sinh φ₀)`; sectors 3–4 swap the
/// roles of `ω/c` and `k_x`: `(ω/c, k_x) = ±ρ (sinh φ₀, cosh φ₀)`. The sign is
/// `+` for `D1`, `D3`. With this choice a boost adds its rapidity to `φ₀` in
/// every sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicPoint {
    pub rho: f64,
    pub phi0: f64,
    pub branch: Sector,
}

impl HyperbolicPoint {
    pub fn to_wavevector(&self) -> Wavevector {
        let (ch, sh) = (self.rho * self.phi0.cosh(), self.rho * self.phi0.sinh());
        match self.branch {
            Sector::D1 => Wavevector::new(ch, sh),
            Sector::D2 => Wavevector::new(-ch, -sh),
            Sector::D3 => Wavevector::new(sh, ch),
            Sector::D4 => Wavevector::new(-sh, -ch),
        }
    }
}

pub fn hyperbolic_coords(sigma: Wavevector) -> Result<HyperbolicPoint> {
    let branch = Sector::of(sigma).ok_or(ApwtError::LightCone { k: sigma.k, kx: sigma.kx })?;
    let rho = sigma.minkowski_norm_sq().abs().sqrt();
    let phi0 = if branch.is_propagating() { (sigma.kx / sigma.k).atanh() } else { (sigma.k / sigma.kx).atanh() };
    Ok(HyperbolicPoint { rho, phi0, branch })
}

/// Principal-axis description of the region
/// `α² cosh²φ (x-x₀)² + β² ((y-y₀) - sinh φ (x-x₀))² ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PacketEllipse {
    pub center: (f64, f64),
    /// Larger eigenvalue of the quadratic form.
    pub lambda1: f64,
    pub lambda2: f64,
    /// Unit eigenvector of `lambda1`, second component ≥ 0.
    pub axis1: [f64; 2],
    pub axis2: [f64; 2],
}

impl PacketEllipse {
    /// Semi-axis lengths `(1/√λ₁, 1/√λ₂)`.
    pub fn semi_axes(&self) -> (f64, f64) {
        (self.lambda1.sqrt().recip(), self.lambda2.sqrt().recip())
    }
}

/// Symmetric matrix `[[α²cosh²φ + β²sinh²φ, -β² sinh φ], [-β² sinh φ, β²]]`
/// of the quadratic form above.
pub fn packet_form_matrix(alpha: f64, beta: f64, phi: f64) -> [[f64; 2]; 2] {
    let (a2, b2) = (alpha * alpha, beta * beta);
    let (ch, sh) = (phi.cosh(), phi.sinh());
    [[a2 * ch * ch + b2 * sh * sh, -b2 * sh], [-b2 * sh, b2]]
}

pub fn packet_ellipse(alpha: f64, beta: f64, phi: f64, center: (f64, f64)) -> Result<PacketEllipse> {
    if !(alpha > 0.0 && beta > 0.0) || !phi.is_finite() {
        return Err(ApwtError::InvalidParameter(format!(
            "need alpha > 0, beta > 0 and finite phi, got ({alpha}, {beta}, {phi})"
        )));
    }
    let (a2, b2) = (alpha * alpha, beta * beta);
    let ch2 = phi.cosh().powi(2);
    let half_trace = 0.5 * (a2 + b2) * ch2;
    // (α²+β²)²cosh⁴φ - 4α²β²cosh²φ, written as a sum of squares to avoid cancellation
    let disc = (((a2 - b2) * ch2).powi(2) + 4.0 * a2 * b2 * ch2 * (ch2 - 1.0)).sqrt();
    let lambda1 = half_trace + 0.5 * disc;
    let lambda2 = a2 * b2 * ch2 / lambda1;

    let m = packet_form_matrix(alpha, beta, phi);
    let axis1 = eigenvector(&m, lambda1, [1.0, 0.0]);
    let axis2 = eigenvector(&m, lambda2, [0.0, 1.0]);
    Ok(PacketEllipse { center, lambda1, lambda2, axis1, axis2 })
}

/// Unit eigenvector of a symmetric 2×2 matrix, normalised so that the second
/// component is non-negative (first component positive when it vanishes).
fn eigenvector(m: &[[f64; 2]; 2], lambda: f64, fallback: [f64; 2]) -> [f64; 2] {
    // (m - λ) v = 0 gives v ∝ (m01, λ - m00) or (λ - m11, m10); keep the better conditioned one.
    let c1 = [m[0][1], lambda - m[0][0]];
    let c2 = [lambda - m[1][1], m[1][0]];
    let n1 = c1[0].hypot(c1[1]);
    let n2 = c2[0].hypot(c2[1]);
    let scale = m[0][0].abs() + m[1][1].abs() + m[0][1].abs();
    let (v, n) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    let mut u = if n <= 1e-14 * scale { fallback } else { [v[0] / n, v[1] / n] };
    if u[1] < 0.0 || (u[1] == 0.0 && u[0] < 0.0) {
        u = [-u[0], -u[1]];
    }
    u
}

/// Stationary-frame centre `(x₀, y₀) = (ct tanh φ, ct / cosh φ)` of a packet
/// that moves along `y` with speed `c` in the frame of rapidity `φ`.
pub fn packet_center(phi: f64, ct: f64) -> (f64, f64) {
    (ct * phi.tanh(), ct / phi.cosh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_rapidity_is_identity() {
        assert_eq!(boost(0.0).matrix(), [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn unit_rapidity_speed() {
        assert_abs_diff_eq!(boost(1.0).speed(1.0), 0.761_594_155_955_764_9, epsilon = 1e-15);
        assert_abs_diff_eq!(Boost::from_speed(0.5, 1.0).unwrap().rapidity(), 0.5f64.atanh());
        assert!(Boost::from_speed(1.0, 1.0).is_err());
    }

    #[test]
    fn boost_cancels_hyperbolic_angle() {
        let s = spectral_boost_scale(Wavevector::new(0.5f64.cosh(), 0.5f64.sinh()), 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(s.k, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.kx, 0.0, epsilon = 1e-15);
        let id = spectral_boost_scale(Wavevector::new(0.3, -2.0), 1.0, 0.0).unwrap();
        assert_eq!(id, Wavevector::new(0.3, -2.0));
        assert!(spectral_boost_scale(Wavevector::new(1.0, 0.0), 0.0, 0.1).is_err());
    }

    #[test]
    fn hyperbolic_examples() {
        let h = hyperbolic_coords(Wavevector::new(1.0, 0.0)).unwrap();
        assert_eq!((h.rho, h.phi0, h.branch), (1.0, 0.0, Sector::D1));
        let h = hyperbolic_coords(Wavevector::new(2f64.cosh(), 2f64.sinh())).unwrap();
        assert_abs_diff_eq!(h.rho, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.phi0, 2.0, epsilon = 1e-12);
        let h = hyperbolic_coords(Wavevector::new(0.3, 1.7)).unwrap();
        assert_eq!(h.branch, Sector::D3);
        assert_abs_diff_eq!(h.rho, (1.7f64 * 1.7 - 0.3 * 0.3).sqrt(), epsilon = 1e-15);
        assert!(matches!(hyperbolic_coords(Wavevector::new(1.0, -1.0)), Err(ApwtError::LightCone { .. })));
    }

    #[test]
    fn circular_packet_special_case() {
        let sigma = 1.3;
        let alpha = 1.0 / (2f64.sqrt() * sigma);
        for phi in [-1.2, -0.3, 0.4, 1.0, 2.5] {
            let e = packet_ellipse(alpha, alpha, phi, (0.0, 0.0)).unwrap();
            let s = 1.0 / (2.0 * sigma * sigma);
            assert_abs_diff_eq!(e.lambda1 / s, phi.abs().exp() * phi.cosh(), epsilon = 1e-12);
            assert_abs_diff_eq!(e.lambda2 / s, (-phi.abs()).exp() * phi.cosh(), epsilon = 1e-12);
        }
    }

    #[test]
    fn unit_circle_at_rest() {
        let e = packet_ellipse(1.0, 1.0, 0.0, (2.0, -1.0)).unwrap();
        assert_eq!((e.lambda1, e.lambda2), (1.0, 1.0));
        assert_eq!(e.center, (2.0, -1.0));
        assert_abs_diff_eq!(e.axis1[0] * e.axis2[0] + e.axis1[1] * e.axis2[1], 0.0);
    }

    #[test]
    fn circular_packet_axes_follow_exp_rapidity() {
        // axes are (e^{-φ}, 1) and (-e^{φ}, 1) up to normalisation
        let phi: f64 = 0.6;
        let e = packet_ellipse(0.7, 0.7, phi, (0.0, 0.0)).unwrap();
        let cross = |u: [f64; 2], v: [f64; 2]| (u[0] * v[1] - u[1] * v[0]) / v[0].hypot(v[1]);
        assert_abs_diff_eq!(cross(e.axis1, [-phi.exp(), 1.0]), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(cross(e.axis2, [(-phi).exp(), 1.0]), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn packet_center_examples() {
        assert_eq!(packet_center(0.0, 3.0), (0.0, 3.0));
        let (x0, y0) = packet_center(10.0, 2.0);
        assert!((x0 - 2.0).abs() < 1e-4 * 2.0 && y0.abs() < 1e-4 * 2.0);
        let (x0, y0) = packet_center(0.7, 15.0);
        assert_eq!(x0, 15.0 * 0.7f64.tanh());
        assert_eq!(y0, 15.0 / 0.7f64.cosh());
    }

    proptest! {
        #[test]
        fn boost_group_law(phi in -3.0..3.0f64, psi in -3.0..3.0f64) {
            let composed = boost(phi).compose(&boost(psi)).matrix();
            let direct = boost(phi + psi).matrix();
            let scale = (phi.abs() + psi.abs()).cosh();
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((composed[i][j] - direct[i][j]).abs() <= 1e-12 * scale);
                }
            }
        }

        #[test]
        fn boost_is_unimodular_and_invertible(phi in -4.0..4.0f64) {
            let b = boost(phi);
            prop_assert!((b.determinant() - 1.0).abs() < 1e-14 * phi.cosh().powi(2));
            let id = b.compose(&b.inverse()).matrix();
            prop_assert!((id[0][0] - 1.0).abs() < 1e-14 * phi.cosh().powi(2));
            prop_assert!(id[0][1].abs() < 1e-14 * phi.cosh().powi(2));
        }

        #[test]
        fn boost_preserves_interval(phi in -2.0..2.0f64, ct in -10.0..10.0f64, x in -10.0..10.0f64) {
            let e = boost(phi).apply(Event::new(ct, x));
            let before = ct * ct - x * x;
            let after = e.ct * e.ct - e.x * e.x;
            prop_assert!((before - after).abs() < 1e-12 * (ct * ct + x * x).max(1.0) * phi.cosh().powi(2));
        }

        #[test]
        fn boost_shifts_hyperbolic_angle(phi in -1.5..1.5f64, k in -5.0..5.0f64, kx in -5.0..5.0f64) {
            let sigma = Wavevector::new(k, kx);
            prop_assume!(((k.abs() - kx.abs()).abs()) > 0.05);
            let h = hyperbolic_coords(sigma).unwrap();
            let hb = hyperbolic_coords(boost(phi).apply_spectral(sigma)).unwrap();
            prop_assert_eq!(h.branch, hb.branch);
            prop_assert!((hb.phi0 - h.phi0 - phi).abs() < 1e-9);
            prop_assert!((hb.rho - h.rho).abs() < 1e-10 * h.rho.max(1.0));
            // round trip through the coordinates
            let back = h.to_wavevector();
            prop_assert!((back.k - k).abs() < 1e-12 * (k.abs() + kx.abs()) && (back.kx - kx).abs() < 1e-12 * (k.abs() + kx.abs()));
        }

        #[test]
        fn scaling_and_boost_keep_hyperbola(a in 0.1..10.0f64, phi in -2.0..2.0f64, k in -5.0..5.0f64, kx in -5.0..5.0f64) {
            let sigma = Wavevector::new(k, kx);
            let out = spectral_boost_scale(sigma, a, phi).unwrap();
            let expected = a * a * sigma.minkowski_norm_sq();
            let scale = a * a * (k * k + kx * kx) * phi.cosh().powi(2);
            prop_assert!((out.minkowski_norm_sq() - expected).abs() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn ellipse_identities(alpha in 0.05..3.0f64, beta in 0.05..3.0f64, phi in -2.0..2.0f64) {
            let e = packet_ellipse(alpha, beta, phi, (0.0, 0.0)).unwrap();
            let target = (alpha * beta * phi.cosh()).powi(2);
            prop_assert!((e.lambda1 * e.lambda2 - target).abs() <= 1e-10 * target);
            prop_assert!(e.lambda1 >= e.lambda2);
            prop_assert!((e.axis1[0] * e.axis2[0] + e.axis1[1] * e.axis2[1]).abs() < 1e-10);
            prop_assert!(e.axis1[1] >= 0.0 && e.axis2[1] >= 0.0);
        }
    }
}
