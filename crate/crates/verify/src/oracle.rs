//! Reference computations written without the library's fast paths. Each
//! one is a direct transcription of a defining formula.

use std::f64::consts::PI;

use nalgebra::{Matrix2, SymmetricEigen};
use ndarray::Array2;
use num_complex::Complex64;

use apwt::{BoundarySignal, Grid2D};

/// Forward transform by explicit double sums:
/// `f̂(σ_p) = Σ f(χ_n) e^{+iω t - i k_x x} Δt Δx`, separable so O(N³).
pub fn naive_dft(f: &BoundarySignal) -> Array2<Complex64> {
    let g = f.grid();
    let (nt, nx) = g.shape();
    let mut half = Array2::<Complex64>::zeros((nt, nx));
    for m in 0..nt {
        for q in 0..nx {
            let kx = g.k_x(q);
            half[[m, q]] = (0..nx).map(|n| f.values()[[m, n]] * Complex64::from_polar(1.0, -kx * g.x(n))).sum();
        }
    }
    let mut out = Array2::<Complex64>::zeros((nt, nx));
    for p in 0..nt {
        let w = g.sigma_t(p);
        for q in 0..nx {
            out[[p, q]] = (0..nt).map(|m| half[[m, q]] * Complex64::from_polar(1.0, w * g.ct(m))).sum::<Complex64>()
                * g.cell_area();
        }
    }
    out
}

/// Sector-1 mother spectrum at `y = 0`:
/// `(k/k_y) exp(-σ∥²(k_y-κ)²/2 - σ⊥²k_x²/2 - 1/k_y)`, `k_y = √(k²-k_x²)`.
pub fn mother_hat_d1(kappa: f64, sigma_par: f64, sigma_perp: f64, k: f64, kx: f64) -> f64 {
    if k <= kx.abs() {
        return 0.0;
    }
    let ky = (k * k - kx * kx).sqrt();
    k / ky * (-0.5 * sigma_par.powi(2) * (ky - kappa).powi(2) - 0.5 * sigma_perp.powi(2) * kx * kx - 1.0 / ky).exp()
}

/// Parameters of a sector-1 wavelet for [`direct_apwt`].
#[derive(Clone, Copy, Debug)]
pub struct D1Wavelet {
    pub kappa: f64,
    pub sigma_par: f64,
    pub sigma_perp: f64,
}

/// `F(μ) = Σ_n f(χ_n) conj(ψ_μ(χ_n)) Δt Δx` with `ψ_μ` evaluated in the
/// coordinate domain by a trapezoid rule over the mother spectrum.
///
/// With `σ' = a M σ`, `M = [[cosh φ, -sinh φ], [-sinh φ, cosh φ]]`, the
/// Minkowski pairing gives `(σ, χ-b) = (σ', M(χ-b))/a`, so
///
/// `ψ_μ(χ) = a⁻¹ (2π)⁻² ∫ ψ̂(σ') e^{i(σ', χ')} dσ'`, `χ' = M(χ-b)/a`.
///
/// Samples where `|f| < cutoff·max|f|` are skipped.
pub fn direct_apwt(f: &BoundarySignal, w: &D1Wavelet, b: (f64, f64), a: f64, phi: f64, h: f64, cutoff: f64) -> Complex64 {
    let g = f.grid();
    let fmax = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    // Cartesian nodes of the mother spectrum within 9 widths of its centre
    let (k_half, x_half) = (9.0 / w.sigma_par, 9.0 / w.sigma_perp);
    let ks: Vec<f64> = (0..=(2.0 * k_half / h).ceil() as usize).map(|i| w.kappa - k_half + i as f64 * h).collect();
    let xs: Vec<f64> = (0..=(2.0 * x_half / h).ceil() as usize).map(|j| -x_half + j as f64 * h).collect();
    let table: Vec<Vec<f64>> =
        ks.iter().map(|&k| xs.iter().map(|&x| mother_hat_d1(w.kappa, w.sigma_par, w.sigma_perp, k, x)).collect()).collect();
    let (ch, sh) = (phi.cosh(), phi.sinh());
    let weight = h * h / (a * 4.0 * PI * PI);
    let mut acc = Complex64::new(0.0, 0.0);
    for ((m, n), fv) in f.values().indexed_iter() {
        if fv.norm() < cutoff * fmax {
            continue;
        }
        let (t, x) = (g.ct(m) - b.0, g.x(n) - b.1);
        let (tp, xp) = ((ch * t - sh * x) / a, (-sh * t + ch * x) / a);
        let cols: Vec<Complex64> = xs.iter().map(|&kx| Complex64::from_polar(1.0, kx * xp)).collect();
        let mut psi = Complex64::new(0.0, 0.0);
        for (row, &k) in table.iter().zip(&ks) {
            let inner: Complex64 = row.iter().zip(&cols).filter(|(v, _)| **v != 0.0).map(|(v, c)| c * *v).sum();
            psi += inner * Complex64::from_polar(1.0, -k * tp);
        }
        acc += fv * (psi * weight).conj();
    }
    acc * g.cell_area()
}

/// Coordinate samples of the band-limited wavelet on `grid`:
/// `ψ_μ(χ_n) = (2π)⁻² Σ_p a ψ̂(a M σ_p) e^{i(σ_p, χ_n - b)} dσ` over every
/// dual bin, summed one axis at a time.
pub fn grid_wavelet(grid: &Grid2D, w: &D1Wavelet, b: (f64, f64), a: f64, phi: f64) -> Array2<Complex64> {
    let (nt, nx) = grid.shape();
    let (ch, sh) = (phi.cosh(), phi.sinh());
    let hat = Array2::from_shape_fn((nt, nx), |(p, q)| {
        let (k, kx) = (grid.sigma_t(p), grid.k_x(q));
        a * mother_hat_d1(w.kappa, w.sigma_par, w.sigma_perp, a * (ch * k - sh * kx), a * (-sh * k + ch * kx))
    });
    // Σ_q over k_x for every (p, x_n), then Σ_p over ω for every t_m
    let mut half = Array2::<Complex64>::zeros((nt, nx));
    for p in 0..nt {
        for n in 0..nx {
            let x = grid.x(n) - b.1;
            half[[p, n]] = (0..nx).map(|q| Complex64::from_polar(hat[[p, q]], grid.k_x(q) * x)).sum();
        }
    }
    let scale = grid.dual_cell_area() / (4.0 * PI * PI);
    Array2::from_shape_fn((nt, nx), |(m, n)| {
        let t = grid.ct(m) - b.0;
        (0..nt).map(|p| half[[p, n]] * Complex64::from_polar(1.0, -grid.sigma_t(p) * t)).sum::<Complex64>() * scale
    })
}

/// `Σ_n f(χ_n) conj(ψ_μ(χ_n)) Δt Δx` with the band-limited wavelet of [`grid_wavelet`].
pub fn direct_apwt_on_grid(f: &BoundarySignal, w: &D1Wavelet, b: (f64, f64), a: f64, phi: f64) -> Complex64 {
    let psi = grid_wavelet(f.grid(), w, b, a, phi);
    f.values().iter().zip(psi.iter()).map(|(v, p)| v * p.conj()).sum::<Complex64>() * f.grid().cell_area()
}

/// Eigen-decomposition of `α² cosh²φ x² + β² (y - sinh φ x)²` by a generic
/// symmetric solver. Returns `(λ_max, axis_max, λ_min, axis_min)`.
pub fn ellipse_eigen(alpha: f64, beta: f64, phi: f64) -> (f64, [f64; 2], f64, [f64; 2]) {
    let (ch, sh) = (phi.cosh(), phi.sinh());
    // expand the two squares
    let xx = alpha * alpha * ch * ch + beta * beta * sh * sh;
    let xy = -beta * beta * sh;
    let yy = beta * beta;
    let eig = SymmetricEigen::new(Matrix2::new(xx, xy, xy, yy));
    let (hi, lo) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let col = |i: usize| [eig.eigenvectors[(0, i)], eig.eigenvectors[(1, i)]];
    (eig.eigenvalues[hi], col(hi), eig.eigenvalues[lo], col(lo))
}

/// Angle between the lines spanned by `u` and `v`, in `[0, π/2]`.
pub fn axis_angle(u: [f64; 2], v: [f64; 2]) -> f64 {
    let cross = (u[0] * v[1] - u[1] * v[0]).abs();
    let dot = (u[0] * v[0] + u[1] * v[1]).abs();
    cross.atan2(dot)
}

/// Coordinate-domain Gaussian packet `exp(-|χ-χ₀|²/2s²) e^{i(σ₀, χ)}` sampled on `grid`
/// at the transformed points `T(χ)`.
pub fn gaussian_packet(grid: Grid2D, s: f64, sigma0: (f64, f64), map: impl Fn(f64, f64) -> (f64, f64)) -> BoundarySignal {
    BoundarySignal::from_fn(grid, |t, x| {
        let (t, x) = map(t, x);
        let env = (-(t * t + x * x) / (2.0 * s * s)).exp();
        Complex64::from_polar(env, -sigma0.0 * t + sigma0.1 * x)
    })
    .expect("finite samples")
}
