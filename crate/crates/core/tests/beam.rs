//! A narrow sector-1 beam climbs along its ray.

use apwt::field::{centroid, field_slice};
use apwt::lattice::{forward_fourier, inverse_fourier, sector_mask};
use apwt::{Complex64, Grid2D, Sector, Spectrum};

#[test]
fn beam_centroid_follows_the_spectral_ray_slope() {
    let grid = Grid2D::centered(512, 128, 0.5, 0.5).unwrap();
    let (k0, kx0, width) = (2.0, 0.6, 0.15);
    let fhat = Spectrum::from_fn(grid, |s| {
        let r2 = (s.k - k0).powi(2) + (s.kx - kx0).powi(2);
        Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
    })
    .unwrap();
    let f = inverse_fourier(&fhat);
    let d1 = sector_mask(&forward_fourier(&f), Sector::D1);
    // stationary phase of e^{i(-ωt + k_x x + k_y y)} puts the envelope at
    // y·(ω/k_y, k_x/k_y), averaged over |f̂|²
    let (mut wt, mut wx, mut total) = (0.0, 0.0, 0.0);
    for (_, _, s, v) in d1.bins() {
        if Sector::D1.contains(s) {
            let ky = (s.k * s.k - s.kx * s.kx).sqrt();
            let w = v.norm_sqr();
            wt += w * s.k / ky;
            wx += w * s.kx / ky;
            total += w;
        }
    }
    let start = centroid(&field_slice(&d1, Sector::D1, 0.0).unwrap());
    for y in [4.0, 8.0, 12.0] {
        let (t, x) = centroid(&field_slice(&d1, Sector::D1, y).unwrap());
        let (t_pred, x_pred) = (start.0 + y * wt / total, start.1 + y * wx / total);
        // sampled first moments differ from the spectral derivative by far less than a cell
        assert!((t - t_pred).abs() < 1e-6 * y && (x - x_pred).abs() < 1e-6 * y, "y = {y}: ({t}, {x}) vs ({t_pred}, {x_pred})");
    }
}
