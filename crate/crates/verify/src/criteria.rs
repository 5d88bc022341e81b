//! One function per acceptance criterion. Each returns a [`Check`] with the
//! measured quantities in `detail`; none of them panics on a numerical miss.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use apwt::field::{propagate, residual_convergence};
use apwt::geometry::packet_ellipse;
use apwt::lattice::{forward_fourier, inverse_fourier, sector_mask};
use apwt::sources::{calibrate_frequency, experiment_field, ExperimentConfig};
use apwt::transform::{
    apwt_slab, dominant_parameters, plancherel_study, reconstruct_streaming, scale_rapidity_diagram, DiagramConfig,
    FrequencyCalibration, MuSampling, PhiAxis, ScaleAxis,
};
use apwt::wavelets::{admissibility_constant, gaussian_packet_at_rest, mother_time_slice, AdmissibilityConstant, QuadratureControl};
use apwt::{BoundarySignal, Grid2D, MotherSpec, Sector, Spectrum};

use crate::oracle::{axis_angle, direct_apwt_on_grid, ellipse_eigen, gaussian_packet, D1Wavelet};
use crate::Check;

/// Deliberate faults for negative controls.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tamper {
    /// Multiplies the mother spectrum by this factor when computing `C₁`
    /// (so `C₁` scales by its square) while the analysis keeps the true mother.
    pub mother_normalization: Option<f64>,
}

fn finish(id: u8, name: &str, passed: bool, budget: Duration, start: Instant, detail: String) -> Check {
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    Check {
        id,
        name: name.to_string(),
        passed: passed && in_time,
        seconds: elapsed.as_secs_f64(),
        budget_seconds: budget.as_secs_f64(),
        detail: if in_time { detail } else { format!("{detail}; over time budget") },
    }
}

fn failed(id: u8, name: &str, budget: Duration, start: Instant, err: impl std::fmt::Display) -> Check {
    finish(id, name, false, budget, start, format!("error: {err}"))
}

fn random_signal(grid: Grid2D, seed: u64) -> BoundarySignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BoundarySignal::from_fn(grid, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .expect("finite samples")
}

/// Band-limited sector-1 packet: Gaussian spectrum centred on `center`, cut to the sector.
pub fn spectral_packet(grid: Grid2D, center: (f64, f64), width: f64) -> BoundarySignal {
    let fhat = Spectrum::from_fn(grid, |s| {
        if !Sector::D1.contains(s) {
            return Complex64::new(0.0, 0.0);
        }
        let r2 = (s.k - center.0).powi(2) + (s.kx - center.1).powi(2);
        Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
    })
    .expect("finite spectrum");
    inverse_fourier(&fhat)
}

/// Mother of the Plancherel and reconstruction checks.
pub fn analysis_mother() -> MotherSpec {
    MotherSpec::new(Sector::D1, 4.0, 1.0, 2.0).expect("valid mother")
}

fn admissibility(spec: &MotherSpec, tamper: Tamper) -> apwt::Result<AdmissibilityConstant> {
    let mut c = admissibility_constant(spec, &QuadratureControl::default())?;
    if let Some(g) = tamper.mother_normalization {
        c.value *= g * g;
    }
    Ok(c)
}

pub fn parseval() -> Check {
    const NAME: &str = "Parseval identity on random grids";
    let (start, budget) = (Instant::now(), Duration::from_secs(1));
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (n, seed) in [(64, 1), (513, 2)] {
        let grid = Grid2D::centered(n, n, 0.5, 0.5).expect("grid");
        let f = random_signal(grid, seed);
        let fhat = forward_fourier(&f);
        let lhs = fhat.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dual_cell_area();
        let rhs = 4.0 * PI * PI * f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.cell_area();
        let rel = (lhs / rhs - 1.0).abs();
        worst = worst.max(rel);
        parts.push(format!("{n}x{n}: |ratio-1| = {rel:.2e}"));
    }
    finish(1, NAME, worst <= 1e-12, budget, start, parts.join(", "))
}

/// Grid and packet shared by the Plancherel and reconstruction checks.
pub fn plancherel_setup() -> (Grid2D, BoundarySignal) {
    let grid = Grid2D::centered(256, 256, 0.5, 0.5).expect("grid");
    (grid, spectral_packet(grid, (2.0, 0.5), 0.2))
}

pub fn plancherel(tamper: Tamper) -> Check {
    const NAME: &str = "Plancherel ratio at production sampling";
    let (start, budget) = (Instant::now(), Duration::from_secs(300));
    let run = || -> apwt::Result<(bool, String)> {
        let (_, f) = plancherel_setup();
        let spec = analysis_mother();
        let c = admissibility(&spec, tamper)?;
        let (a0, _) = dominant_parameters(&forward_fourier(&f), &spec)?;
        let ladder = MuSampling::refinement_ladder(a0)?;
        let study = plancherel_study(&f, &spec, &ladder, &c)?;
        let ratios: Vec<String> = study.reports.iter().map(|r| format!("{:.6}", r.ratio)).collect();
        let production = study.reports[1].ratio;
        let ok = (0.98..=1.02).contains(&production) && study.monotone;
        Ok((ok, format!("ratios coarse/production/fine = [{}], monotone = {}", ratios.join(", "), study.monotone)))
    };
    match run() {
        Ok((ok, detail)) => finish(2, NAME, ok, budget, start, detail),
        Err(e) => failed(2, NAME, budget, start, e),
    }
}

pub fn reconstruction() -> Check {
    const NAME: &str = "Reconstruction round trip";
    let (start, budget) = (Instant::now(), Duration::from_secs(600));
    let run = || -> apwt::Result<(bool, String)> {
        let (_, f) = plancherel_setup();
        let spec = analysis_mother();
        let c = admissibility(&spec, Tamper::default())?;
        let fhat = forward_fourier(&f);
        let target = inverse_fourier(&sector_mask(&fhat, Sector::D1));
        let (a0, _) = dominant_parameters(&fhat, &spec)?;
        let ladder = MuSampling::refinement_ladder(a0)?;
        let mut errors = Vec::new();
        for sampling in &ladder {
            let u = reconstruct_streaming(&f, &spec, sampling, &c, 0.0)?;
            errors.push(u.relative_l2_error(&target)?);
        }
        let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
        let ok = errors[1] < 0.05 && decreasing;
        let shown: Vec<String> = errors.iter().map(|e| format!("{e:.3e}")).collect();
        Ok((ok, format!("relative L2 errors coarse/production/fine = [{}]", shown.join(", "))))
    };
    match run() {
        Ok((ok, detail)) => finish(3, NAME, ok, budget, start, detail),
        Err(e) => failed(3, NAME, budget, start, e),
    }
}

pub fn oracle_equivalence() -> Check {
    const NAME: &str = "Slab transform vs coordinate-space double sum";
    let (start, budget) = (Instant::now(), Duration::from_secs(60));
    let run = || -> apwt::Result<(bool, String)> {
        let grid = Grid2D::centered(64, 64, 0.5, 0.5)?;
        let f = random_signal(grid, 4);
        let w = D1Wavelet { kappa: 4.0, sigma_par: 1.0, sigma_perp: 2.0 };
        let spec = MotherSpec::new(Sector::D1, w.kappa, w.sigma_par, w.sigma_perp)?;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst: f64 = 0.0;
        for _ in 0..16 {
            let a = rng.random_range(0.6..3.0);
            let phi = rng.random_range(-1.0..1.0);
            let (m, n) = (rng.random_range(0..64usize), rng.random_range(0..64usize));
            let slab = apwt_slab(&f, &spec, a, phi)?;
            let reference = direct_apwt_on_grid(&f, &w, (grid.ct(m), grid.x(n)), a, phi);
            worst = worst.max((slab[[m, n]] - reference).norm() / reference.norm());
        }
        Ok((worst <= 1e-9, format!("worst relative difference over 16 random points = {worst:.2e}")))
    };
    match run() {
        Ok((ok, detail)) => finish(4, NAME, ok, budget, start, detail),
        Err(e) => failed(4, NAME, budget, start, e),
    }
}

/// `(ω, φ)` of the six source groups.
pub const SIX_GROUPS: [(f64, f64); 6] = [(1.0, 0.4), (1.0, 0.7), (1.0, 0.5), (0.9, 0.3), (0.95, 0.5), (0.95, 0.4)];

/// Assignment of detected `(ω, φ)` peaks to expected groups that minimises
/// the summed scaled distance; returns `perm[g]` = peak index for group `g`.
pub fn match_groups(expected: &[(f64, f64)], found: &[(f64, f64)]) -> Option<Vec<usize>> {
    if expected.len() != found.len() {
        return None;
    }
    let cost = |g: usize, p: usize| ((expected[g].0 - found[p].0) / 0.05).powi(2) + ((expected[g].1 - found[p].1) / 0.05).powi(2);
    let n = expected.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p| {
        let c: f64 = p.iter().enumerate().map(|(g, &i)| cost(g, i)).sum();
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, p.to_vec()));
        }
    });
    best.map(|(_, p)| p)
}

fn permute(v: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

pub fn six_group_experiment() -> Check {
    const NAME: &str = "Six-group moving-source experiment";
    let (start, budget) = (Instant::now(), Duration::from_secs(900));
    let run = || -> apwt::Result<(bool, String)> {
        let config = ExperimentConfig::six_groups();
        let field = experiment_field(&config)?;
        let grid = *field.signal.grid();
        let dc = DiagramConfig::moving_source();
        let cal = calibrate_frequency(&dc.mother, &grid, config.c)?;
        let d = dc.diagram(&forward_fourier(&field.signal))?;
        let peaks = dc.dominant_peaks(&d, &cal)?;
        let found: Vec<(f64, f64)> = peaks.iter().map(|p| (p.omega, p.phi)).collect();
        let mut detail = format!("kappa_eff = {:.5}, {} dominant maxima", cal.kappa_eff, peaks.len());
        let Some(perm) = match_groups(&SIX_GROUPS, &found) else {
            let shown: Vec<String> = found.iter().map(|(w, p)| format!("({w:.3}, {p:.3})")).collect();
            return Ok((false, format!("{detail}: {}", shown.join(" "))));
        };
        let mut ok = true;
        for (g, &(omega, phi)) in SIX_GROUPS.iter().enumerate() {
            let (w, p) = found[perm[g]];
            let (dphi, dw) = ((p - phi).abs(), (w / omega - 1.0).abs());
            ok &= dphi <= 0.05 && dw <= 0.05;
            detail.push_str(&format!("; ({omega}, {phi}) -> ({w:.4}, {p:.4})"));
        }
        Ok((ok, detail))
    };
    match run() {
        Ok((ok, detail)) => finish(5, NAME, ok, budget, start, detail),
        Err(e) => failed(5, NAME, budget, start, e),
    }
}

pub fn propagator() -> Check {
    const NAME: &str = "Half-plane propagator";
    let (start, budget) = (Instant::now(), Duration::from_secs(60));
    let run = || -> apwt::Result<(bool, String)> {
        let grid = Grid2D::centered(64, 64, 0.5, 0.5)?;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = Spectrum::from_fn(grid, |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))?;
        let (mut semigroup, mut modulus): (f64, f64) = (0.0, 0.0);
        for sector in Sector::ALL {
            let sj = sector_mask(&s, sector);
            let two = propagate(&propagate(&sj, sector, 0.7)?, sector, 1.9)?;
            let one = propagate(&sj, sector, 2.6)?;
            for (x, y) in two.values().iter().zip(one.values()) {
                semigroup = semigroup.max((x - y).norm() / (1.0 + y.norm()));
            }
            if sector.is_propagating() {
                let far = propagate(&sj, sector, 13.7)?;
                for (x, y) in far.values().iter().zip(sj.values()) {
                    if y.norm() > 0.0 {
                        modulus = modulus.max((x.norm() / y.norm() - 1.0).abs());
                    }
                }
            }
        }
        let smooth = Spectrum::from_fn(grid, |sg| {
            let r2 = (sg.k - 2.0).powi(2) + (sg.kx - 0.5).powi(2);
            Complex64::new((-r2 / 0.5).exp(), 0.0)
        })?;
        let study = residual_convergence(&sector_mask(&smooth, Sector::D1), Sector::D1, 2.0, 0.02, 3)?;
        let ok = semigroup <= 1e-12 && modulus <= 1e-12 && study.extrapolated < 1e-8;
        Ok((
            ok,
            format!(
                "semigroup {semigroup:.2e}, unimodularity {modulus:.2e}, residuals {:?}, order {:.3}, extrapolated {:.2e}",
                study.residuals.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>(),
                study.observed_order,
                study.extrapolated
            ),
        ))
    };
    match run() {
        Ok((ok, detail)) => finish(6, NAME, ok, budget, start, detail),
        Err(e) => failed(6, NAME, budget, start, e),
    }
}

/// Mother of the kinematics check: `κ = 16`, `σ∥ = σ⊥ = √2`.
pub fn kinematics_mother() -> MotherSpec {
    MotherSpec::new(Sector::D1, 16.0, 2f64.sqrt(), 2f64.sqrt()).expect("valid mother")
}

/// Window over `(y, x)` for the kinematics check.
pub fn kinematics_window() -> Grid2D {
    Grid2D::new(320, 128, 0.0625, 0.125, (-6.0, -8.0)).expect("window")
}

pub fn kinematics() -> Check {
    const NAME: &str = "Packet kinematics of the mother solution";
    let (start, budget) = (Instant::now(), Duration::from_secs(60));
    let run = || -> apwt::Result<(bool, String)> {
        let spec = kinematics_mother();
        let window = kinematics_window();
        let slice = mother_time_slice(&spec, 0.0, &window)?;
        let reference = ndarray::Array2::from_shape_fn(window.shape(), |(m, n)| {
            gaussian_packet_at_rest(&spec, window.x(n), window.ct(m))
        });
        let base: f64 = reference.iter().map(|r| r.norm_sqr()).sum();
        let diff: f64 = slice.values.iter().zip(&reference).map(|(v, r)| (v - r).norm_sqr()).sum();
        let shape_error = (diff / base).sqrt();
        // same comparison after the best complex rescaling, to separate amplitude from shape
        let gain = slice.values.iter().zip(&reference).map(|(v, r)| r.conj() * v).sum::<Complex64>() / base;
        let scaled: f64 = slice.values.iter().zip(&reference).map(|(v, r)| (v - gain * r).norm_sqr()).sum();
        let scaled_error = (scaled / base).sqrt();
        let times = [0.0, 2.5, 5.0, 7.5];
        let ys: Vec<f64> = times
            .iter()
            .map(|&ct| mother_time_slice(&spec, ct, &window).map(|s| s.centroid().1))
            .collect::<apwt::Result<_>>()?;
        let mean_t = times.iter().sum::<f64>() / times.len() as f64;
        let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
        let num: f64 = times.iter().zip(&ys).map(|(t, y)| (t - mean_t) * (y - mean_y)).sum();
        let den: f64 = times.iter().map(|t| (t - mean_t).powi(2)).sum();
        let speed = num / den;
        let ok = shape_error <= 0.03 && (speed - 1.0).abs() <= 0.05;
        Ok((ok, format!(
                "ct=0 relative L2 vs Gaussian packet = {shape_error:.4} (after best rescaling {scaled_error:.4}, |gain| = {:.4}), centroid speed = {speed:.4} c",
                gain.norm()
            )))
    };
    match run() {
        Ok((ok, detail)) => finish(7, NAME, ok, budget, start, detail),
        Err(e) => failed(7, NAME, budget, start, e),
    }
}

pub fn ellipse_geometry() -> Check {
    const NAME: &str = "Packet ellipse eigen-geometry";
    let (start, budget) = (Instant::now(), Duration::from_secs(1));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut eig, mut axes, mut product): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let alpha = rng.random_range(0.2..5.0);
        let beta = rng.random_range(0.2..5.0);
        let phi = rng.random_range(-2.0..2.0);
        let e = match packet_ellipse(alpha, beta, phi, (0.0, 0.0)) {
            Ok(e) => e,
            Err(err) => return failed(8, NAME, budget, start, err),
        };
        let (l1, v1, l2, v2) = ellipse_eigen(alpha, beta, phi);
        eig = eig.max(((e.lambda1 - l1) / l1).abs()).max(((e.lambda2 - l2) / l2).abs());
        // axes are only defined when the eigenvalues are distinct
        if (l1 - l2) > 1e-6 * l1 {
            axes = axes.max(axis_angle(e.axis1, v1)).max(axis_angle(e.axis2, v2));
        }
        let ch = phi.cosh();
        product = product.max((e.lambda1 * e.lambda2 / (alpha * alpha * beta * beta * ch * ch) - 1.0).abs());
    }
    let mut circle: f64 = 0.0;
    let mut circle_axes: f64 = 0.0;
    for i in 0..=40 {
        let phi = -2.0 + 0.1 * i as f64;
        let e = packet_ellipse(1.0, 1.0, phi, (0.0, 0.0)).expect("valid ellipse");
        let ch = phi.cosh();
        let (big, small) = (phi.abs().exp() * ch, (-phi.abs()).exp() * ch);
        circle = circle.max(((e.lambda1 - big) / big).abs()).max(((e.lambda2 - small) / small).abs());
        if phi != 0.0 {
            // (-e^{φ}, 1) carries e^{φ}cosh φ and (e^{-φ}, 1) carries e^{-φ}cosh φ
            let (hi, lo) = if phi > 0.0 { ([-phi.exp(), 1.0], [(-phi).exp(), 1.0]) } else { ([(-phi).exp(), 1.0], [-phi.exp(), 1.0]) };
            circle_axes = circle_axes.max(axis_angle(e.axis1, hi)).max(axis_angle(e.axis2, lo));
        }
    }
    let ok = eig <= 1e-10 && axes <= 1e-10 && circle <= 1e-12 && circle_axes <= 1e-10 && product <= 1e-10;
    finish(
        8,
        NAME,
        ok,
        budget,
        start,
        format!(
            "eigenvalues {eig:.1e}, axis angle {axes:.1e}, equal-width eigenvalues {circle:.1e}, equal-width axes {circle_axes:.1e}, product {product:.1e}"
        ),
    )
}

pub fn covariance() -> Check {
    const NAME: &str = "Boost and dilation covariance of the diagram";
    let (start, budget) = (Instant::now(), Duration::from_secs(300));
    let run = || -> apwt::Result<(bool, String)> {
        let grid = Grid2D::centered(128, 128, 0.5, 0.5)?;
        let spec = analysis_mother();
        let scale = ScaleAxis::new(1.0, 4.0, 81)?;
        let phi = PhiAxis::new(-0.6, 1.2, 91)?;
        let (a_axis, phi_axis) = (scale.values(), phi.values());
        let (dlog_a, dphi) = (scale.ratio().ln(), phi.step());
        let cal = FrequencyCalibration::nominal(&spec, 1.0);
        let peak = |f: &BoundarySignal| -> apwt::Result<(f64, f64)> {
            let d = scale_rapidity_diagram(f, &spec, &a_axis, &phi_axis)?;
            let top = apwt::transform::detect_peaks(&d, 1, &cal)?;
            let p = top.peaks.first().ok_or_else(|| apwt::ApwtError::Degenerate("empty diagram".into()))?;
            Ok((p.a, p.phi))
        };
        let sigma0 = (2.0, 0.4);
        let base = peak(&gaussian_packet(grid, 4.0, sigma0, |t, x| (t, x)))?;
        let mut ok = true;
        let mut detail = format!("reference peak (a, phi) = ({:.4}, {:.4})", base.0, base.1);
        for psi in [0.3, -0.25] {
            // f(Λ_ψ χ), Λ_ψ = [[cosh ψ, -sinh ψ], [-sinh ψ, cosh ψ]]: the copy moving with rapidity ψ
            let (ch, sh) = (f64::cosh(psi), f64::sinh(psi));
            let g = gaussian_packet(grid, 4.0, sigma0, |t, x| (ch * t - sh * x, -sh * t + ch * x));
            let p = peak(&g)?;
            let miss = (p.1 - base.1 - psi).abs();
            ok &= miss <= dphi && ((p.0 / base.0).ln()).abs() <= dlog_a;
            detail.push_str(&format!("; boost {psi}: phi shift {:.4} (cell {dphi:.3})", p.1 - base.1));
        }
        for s in [1.5, 0.8] {
            let g = gaussian_packet(grid, 4.0, sigma0, |t, x| (t / s, x / s));
            let p = peak(&g)?;
            let miss = ((p.0 / (s * base.0)).ln()).abs();
            ok &= miss <= dlog_a && (p.1 - base.1).abs() <= dphi;
            detail.push_str(&format!("; dilation {s}: a ratio {:.4}", p.0 / base.0));
        }
        Ok((ok, detail))
    };
    match run() {
        Ok((ok, detail)) => finish(9, NAME, ok, budget, start, detail),
        Err(e) => failed(9, NAME, budget, start, e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_recovers_a_shuffled_assignment() {
        let found: Vec<(f64, f64)> = [3, 0, 5, 1, 4, 2].iter().map(|&i| SIX_GROUPS[i]).collect();
        let perm = match_groups(&SIX_GROUPS, &found).unwrap();
        for (g, &p) in perm.iter().enumerate() {
            assert_eq!(found[p], SIX_GROUPS[g]);
        }
        assert!(match_groups(&SIX_GROUPS, &found[..5]).is_none());
    }
}
