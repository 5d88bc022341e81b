//! Boundary fields of moving monochromatic point sources.
//!
//! Each source is a 2D outgoing cylindrical wave in its rest frame, taken in
//! the far-field form `√(2c/(πωr)) e^{-iπ/4} e^{i(ω/c)r - iωt}`, sitting at
//! depth `y_s < 0` and moving along `x`. The observation line is `y = 0`.
//! Lab coordinates are mapped to the rest frame with `Λ_φ`; `y` is unchanged
//! by a boost along `x`.

use std::f64::consts::PI;

use log::info;
use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ApwtError, Result};
use crate::lattice::{forward_fourier, BoundarySignal, Grid2D};
use crate::transform::{detect_peaks, scale_rapidity_diagram_spectrum, FrequencyCalibration};
use crate::wavelets::MotherSpec;

/// Smallest `ωr/c` for which the far-field form is accepted.
pub const NEAR_FIELD_LIMIT: f64 = 20.0;

/// Where the sources of a group sit at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum XOffsets {
    /// Explicit positions, one per source.
    Explicit(Vec<f64>),
    /// `n_sources` evenly spaced positions covering `[min, max]`.
    Uniform { min: f64, max: f64 },
}

impl Default for XOffsets {
    fn default() -> Self {
        XOffsets::Uniform { min: 0.0, max: 0.0 }
    }
}

impl XOffsets {
    pub fn positions(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            XOffsets::Explicit(v) if v.len() == n => Ok(v.clone()),
            XOffsets::Explicit(v) => Err(ApwtError::InvalidParameter(format!(
                "{} explicit x offsets for {n} sources",
                v.len()
            ))),
            XOffsets::Uniform { min, max } => {
                if !(min.is_finite() && max.is_finite() && min <= max) {
                    return Err(ApwtError::InvalidParameter(format!("bad offset range [{min}, {max}]")));
                }
                if n == 1 {
                    return Ok(vec![0.5 * (min + max)]);
                }
                Ok((0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect())
            }
        }
    }
}

fn default_speed_sigma() -> f64 {
    0.01
}

fn default_n_sources() -> usize {
    32
}

fn default_depth() -> f64 {
    -5000.0
}

fn default_c() -> f64 {
    crate::DEFAULT_WAVE_SPEED
}

/// Sources sharing a rest-frame frequency and a mean rapidity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceGroup {
    pub omega: f64,
    pub phi_mean: f64,
    /// Standard deviation of the speeds, as a fraction of `c`.
    #[serde(default = "default_speed_sigma")]
    pub speed_sigma: f64,
    #[serde(default = "default_n_sources")]
    pub n_sources: usize,
    #[serde(default = "default_depth")]
    pub depth: f64,
    #[serde(default)]
    pub x_offsets: XOffsets,
    /// Mixed into the experiment seed for this group.
    #[serde(default)]
    pub seed: u64,
}

impl SourceGroup {
    pub fn new(omega: f64, phi_mean: f64) -> Self {
        Self {
            omega,
            phi_mean,
            speed_sigma: default_speed_sigma(),
            n_sources: default_n_sources(),
            depth: default_depth(),
            x_offsets: XOffsets::default(),
            seed: 0,
        }
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let bad = |what: String| Err(ApwtError::InvalidParameter(format!("groups[{index}].{what}")));
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad(format!("omega must be positive, got {}", self.omega));
        }
        if !self.phi_mean.is_finite() || self.phi_mean.tanh().abs() >= 1.0 {
            return bad(format!("phi_mean must give |v| < c, got {}", self.phi_mean));
        }
        if !(self.speed_sigma >= 0.0 && self.speed_sigma.is_finite()) {
            return bad(format!("speed_sigma must be nonnegative, got {}", self.speed_sigma));
        }
        if self.n_sources == 0 {
            return bad("n_sources must be at least 1".into());
        }
        if !(self.depth < 0.0 && self.depth.is_finite()) {
            return bad(format!("depth must be negative, got {}", self.depth));
        }
        self.x_offsets.positions(self.n_sources).map_err(|e| ApwtError::InvalidParameter(format!("groups[{index}].x_offsets: {e}")))?;
        Ok(())
    }
}

/// Grid as either `{half_extent, step}` (symmetric, both axes) or explicit fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Symmetric { half_extent: f64, step: f64 },
    Explicit { n_t: usize, n_x: usize, dt: f64, dx: f64, origin: (f64, f64) },
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<Grid2D> {
        match *self {
            GridConfig::Symmetric { half_extent, step } => Grid2D::symmetric(half_extent, step),
            GridConfig::Explicit { n_t, n_x, dt, dx, origin } => Grid2D::new(n_t, n_x, dt, dx, origin),
        }
    }
}

/// A full moving-source experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub groups: Vec<SourceGroup>,
    pub grid: GridConfig,
    pub seed: u64,
    #[serde(default = "default_c")]
    pub c: f64,
}

impl ExperimentConfig {
    /// Six groups, mesh `-128…128` step `0.5` in `ct` and `x`.
    pub fn six_groups() -> Self {
        let groups = [(1.0, 0.4), (1.0, 0.7), (1.0, 0.5), (0.9, 0.3), (0.95, 0.5), (0.95, 0.4)]
            .iter()
            .map(|&(omega, phi)| SourceGroup::new(omega, phi))
            .collect();
        Self { groups, grid: GridConfig::Symmetric { half_extent: 128.0, step: 0.5 }, seed: 2011, c: 1.0 }
    }

    pub fn validate(&self) -> Result<Grid2D> {
        if self.groups.is_empty() {
            return Err(ApwtError::InvalidParameter("groups: at least one source group is required".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(ApwtError::InvalidParameter(format!("c must be positive, got {}", self.c)));
        }
        for (i, g) in self.groups.iter().enumerate() {
            g.validate(i)?;
        }
        self.grid.to_grid()
    }
}

/// One moving source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSource {
    pub omega: f64,
    pub phi: f64,
    pub x_s: f64,
    pub depth: f64,
}

impl PointSource {
    #[inline]
    fn value(&self, ct: f64, x: f64, c: f64, ch: f64, sh: f64) -> Complex64 {
        let dx = x - self.x_s;
        let ct_rest = ch * ct - sh * dx;
        let x_rest = ch * dx - sh * ct;
        let r = x_rest.hypot(self.depth);
        let amp = (2.0 * c / (PI * self.omega * r)).sqrt();
        Complex64::from_polar(amp, self.omega / c * (r - ct_rest) - 0.25 * PI)
    }

    /// Smallest `ωr'/c` over the grid.
    fn min_kr(&self, grid: &Grid2D, c: f64) -> f64 {
        let (ch, sh) = (self.phi.cosh(), self.phi.sinh());
        // x' is affine in (ct, x): its minimum modulus over the grid box is
        // zero if it changes sign, otherwise at a corner
        let t_end = grid.ct(grid.n_t - 1);
        let x_end = grid.x(grid.n_x - 1);
        let corners = [(grid.origin.0, grid.origin.1), (grid.origin.0, x_end), (t_end, grid.origin.1), (t_end, x_end)];
        let xs: Vec<f64> = corners.iter().map(|&(t, x)| ch * (x - self.x_s) - sh * t).collect();
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let x_min = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { lo.abs().min(hi.abs()) };
        self.omega * x_min.hypot(self.depth) / c
    }
}

/// Sum of the traces of `sources` on `grid`, in the given order at every sample.
pub fn superpose(sources: &[PointSource], grid: &Grid2D, c: f64) -> Result<BoundarySignal> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(ApwtError::InvalidParameter(format!("c must be positive, got {c}")));
    }
    for s in sources {
        if !(s.omega > 0.0 && s.omega.is_finite()) {
            return Err(ApwtError::InvalidParameter(format!("omega must be positive, got {}", s.omega)));
        }
        if !(s.phi.is_finite() && s.phi.tanh().abs() < 1.0) {
            return Err(ApwtError::InvalidParameter(format!("rapidity must give |v| < c, got {}", s.phi)));
        }
        if !(s.depth < 0.0) || !s.x_s.is_finite() {
            return Err(ApwtError::InvalidParameter(format!("source depth must be negative, got {}", s.depth)));
        }
        let kr = s.min_kr(grid, c);
        if kr < NEAR_FIELD_LIMIT {
            return Err(ApwtError::NearField { kr, limit: NEAR_FIELD_LIMIT });
        }
    }
    let boosts: Vec<(f64, f64)> = sources.iter().map(|s| (s.phi.cosh(), s.phi.sinh())).collect();
    let rows: Vec<Vec<Complex64>> = (0..grid.n_t)
        .into_par_iter()
        .map(|m| {
            let ct = grid.ct(m);
            (0..grid.n_x)
                .map(|n| {
                    let x = grid.x(n);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (s, &(ch, sh)) in sources.iter().zip(boosts.iter()) {
                        acc += s.value(ct, x, c, ch, sh);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let values = Array2::from_shape_vec(grid.shape(), rows.into_iter().flatten().collect()).expect("row lengths");
    BoundarySignal::new(*grid, values)
}

/// Trace on `y = 0` of a source with rest-frame frequency `ω` moving with rapidity `φ`.
pub fn single_source_trace(omega: f64, phi: f64, x_s: f64, depth: f64, grid: &Grid2D, c: f64) -> Result<BoundarySignal> {
    superpose(&[PointSource { omega, phi, x_s, depth }], grid, c)
}

/// Field of an experiment together with the drawn sources.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentField {
    pub signal: BoundarySignal,
    pub sources: Vec<PointSource>,
    /// Speed draws rejected because `|v| ≥ c`.
    pub redraws: usize,
}

/// Draws the sources of every group.
pub fn draw_sources(config: &ExperimentConfig) -> Result<(Vec<PointSource>, usize)> {
    config.validate()?;
    let c = config.c;
    let mut sources = Vec::new();
    let mut redraws = 0;
    for (index, group) in config.groups.iter().enumerate() {
        let positions = group.x_offsets.positions(group.n_sources)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ group.seed);
        rng.set_stream(index as u64);
        let speeds = Normal::new(c * group.phi_mean.tanh(), group.speed_sigma * c)
            .map_err(|e| ApwtError::InvalidParameter(format!("groups[{index}]: {e}")))?;
        for &x_s in &positions {
            let phi = if group.speed_sigma == 0.0 {
                group.phi_mean
            } else {
                loop {
                    let v: f64 = speeds.sample(&mut rng);
                    if v.abs() < c {
                        break (v / c).atanh();
                    }
                    redraws += 1;
                }
            };
            sources.push(PointSource { omega: group.omega, phi, x_s, depth: group.depth });
        }
    }
    if redraws > 0 {
        info!("{redraws} speed draws with |v| >= c were redrawn");
    }
    Ok((sources, redraws))
}

pub fn experiment_field(config: &ExperimentConfig) -> Result<ExperimentField> {
    let grid = config.validate()?;
    let (sources, redraws) = draw_sources(config)?;
    let signal = superpose(&sources, &grid, config.c)?;
    Ok(ExperimentField { signal, sources, redraws })
}

/// Measures `κ_eff` in `ω = c κ_eff / a` from the diagram of a single source
/// with `ω = c`, at rest, on `grid`.
pub fn calibrate_frequency(spec: &MotherSpec, grid: &Grid2D, c: f64) -> Result<FrequencyCalibration> {
    let trace = single_source_trace(c, 0.0, 0.0, default_depth(), grid, c)?;
    let fhat = forward_fourier(&trace);
    let n = 241;
    let a_axis: Vec<f64> = (0..n).map(|i| spec.kappa * 0.8 * (1.25f64 / 0.8).powf(i as f64 / (n - 1) as f64)).collect();
    let phi_axis: Vec<f64> = (-10..=10).map(|i| 0.01 * i as f64).collect();
    let diagram = scale_rapidity_diagram_spectrum(&fhat, spec, &a_axis, &phi_axis)?;
    let nominal = FrequencyCalibration::nominal(spec, c);
    let report = detect_peaks(&diagram, 1, &nominal)?;
    let peak = report
        .peaks
        .first()
        .filter(|p| !p.on_edge)
        .ok_or_else(|| ApwtError::Degenerate("calibration diagram has no interior maximum".into()))?;
    // ω = c = c κ_eff / a_peak
    Ok(FrequencyCalibration { kappa_eff: peak.a, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Wavevector;

    fn small_grid() -> Grid2D {
        Grid2D::symmetric(32.0, 0.5).unwrap()
    }

    #[test]
    fn source_at_rest_is_mirror_symmetric() {
        let grid = small_grid();
        let f = single_source_trace(1.0, 0.0, 3.0, -5000.0, &grid, 1.0).unwrap();
        // x_s = 3 is six columns right of the centre column
        let centre = grid.n_x / 2 + 6;
        for m in [0, 40, 128] {
            for d in 1..20 {
                let (l, r) = (f.values()[[m, centre - d]], f.values()[[m, centre + d]]);
                assert!((l - r).norm() < 1e-12, "{l} vs {r}");
            }
        }
    }

    #[test]
    fn source_at_rest_is_monochromatic() {
        // ω = 1 falls on a bin when n·dt is a multiple of 2π
        let dt = 2.0 * PI / 64.0;
        let grid = Grid2D::centered(256, 8, dt, 0.5).unwrap();
        let f = single_source_trace(1.0, 0.0, 0.0, -5000.0, &grid, 1.0).unwrap();
        let fhat = forward_fourier(&f);
        let target = (0..grid.n_t).find(|&p| (grid.sigma_t(p) - 1.0).abs() < 1e-9).unwrap();
        let on: f64 = (0..grid.n_x).map(|q| fhat.values()[[target, q]].norm_sqr()).sum();
        let total: f64 = fhat.values().iter().map(|v| v.norm_sqr()).sum();
        assert!(on / total > 1.0 - 1e-10, "{}", on / total);
    }

    #[test]
    fn moving_source_peaks_on_the_boosted_frequency() {
        let grid = Grid2D::symmetric(64.0, 0.5).unwrap();
        let phi = 0.4;
        let f = single_source_trace(1.0, phi, 0.0, -5000.0, &grid, 1.0).unwrap();
        let fhat = forward_fourier(&f);
        let (mut best, mut arg) = (0.0, Wavevector::default());
        for (_, _, sigma, v) in fhat.bins() {
            if v.norm() > best {
                best = v.norm();
                arg = sigma;
            }
        }
        let (ds, dk) = grid.dual_spacing();
        assert!((arg.k - phi.cosh()).abs() <= ds, "{arg:?}");
        assert!((arg.kx - phi.sinh()).abs() <= dk, "{arg:?}");
    }

    #[test]
    fn near_field_is_rejected() {
        let grid = small_grid();
        let err = single_source_trace(1.0, 0.0, 0.0, -10.0, &grid, 1.0).unwrap_err();
        assert!(matches!(err, ApwtError::NearField { .. }));
        assert!(single_source_trace(1.0, 0.0, 0.0, 10.0, &grid, 1.0).is_err());
    }

    #[test]
    fn degenerate_group_is_a_single_trace() {
        let grid = small_grid();
        let mut group = SourceGroup::new(0.95, 0.5);
        group.n_sources = 1;
        group.speed_sigma = 0.0;
        group.x_offsets = XOffsets::Explicit(vec![7.0]);
        let config = ExperimentConfig {
            groups: vec![group],
            grid: GridConfig::Symmetric { half_extent: 32.0, step: 0.5 },
            seed: 1,
            c: 1.0,
        };
        let field = experiment_field(&config).unwrap();
        let single = single_source_trace(0.95, 0.5, 7.0, -5000.0, &grid, 1.0).unwrap();
        assert_eq!(field.signal, single);
    }

    #[test]
    fn groups_superpose_and_runs_repeat() {
        let mut config = ExperimentConfig::six_groups();
        config.grid = GridConfig::Symmetric { half_extent: 16.0, step: 0.5 };
        for g in &mut config.groups {
            g.n_sources = 3;
        }
        let all = experiment_field(&config).unwrap();
        assert_eq!(all, experiment_field(&config).unwrap());
        let mut first = config.clone();
        first.groups.truncate(1);
        let mut rest = config.clone();
        rest.groups.drain(..1);
        // group streams are indexed by position, so keep the original indices
        let (sources, _) = draw_sources(&config).unwrap();
        let a = superpose(&sources[..3], &all.signal.grid().clone(), 1.0).unwrap();
        let b = superpose(&sources[3..], &all.signal.grid().clone(), 1.0).unwrap();
        let sum = BoundarySignal::new(*a.grid(), a.values() + b.values()).unwrap();
        assert!(sum.relative_l2_error(&all.signal).unwrap() < 1e-13);
        let (first_sources, _) = draw_sources(&first).unwrap();
        assert_eq!(first_sources[..], sources[..3]);
    }

    #[test]
    fn config_validation() {
        let mut config = ExperimentConfig::six_groups();
        config.groups.clear();
        assert!(config.validate().is_err());
        let json = r#"{"groups": [{"omega": -1.0, "phi_mean": 0.1}], "grid": {"half_extent": 8.0, "step": 0.5}, "seed": 3}"#;
        let config: ExperimentConfig = serde_json::from_str(json).unwrap();
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("groups[0].omega"), "{err}");
        let json = r#"{"groups": [{"omega": 1.0, "phi_mean": 0.1, "x_offsets": [1.0, 2.0]}], "grid": {"half_extent": 8.0, "step": 0.5}, "seed": 3}"#;
        let config: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert!(config.validate().unwrap_err().to_string().contains("x_offsets"));
        let json = r#"{"groups": [{"omega": 1.0, "phi_mean": 0.1, "colour": 1}], "grid": {"half_extent": 8.0, "step": 0.5}, "seed": 3}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(json).is_err());
    }

    #[test]
    fn speed_draws_are_reproducible_and_bounded() {
        let mut config = ExperimentConfig::six_groups();
        config.groups[0].phi_mean = 3.0;
        config.groups[0].speed_sigma = 0.05;
        let (a, redraws) = draw_sources(&config).unwrap();
        let (b, _) = draw_sources(&config).unwrap();
        assert_eq!(a, b);
        assert!(redraws > 0);
        assert!(a.iter().all(|s| s.phi.tanh().abs() < 1.0));
        let mut other = config.clone();
        other.seed += 1;
        assert_ne!(draw_sources(&other).unwrap().0, a);
    }
}
