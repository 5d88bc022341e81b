//! Centered-grid DFT helpers shared by the lattice, wavelet and field modules.
//!
//! A centered axis with `n` samples, spacing `dz` and first sample `z0` has a
//! dual axis `ξ_p = (p - n/2) dξ`, `dξ = 2π/(n dz)`. Analysis computes
//! `Σ_m v[m] e^{s i ξ_p z_m}` and synthesis computes `Σ_p v[p] e^{s i ξ_p z_m}`
//! for a kernel sign `s = ±1`; both map onto a plain unnormalised DFT plus an
//! index rotation and the origin phase `e^{s i ξ_p z0}`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum KernelSign {
    Plus,
    Minus,
}

impl KernelSign {
    fn direction(self) -> FftDirection {
        match self {
            KernelSign::Plus => FftDirection::Inverse,
            KernelSign::Minus => FftDirection::Forward,
        }
    }

    fn value(self) -> f64 {
        match self {
            KernelSign::Plus => 1.0,
            KernelSign::Minus => -1.0,
        }
    }
}

/// One axis of a centered grid.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CenteredAxis {
    pub n: usize,
    pub spacing: f64,
    pub origin: f64,
}

impl CenteredAxis {
    pub fn dual_spacing(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.spacing)
    }

    /// Dual coordinate of index `p`; the zero frequency sits at `n/2`.
    pub fn dual(&self, p: usize) -> f64 {
        (p as f64 - (self.n / 2) as f64) * self.dual_spacing()
    }
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// Applies `op` to every lane of `values` along `axis`, using a scratch copy
/// for non-contiguous lanes.
fn for_each_lane(values: &mut Array2<Complex64>, axis: Axis, mut op: impl FnMut(&mut [Complex64])) {
    let mut buf = vec![Complex64::new(0.0, 0.0); values.len_of(axis)];
    for mut lane in values.lanes_mut(axis) {
        if let Some(slice) = lane.as_slice_mut() {
            op(slice);
        } else {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            op(&mut buf);
            for (v, b) in lane.iter_mut().zip(buf.iter()) {
                *v = *b;
            }
        }
    }
}

fn origin_phases(axis: &CenteredAxis, sign: KernelSign) -> Vec<Complex64> {
    (0..axis.n)
        .map(|p| Complex64::from_polar(1.0, sign.value() * axis.dual(p) * axis.origin))
        .collect()
}

/// Coordinate → dual along `axis_index` with kernel `e^{s i ξ z}`.
pub(crate) fn analyse_axis(values: &mut Array2<Complex64>, axis_index: usize, axis: &CenteredAxis, sign: KernelSign) {
    let n = axis.n;
    let half = n / 2;
    let fft = plan(n, sign.direction());
    let phases = origin_phases(axis, sign);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut rotated = vec![Complex64::new(0.0, 0.0); n];
    for_each_lane(values, Axis(axis_index), |lane| {
        fft.process_with_scratch(lane, &mut scratch);
        // out[p] = X[(p - n/2) mod n]
        for (p, r) in rotated.iter_mut().enumerate() {
            *r = lane[(p + n - half) % n] * phases[p];
        }
        lane.copy_from_slice(&rotated);
    });
}

/// Dual → coordinate along `axis_index` with kernel `e^{s i ξ z}`.
pub(crate) fn synthesise_axis(values: &mut Array2<Complex64>, axis_index: usize, axis: &CenteredAxis, sign: KernelSign) {
    let n = axis.n;
    let half = n / 2;
    let fft = plan(n, sign.direction());
    let phases = origin_phases(axis, sign);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut rotated = vec![Complex64::new(0.0, 0.0); n];
    for_each_lane(values, Axis(axis_index), |lane| {
        // g[(p - n/2) mod n] = v[p] e^{s i ξ_p z0}
        for (p, v) in lane.iter().enumerate() {
            rotated[(p + n - half) % n] = *v * phases[p];
        }
        lane.copy_from_slice(&rotated);
        fft.process_with_scratch(lane, &mut scratch);
    });
}
