//! Affine Poincaré wavelet transform (APWT) for boundary data of the
//! 2+1D wave equation `u_tt = c²(u_xx + u_yy)` on the half-plane `y ≥ 0`.
//!
//! Boundary data `f(ct, x)` is decomposed over four cone sectors of the
//! `(ω/c, k_x)` plane. Each sector is analysed with a family of wave packets
//! generated from a Gaussian mother solution by translations, dilations and
//! Lorentz boosts along `x`. The crate covers
//!
//! * [`lattice`]: uniform grids, the Minkowski-convention 2D Fourier transform
//!   and sector masks,
//! * [`geometry`]: boosts, hyperbolic coordinates and packet-ellipse distortion,
//! * [`wavelets`]: mother solutions, the wavelet family and admissibility constants,
//! * [`transform`]: the forward transform, the Plancherel check, reconstruction
//!   and the scale-rapidity diagram,
//! * [`field`]: propagation of boundary data into `y > 0`,
//! * [`sources`]: synthetic fields of moving monochromatic sources,
//! * [`apwf`]: the `APWF/1` binary array container.
//!
//! Units: `c = 1` unless a configuration says otherwise; time enters as `ct`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apwf;
pub mod error;
pub mod field;
pub mod geometry;
pub mod lattice;
pub mod sources;
pub mod transform;
pub mod wavelets;

mod fft;

pub use error::{ApwtError, Result};
pub use geometry::{Event, Wavevector};
pub use lattice::{BoundarySignal, Grid2D, Sector, Spectrum};
pub use num_complex::Complex64;
pub use wavelets::{MotherSpec, WaveletPoint};

/// Default wave speed. All lengths and times are measured so that `c = 1`.
pub const DEFAULT_WAVE_SPEED: f64 = 1.0;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
