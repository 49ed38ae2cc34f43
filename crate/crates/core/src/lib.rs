//! Spontaneous emission of a dipole oriented parallel to two perfect plane
//! mirrors, in a medium of refractive index `n`.
//!
//! Two routes to the same rate live side by side:
//!
//! * [`cavity`]: the golden-rule mode sum over the discrete cavity branches,
//!   with [`modes`] providing an independent numerical evaluation built from
//!   the mode functions themselves.
//! * [`orbits`]: a semiclassical sum over photon closed orbits, each a ray that
//!   leaves the atom, bounces between the mirrors and returns.
//!
//! [`spectral`] connects the two: it Fourier-transforms the rate as a function
//! of the scale factor and locates peaks at the closed-orbit actions.
//! [`fields`] checks the single-mirror case at the level of dipole fields.
//!
//! Units are normalized throughout. Lengths are measured in units of the
//! vacuum wavelength `λ₀` (so `k₀ = 2π`), rates in units of the vacuum rate.

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod check;
pub mod error;
pub mod fields;
pub mod io;
pub mod modes;
pub mod orbits;
pub mod spectral;

pub use cavity::{
    background_rate, golden_rule_rate, mode_count, sample_rate_curve, CavityConfig, RateCurve,
};
pub use error::{Error, Result};
pub use orbits::{
    enumerate_orbits, group_degenerate, predicted_peaks, semiclassical_rate, ClosedOrbit,
    OrbitFamily, OrbitGroup, PhaseConvention, PredictedPeak,
};
pub use spectral::{
    find_peaks, match_peaks, modified_fourier_transform, r_sweep, validate_sampling, GammaGrid,
    MatchReport, Peak, PeakSearch, Spectrum,
};
