use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("refractive index must be >= 1, got {0}")]
    RefractiveIndex(f64),
    #[error("scale factor alpha must be > 0, got {0}")]
    Scale(f64),
    #[error("configuration parameter R must lie in [-1, 1], got {0}")]
    Asymmetry(f64),
    #[error("atom sits on a mirror (|R| = 1); closed orbits are degenerate")]
    AtomOnMirror,
    #[error("empty or inverted window [{start}, {stop}]")]
    EmptyWindow { start: f64, stop: f64 },
    #[error("step must be positive and finite, got {0}")]
    Step(f64),
    #[error("sample grid is not uniform: spacing {found} at index {index}, expected {expected}")]
    NonUniform {
        index: usize,
        found: f64,
        expected: f64,
    },
    #[error("curve needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("alphas and rates differ in length ({alphas} vs {rates})")]
    LengthMismatch { alphas: usize, rates: usize },
    #[error("negative rate {rate} at alpha = {alpha}")]
    NegativeRate { alpha: f64, rate: f64 },
    #[error("gamma grid must start above zero, got {0}")]
    GammaStart(f64),
    #[error("action must be positive, got {0}")]
    Action(f64),
    #[error("field point coincides with the dipole")]
    ZeroDistance,
    #[error("mode branch index must be >= 1, got {0}")]
    ModeBranch(u32),
    #[error("position z = {z} lies outside the cavity of width {separation}")]
    OutsideCavity { z: f64, separation: f64 },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
