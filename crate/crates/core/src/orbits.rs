//! Photon closed orbits between the mirrors and the semiclassical rate.
//!
//! A ray leaving the atom along the mirror normal returns to it after
//! bouncing off one mirror, off both in turn, and so on. Four families cover
//! all of them (lengths in units of `α`):
//!
//! | family          | length       | reflections |
//! |-----------------|--------------|-------------|
//! | `UpperFirst`    | `2k + 1 − R` | `2k + 1`    |
//! | `LowerFirst`    | `2k + 1 + R` | `2k + 1`    |
//! | `RoundTripUp`   | `2k`         | `2k`        |
//! | `RoundTripDown` | `2k`         | `2k`        |
//!
//! Orbits are ordered by action, ties broken by family in the order above.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::Serialize;

use crate::cavity::CavityConfig;
use crate::error::{Error, Result};

/// Relative tolerance for two actions to count as one degenerate peak.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum OrbitFamily {
    /// Odd orbit whose first bounce is on the upper mirror (distance `d1`).
    UpperFirst,
    /// Odd orbit whose first bounce is on the lower mirror (distance `d2`).
    LowerFirst,
    /// Even orbit launched toward the upper mirror.
    RoundTripUp,
    /// Even orbit launched toward the lower mirror.
    RoundTripDown,
}

impl OrbitFamily {
    pub const ALL: [OrbitFamily; 4] = [
        OrbitFamily::UpperFirst,
        OrbitFamily::LowerFirst,
        OrbitFamily::RoundTripUp,
        OrbitFamily::RoundTripDown,
    ];

    /// Orbit length divided by the mirror separation.
    pub fn length_coefficient(self, k: u32, r_asym: f64) -> f64 {
        let k = f64::from(k);
        match self {
            OrbitFamily::UpperFirst => 2.0 * k + (1.0 - r_asym),
            OrbitFamily::LowerFirst => 2.0 * k + (1.0 + r_asym),
            OrbitFamily::RoundTripUp | OrbitFamily::RoundTripDown => 2.0 * k,
        }
    }

    pub fn reflections(self, k: u32) -> u32 {
        match self {
            OrbitFamily::UpperFirst | OrbitFamily::LowerFirst => 2 * k + 1,
            OrbitFamily::RoundTripUp | OrbitFamily::RoundTripDown => 2 * k,
        }
    }

    /// Smallest admissible round-trip count.
    pub fn first_k(self) -> u32 {
        match self {
            OrbitFamily::UpperFirst | OrbitFamily::LowerFirst => 0,
            OrbitFamily::RoundTripUp | OrbitFamily::RoundTripDown => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OrbitFamily::UpperFirst => "UpperFirst",
            OrbitFamily::LowerFirst => "LowerFirst",
            OrbitFamily::RoundTripUp => "RoundTripUp",
            OrbitFamily::RoundTripDown => "RoundTripDown",
        }
    }
}

impl std::fmt::Display for OrbitFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One closed orbit at the scale of the configuration it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedOrbit {
    pub family: OrbitFamily,
    pub k: u32,
    /// Geometric length, in units of `λ₀`.
    pub length: f64,
    pub reflections: u32,
    /// `n k₀ L = 2πn L`.
    pub action: f64,
}

impl ClosedOrbit {
    pub fn new(cfg: &CavityConfig, family: OrbitFamily, k: u32) -> Self {
        let length = cfg.alpha() * family.length_coefficient(k, cfg.r_asym());
        Self {
            family,
            k,
            length,
            reflections: family.reflections(k),
            action: 2.0 * PI * cfg.n() * length,
        }
    }

    /// Action after rescaling the cavity from `from_alpha` to `to_alpha`.
    pub fn scaled_action(&self, from_alpha: f64, to_alpha: f64) -> f64 {
        self.action * (to_alpha / from_alpha)
    }

    fn order(&self, other: &Self) -> Ordering {
        self.action
            .total_cmp(&other.action)
            .then(self.family.cmp(&other.family))
            .then(self.k.cmp(&other.k))
    }
}

fn check_placement(cfg: &CavityConfig) -> Result<()> {
    if cfg.on_mirror() {
        Err(Error::AtomOnMirror)
    } else {
        Ok(())
    }
}

/// Every closed orbit with action at most `max_action`, in canonical order.
pub fn enumerate_orbits(cfg: &CavityConfig, max_action: f64) -> Result<Vec<ClosedOrbit>> {
    check_placement(cfg)?;
    if !(max_action > 0.0) {
        return Err(Error::Action(max_action));
    }
    let mut orbits = Vec::new();
    for family in OrbitFamily::ALL {
        let mut k = family.first_k();
        loop {
            let orbit = ClosedOrbit::new(cfg, family, k);
            if orbit.action > max_action {
                break;
            }
            orbits.push(orbit);
            k += 1;
        }
    }
    orbits.sort_by(ClosedOrbit::order);
    Ok(orbits)
}

/// The `count` orbits of smallest action, in canonical order.
pub fn first_orbits(cfg: &CavityConfig, count: usize) -> Result<Vec<ClosedOrbit>> {
    check_placement(cfg)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    // each unit of length/α holds two orbits on average; pad generously
    let max_coeff = count as f64 / 2.0 + 4.0;
    let max_action = 2.0 * PI * cfg.n() * cfg.alpha() * max_coeff;
    let mut orbits = enumerate_orbits(cfg, max_action)?;
    debug_assert!(orbits.len() >= count);
    orbits.truncate(count);
    Ok(orbits)
}

/// Orbits sharing one action.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitGroup {
    pub action: f64,
    pub length: f64,
    pub degeneracy: usize,
    pub members: Vec<ClosedOrbit>,
}

/// Partitions action-sorted orbits into runs of equal action.
pub fn group_degenerate(orbits: &[ClosedOrbit]) -> Vec<OrbitGroup> {
    let mut groups: Vec<OrbitGroup> = Vec::new();
    for orbit in orbits {
        match groups.last_mut() {
            Some(g) if (orbit.action - g.action).abs() <= DEGENERACY_TOL * g.action.abs() => {
                g.members.push(*orbit);
                g.degeneracy += 1;
            }
            _ => groups.push(OrbitGroup {
                action: orbit.action,
                length: orbit.length,
                degeneracy: 1,
                members: vec![*orbit],
            }),
        }
    }
    groups
}

/// Sign attached to each orbit's contribution in the semiclassical sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    /// `φ = (m − 1)π`: a parallel dipole image flips sign at every reflection.
    #[default]
    ImageParity,
    /// `φ = −mπ`, taken literally. Flips every term relative to
    /// [`PhaseConvention::ImageParity`]; kept as a negative control.
    Literal,
}

impl PhaseConvention {
    /// Factor multiplying `sin(S)` for an orbit with `reflections` bounces.
    pub fn sign(self, reflections: u32) -> f64 {
        let odd = reflections % 2 == 1;
        match (self, odd) {
            (PhaseConvention::ImageParity, true) | (PhaseConvention::Literal, false) => 1.0,
            _ => -1.0,
        }
    }
}

/// Semiclassical rate from the `n_orbits` orbits of smallest action.
///
/// `W = W₀ − (3/2) W₀ Σ_j (−1)^{m_j−1} sin(S_j)/S_j` with `W₀ = n`.
/// Degenerate orbits count individually.
pub fn semiclassical_rate(cfg: &CavityConfig, n_orbits: usize) -> Result<f64> {
    semiclassical_rate_with(cfg, n_orbits, PhaseConvention::ImageParity)
}

pub fn semiclassical_rate_with(
    cfg: &CavityConfig,
    n_orbits: usize,
    convention: PhaseConvention,
) -> Result<f64> {
    let orbits = first_orbits(cfg, n_orbits)?;
    Ok(orbit_sum(cfg.n(), &orbits, convention))
}

/// Semiclassical rate from an explicit list of orbits, evaluated at their own actions.
pub fn orbit_sum(n: f64, orbits: &[ClosedOrbit], convention: PhaseConvention) -> f64 {
    let w0 = n;
    let sum: f64 = orbits
        .iter()
        .map(|o| convention.sign(o.reflections) * o.action.sin() / o.action)
        .sum();
    w0 - 1.5 * w0 * sum
}

/// Predicted Fourier peak of one orbit group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictedPeak {
    /// Action at unit scale, `S⁰`.
    pub position: f64,
    pub height: f64,
    pub degeneracy: usize,
    pub members: Vec<ClosedOrbit>,
}

/// Window-dependent prefactor of the predicted heights, `(3/4) n (α₂ − α₁)`.
///
/// An orbit term `−(3/2) n g sin(αS⁰ + φ)/(αS⁰)`, weighted by `α` and
/// integrated against `e^{iαγ}` over the window, has modulus
/// `(3/4) n g (α₂ − α₁)/S⁰` at `γ = S⁰`.
pub fn height_constant(n: f64, window: (f64, f64)) -> f64 {
    0.75 * n * (window.1 - window.0)
}

/// One predicted peak per orbit group with `S⁰ ≤ max_action`.
///
/// Positions are the unit-scale actions (the scale factor of `cfg` is
/// ignored); heights are `C g / S⁰` with `C` from [`height_constant`].
pub fn predicted_peaks(
    cfg: &CavityConfig,
    window: (f64, f64),
    max_action: f64,
) -> Result<Vec<PredictedPeak>> {
    if !(window.1 > window.0) {
        return Err(Error::EmptyWindow {
            start: window.0,
            stop: window.1,
        });
    }
    let unit = cfg.with_alpha(1.0)?;
    let c = height_constant(cfg.n(), window);
    let orbits = enumerate_orbits(&unit, max_action)?;
    Ok(group_degenerate(&orbits)
        .into_iter()
        .map(|g| PredictedPeak {
            position: g.action,
            height: c * g.degeneracy as f64 / g.action,
            degeneracy: g.degeneracy,
            members: g.members,
        })
        .collect())
}

/// Rescales all heights so that peak `anchor` equals `reference_height`.
///
/// Keeps the `g/L⁰` ratios and discards the ab-initio constant.
pub fn calibrate(
    peaks: &[PredictedPeak],
    anchor: usize,
    reference_height: f64,
) -> Option<Vec<PredictedPeak>> {
    let base = peaks.get(anchor)?.height;
    let scale = reference_height / base;
    Some(
        peaks
            .iter()
            .map(|p| PredictedPeak {
                height: p.height * scale,
                ..p.clone()
            })
            .collect(),
    )
}
