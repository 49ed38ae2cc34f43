//! Cavity mode functions and a numerical golden-rule evaluation built on them.
//!
//! Modes are labelled by the branch `j` (normal wavenumber `k₃ = jπ/d`), the
//! in-plane wavenumber `k∥`, the angle `φ` between `k∥` and the dipole, and a
//! polarization: TE-like branch 1 with field along `k̂∥ × ẑ`, and TM-like
//! branch 2 mixing `ẑ` and `k̂∥`. The dipole points along `x̂`, so
//! `k̂∥ = (cos φ, sin φ, 0)`.
//!
//! The `1/√V` normalization is omitted from the mode shapes; the quantization
//! volume cancels from every rate ratio computed here.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::cavity::{golden_rule_rate, CavityConfig};
use crate::check::Check;
use crate::error::{Error, Result};

/// Default Lorentzian half-width for [`numeric_golden_rule`], in units of `1/λ₀`.
pub const DEFAULT_BROADENING: f64 = 1e-3;
/// Default number of quadrature nodes per branch in [`numeric_golden_rule`].
pub const DEFAULT_RESOLUTION: usize = 100_000;

const FD_STEP: f64 = 1e-4;
const PDE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    /// Field along `k̂∥ × ẑ`; purely tangential.
    Te,
    /// Field in the plane of `ẑ` and `k̂∥`.
    Tm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeIndex {
    pub j: u32,
    pub k_par: f64,
    pub phi: f64,
    pub pol: Polarization,
}

impl ModeIndex {
    pub fn new(j: u32, k_par: f64, phi: f64, pol: Polarization) -> Result<Self> {
        if j < 1 {
            return Err(Error::ModeBranch(j));
        }
        Ok(Self { j, k_par, phi, pol })
    }

    /// Normal wavenumber `jπ/d`.
    pub fn k3(&self, separation: f64) -> f64 {
        f64::from(self.j) * PI / separation
    }

    /// Total wavenumber in the medium, `√(k∥² + k₃²)`.
    pub fn wavenumber(&self, separation: f64) -> f64 {
        self.k_par.hypot(self.k3(separation))
    }

    fn k_par_hat(&self) -> Vector3<f64> {
        Vector3::new(self.phi.cos(), self.phi.sin(), 0.0)
    }
}

fn mode_shape(m: &ModeIndex, k3: f64, pos: &Vector3<f64>, d: f64) -> Vector3<Complex64> {
    let kh = m.k_par_hat();
    let plane_wave = Complex64::from_polar(1.0, m.k_par * (kh.x * pos.x + kh.y * pos.y));
    let (s, c) = (k3 * (pos.z - d / 2.0)).sin_cos();
    match m.pol {
        Polarization::Te => {
            let dir = kh.cross(&Vector3::z());
            dir.map(|v| plane_wave * (v * s))
        }
        Polarization::Tm => {
            let k = m.k_par.hypot(k3);
            let normal = Complex64::new(m.k_par * c / k, 0.0);
            let tangential = Complex64::new(0.0, -k3 * s / k);
            Vector3::new(
                plane_wave * tangential * kh.x,
                plane_wave * tangential * kh.y,
                plane_wave * normal,
            )
        }
    }
}

/// Spatial shape of a mode at `position` (units of `λ₀`) in a cavity of width `separation`.
pub fn mode_function(
    m: &ModeIndex,
    position: &Vector3<f64>,
    separation: f64,
) -> Result<Vector3<Complex64>> {
    if m.j < 1 {
        return Err(Error::ModeBranch(m.j));
    }
    if position.z.abs() > separation / 2.0 * (1.0 + 1e-12) {
        return Err(Error::OutsideCavity {
            z: position.z,
            separation,
        });
    }
    Ok(mode_shape(m, m.k3(separation), position, separation))
}

/// Finite-difference residuals of a vector field at a set of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeResidual {
    /// `max |∇²A + k²A| / k²`.
    pub helmholtz: f64,
    /// `max |∇·A| / k`.
    pub divergence: f64,
}

/// Central-difference Helmholtz and divergence residuals of `field` at `points`.
pub fn pde_residuals<F>(field: F, k: f64, points: &[Vector3<f64>], h: f64) -> PdeResidual
where
    F: Fn(&Vector3<f64>) -> Vector3<Complex64>,
{
    let mut helmholtz: f64 = 0.0;
    let mut divergence: f64 = 0.0;
    for p in points {
        let centre = field(p);
        let mut laplacian = Vector3::from_element(Complex64::new(0.0, 0.0));
        let mut div = Complex64::new(0.0, 0.0);
        for axis in 0..3 {
            let mut step = Vector3::zeros();
            step[axis] = h;
            let plus = field(&(p + step));
            let minus = field(&(p - step));
            laplacian += (plus + minus - centre.map(|c| c * 2.0)).map(|c| c / (h * h));
            div += (plus[axis] - minus[axis]) / (2.0 * h);
        }
        let res = laplacian + centre.map(|c| c * (k * k));
        let res_norm = res.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        helmholtz = helmholtz.max(res_norm / (k * k));
        divergence = divergence.max(div.norm() / k);
    }
    PdeResidual {
        helmholtz,
        divergence,
    }
}

fn interior_points(separation: f64, count: usize, seed: u64) -> Vec<Vector3<f64>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let margin = 2.0 * FD_STEP;
    let half = separation / 2.0 - margin;
    (0..count)
        .map(|_| {
            Vector3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-half..half),
            )
        })
        .collect()
}

/// Helmholtz and transversality residuals of a mode at random interior points.
pub fn check_mode_pde(m: &ModeIndex, separation: f64, seed: u64) -> PdeResidual {
    let points = interior_points(separation, 16, seed);
    let k3 = m.k3(separation);
    pde_residuals(
        |p| mode_shape(m, k3, p, separation),
        m.wavenumber(separation),
        &points,
        FD_STEP,
    )
}

/// Normalized overlap of the `z` profiles of branches `j` and `j_prime`.
///
/// Both modes share `k∥` (the in-plane integral enforces it). The profiles
/// are weighted by `2/d` and integrated over the cavity with the trapezoid
/// rule on `intervals` panels.
pub fn mode_overlap(
    j: u32,
    j_prime: u32,
    pol: Polarization,
    k_par: f64,
    separation: f64,
    intervals: usize,
) -> f64 {
    let d = separation;
    let k3a = f64::from(j) * PI / d;
    let k3b = f64::from(j_prime) * PI / d;
    let ka = k_par.hypot(k3a);
    let kb = k_par.hypot(k3b);
    let profile = |z: f64| {
        let (sa, ca) = (k3a * (z - d / 2.0)).sin_cos();
        let (sb, cb) = (k3b * (z - d / 2.0)).sin_cos();
        match pol {
            Polarization::Te => sa * sb,
            Polarization::Tm => (k_par * k_par * ca * cb + k3a * k3b * sa * sb) / (ka * kb),
        }
    };
    let h = d / intervals as f64;
    let inner: f64 = (1..intervals)
        .map(|i| profile(-d / 2.0 + i as f64 * h))
        .sum();
    let ends = 0.5 * (profile(-d / 2.0) + profile(d / 2.0));
    2.0 / d * h * (inner + ends)
}

/// `|A·d̂|²` for a dipole along `x̂` at height `z`, with the `2|d|²/V` prefactor removed.
///
/// Sums the TE weight `sin²φ` and the TM weight `(k₃/k)² cos²φ`.
pub fn matrix_element_sq(m: &ModeIndex, z: f64, separation: f64) -> f64 {
    let k3 = m.k3(separation);
    let k = m.wavenumber(separation);
    let s = (k3 * (z - separation / 2.0)).sin();
    let (sp, cp) = m.phi.sin_cos();
    (sp * sp + (k3 / k).powi(2) * cp * cp) * s * s
}

/// Golden-rule rate (units of `W_vac`) evaluated from the mode sum with the
/// energy delta broadened into a Lorentzian of half-width `broadening`.
///
/// After the angular integral each branch contributes
/// `∫ dk∥ (1 + k₃²/k²) L_ε(k∥ − κ_j)` with `κ_j = √(n²k₀² − k₃²)`. The
/// integral runs over `k∥ ≥ 0` in the variable `θ = atan((k∥ − κ_j)/ε)`,
/// where the Lorentzian measure is uniform, using `resolution` midpoints.
pub fn numeric_golden_rule(cfg: &CavityConfig, broadening: f64, resolution: usize) -> f64 {
    let n = cfg.n();
    let k0 = cfg.k0();
    let d = cfg.separation();
    let omega0 = k0; // c = 1
    let z = cfg.z();
    let nk0 = n * k0;
    // 2π/ħ · |matrix element|² · density, over W_vac = ω³|d|²/(3πħε₀c³);
    // the 1/ω_α and δ(ω_α − ω₀) Jacobians leave n² δ(k∥ − κ_j), which cancels
    // the 1/n² of the field normalization.
    let prefactor = 3.0 * PI / (2.0 * d * omega0);
    let eps = broadening;
    let mut total = 0.0;
    for j in 1.. {
        let k3 = f64::from(j) * PI / d;
        if k3 > nk0 {
            break;
        }
        let kappa = (nk0 * nk0 - k3 * k3).sqrt();
        let s = (k3 * (z - d / 2.0)).sin();
        let weight = |k_par: f64| 1.0 + k3 * k3 / (k_par * k_par + k3 * k3);
        let theta0 = -(kappa / eps).atan();
        let span = PI / 2.0 - theta0;
        let dtheta = span / resolution as f64;
        let integral: f64 = (0..resolution)
            .map(|i| {
                let theta = theta0 + (i as f64 + 0.5) * dtheta;
                weight(kappa + eps * theta.tan())
            })
            .sum::<f64>()
            * dtheta
            / PI;
        total += s * s * integral;
    }
    prefactor * total
}

/// Mode-level invariants reported as [`Check`]s.
pub fn verify_modes(seed: u64) -> Vec<Check> {
    let d = 1.0;
    let mut rng = StdRng::seed_from_u64(seed);

    // tangential components at both mirrors
    let mut tangential: f64 = 0.0;
    let mut normal_min = f64::INFINITY;
    for j in 1..=6 {
        for pol in [Polarization::Te, Polarization::Tm] {
            let m = ModeIndex::new(
                j,
                rng.gen_range(0.0..8.0),
                rng.gen_range(0.0..2.0 * PI),
                pol,
            )
            .unwrap();
            for zs in [d / 2.0, -d / 2.0] {
                let p = Vector3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), zs);
                let a = mode_function(&m, &p, d).unwrap();
                tangential = tangential.max(a.x.norm()).max(a.y.norm());
                if pol == Polarization::Tm {
                    let expected = m.k_par / m.wavenumber(d);
                    normal_min = normal_min.min(if expected > 1e-9 {
                        a.z.norm() / expected
                    } else {
                        1.0
                    });
                }
            }
        }
    }

    let mut overlap: f64 = 0.0;
    for pol in [Polarization::Te, Polarization::Tm] {
        for j in 1..=10 {
            for jp in 1..=10 {
                let target = if j == jp { 1.0 } else { 0.0 };
                let o = mode_overlap(j, jp, pol, 3.0, d, 10_000);
                overlap = overlap.max((o - target).abs());
            }
        }
    }

    let mut pde: f64 = 0.0;
    for (j, pol) in [
        (1, Polarization::Te),
        (3, Polarization::Tm),
        (2, Polarization::Tm),
    ] {
        let m = ModeIndex::new(j, 4.0, 0.7, pol).unwrap();
        let r = check_mode_pde(&m, d, seed ^ u64::from(j));
        pde = pde.max(r.helmholtz).max(r.divergence);
    }

    // away from thresholds the broadening bias is linear in ε
    let cfg = CavityConfig::new(1.49, 1.1, 0.2).unwrap();
    let exact = golden_rule_rate(&cfg);
    let e1 = (numeric_golden_rule(&cfg, 2e-3, 20_000) - exact).abs();
    let e2 = (numeric_golden_rule(&cfg, 1e-3, 20_000) - exact).abs();
    let halving = e1 / e2;

    let mut worst_rel: f64 = 0.0;
    for (a, r) in [(1.0, 0.0), (1.0, 1.0 / 3.0), (2.3, 0.6), (4.1, -0.45)] {
        let cfg = CavityConfig::new(1.49, a, r).unwrap();
        let exact = golden_rule_rate(&cfg);
        let numeric = numeric_golden_rule(&cfg, DEFAULT_BROADENING, 20_000);
        worst_rel = worst_rel.max((numeric - exact).abs() / exact);
    }

    vec![
        Check::at_most("tangential field at mirrors", tangential, 1e-12),
        Check::at_least(
            "TM normal component retained at mirrors",
            normal_min,
            1.0 - 1e-12,
        ),
        Check::at_most("overlap matrix identity (j, j' <= 10)", overlap, 1e-8),
        Check::at_most("Helmholtz and divergence residuals", pde, PDE_TOL),
        Check::at_most(
            "broadening bias halves with epsilon (ratio - 2)",
            (halving - 2.0).abs(),
            0.2,
        ),
        Check::at_most("numeric golden rule relative error", worst_rel, 0.01),
    ]
}
