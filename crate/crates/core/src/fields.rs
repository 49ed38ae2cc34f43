//! Dipole fields and the single-mirror damping rate.
//!
//! Fields are complex amplitudes in units of `d k³/(4πε)`; positions are in
//! units of `1/k` with `k = n k₀` the wavenumber in the medium. Rates are in
//! units of the unbounded-medium rate `W₀`.

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::check::Check;
use crate::error::{Error, Result};

/// Below this action the exact one-mirror rate switches to its Taylor series.
const SMALL_ACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedField {
    pub value: Vector3<Complex64>,
    pub at_point: Vector3<f64>,
}

impl NormalizedField {
    /// Component along a real direction.
    pub fn projection(&self, dir: &Vector3<f64>) -> Complex64 {
        self.value.iter().zip(dir.iter()).map(|(e, d)| e * d).sum()
    }
}

/// Field of a unit dipole along `d_hat` at offset `r` (in units of `1/k`).
///
/// Near-, intermediate- and far-zone terms scale as `1/(kr)³`, `1/(kr)²`
/// and `1/(kr)`. The `e^{−iωt}` factor is dropped.
pub fn direct_field(d_hat: &Vector3<f64>, r: &Vector3<f64>) -> Result<NormalizedField> {
    let rho = r.norm();
    if !(rho > 0.0) {
        return Err(Error::ZeroDistance);
    }
    let d = d_hat.normalize();
    let rh = r / rho;
    let u = rh.dot(&d);
    let transverse = rh.cross(&d).cross(&rh);
    let near = d - rh * (3.0 * u);
    let phase = Complex64::from_polar(1.0, rho);
    let far_coef = phase / rho;
    let near_coef = phase * Complex64::new(-1.0 / rho.powi(3), 1.0 / (rho * rho));
    let value = Vector3::from_fn(|i, _| far_coef * transverse[i] + near_coef * near[i]);
    Ok(NormalizedField {
        value,
        at_point: *r,
    })
}

/// Returning field at the dipole from its image in one mirror, projected on `d̂`.
///
/// `action` is the round-trip phase `2 n k₀ l`.
pub fn image_field(action: f64) -> Result<Complex64> {
    check_action(action)?;
    let s = action;
    let radial = Complex64::new(1.0 / s - 1.0 / s.powi(3), 1.0 / (s * s));
    Ok(-radial * Complex64::from_polar(1.0, s))
}

/// Damping rate from the returning field projection: direct part plus `(3/2) Im`.
pub fn rate_from_fields(returning_projection: Complex64) -> f64 {
    1.0 + 1.5 * returning_projection.im
}

/// Exact rate of a parallel dipole facing one mirror.
pub fn one_mirror_rate_exact(action: f64) -> Result<f64> {
    check_action(action)?;
    let s = action;
    if s < SMALL_ACTION {
        let s2 = s * s;
        return Ok(s2 / 5.0 - 3.0 * s2 * s2 / 280.0);
    }
    let (sin, cos) = s.sin_cos();
    Ok(1.0 - 1.5 * (sin / s + cos / (s * s) - sin / s.powi(3)))
}

/// Far-zone approximation `1 − (3/2) sin(S)/S`.
pub fn one_mirror_rate_semiclassical(action: f64) -> Result<f64> {
    check_action(action)?;
    Ok(1.0 - 1.5 * action.sin() / action)
}

/// Bound on `|exact − semiclassical|` from the dropped near-field terms.
pub fn near_field_bound(action: f64) -> f64 {
    1.5 * (1.0 / (action * action) + 1.0 / action.powi(3))
}

fn check_action(action: f64) -> Result<()> {
    if action > 0.0 && action.is_finite() {
        Ok(())
    } else {
        Err(Error::Action(action))
    }
}

fn random_unit(rng: &mut StdRng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Runs the field-level invariants and reports each as a [`Check`].
pub fn verify_fields(seed: u64) -> Vec<Check> {
    let grid: Vec<f64> = (0..=9990).map(|i| 0.1 + i as f64 * 0.01).collect();

    let identity = grid
        .iter()
        .map(|&s| {
            let via_fields = rate_from_fields(image_field(s).unwrap());
            (via_fields - one_mirror_rate_exact(s).unwrap()).abs()
        })
        .fold(0.0, f64::max);

    let bound_excess = grid
        .iter()
        .chain(&[1e-3, 1e-2, 0.03, 0.049, 0.051])
        .map(|&s| {
            let gap = (one_mirror_rate_exact(s).unwrap()
                - one_mirror_rate_semiclassical(s).unwrap())
            .abs();
            gap - near_field_bound(s)
        })
        .fold(f64::NEG_INFINITY, f64::max);

    let mut rng = StdRng::seed_from_u64(seed);
    let limit = (0..100)
        .map(|_| {
            let d = random_unit(&mut rng);
            let r = random_unit(&mut rng) * 1e-3;
            let f = direct_field(&d, &r).unwrap();
            (f.projection(&d).im - 2.0 / 3.0).abs()
        })
        .fold(0.0, f64::max);

    let min_rate = grid
        .iter()
        .chain(&[1e-6, 1e-4, 1e-2])
        .map(|&s| one_mirror_rate_exact(s).unwrap())
        .fold(f64::INFINITY, f64::min);
    let quench = one_mirror_rate_exact(1e-6).unwrap();

    vec![
        Check::at_most(
            "image field reproduces exact one-mirror rate",
            identity,
            1e-12,
        ),
        Check::at_most("near-field bound excess", bound_excess, 0.0),
        Check::at_most("direct field Im limit 2/3 at kr=1e-3", limit, 1e-6),
        Check::at_least("exact one-mirror rate non-negative", min_rate, 0.0),
        Check::at_most("one-mirror quench at S=1e-6", quench, 1e-10),
    ]
}
