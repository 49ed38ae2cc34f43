//! Two-mirror cavity geometry and the golden-rule emission rate.
//!
//! The mirrors sit at `z = ±d/2` with `d = α` (in units of `λ₀`). The atom
//! sits at `z = αR/2`, a distance `d1 = α(1−R)/2` below the upper mirror and
//! `d2 = α(1+R)/2` above the lower one.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Relative tolerance for deciding that a window holds an integral number of steps.
const GRID_INTEGRAL_TOL: f64 = 1e-9;

/// Spacing tolerance of [`RateCurve::new`], relative to the largest grid magnitude.
const UNIFORM_TOL: f64 = 1e-12;

/// Refractive index, scale factor and atom placement of one cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig {
    n: f64,
    alpha: f64,
    r_asym: f64,
}

impl CavityConfig {
    pub fn new(n: f64, alpha: f64, r_asym: f64) -> Result<Self> {
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Error::RefractiveIndex(n));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Scale(alpha));
        }
        if !(r_asym.abs() <= 1.0) {
            return Err(Error::Asymmetry(r_asym));
        }
        Ok(Self { n, alpha, r_asym })
    }

    /// Builds a configuration from the two atom-mirror distances.
    pub fn from_distances(n: f64, d1: f64, d2: f64) -> Result<Self> {
        if !(d1 >= 0.0) || !(d2 >= 0.0) {
            return Err(Error::Asymmetry(f64::NAN));
        }
        let alpha = d1 + d2;
        Self::new(n, alpha, (d2 - d1) / alpha)
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r_asym(&self) -> f64 {
        self.r_asym
    }

    /// Same placement and medium at a different scale.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.n, alpha, self.r_asym)
    }

    /// Mirror separation `d`.
    pub fn separation(&self) -> f64 {
        self.alpha
    }

    /// Distance from the atom to the upper mirror.
    pub fn d1(&self) -> f64 {
        self.alpha * (1.0 - self.r_asym) / 2.0
    }

    /// Distance from the atom to the lower mirror.
    pub fn d2(&self) -> f64 {
        self.alpha * (1.0 + self.r_asym) / 2.0
    }

    /// Atom coordinate, measured from the cavity midplane.
    pub fn z(&self) -> f64 {
        self.alpha * self.r_asym / 2.0
    }

    /// Vacuum wavenumber `k₀ = 2π` in these units.
    pub fn k0(&self) -> f64 {
        2.0 * PI
    }

    pub fn on_mirror(&self) -> bool {
        self.r_asym.abs() == 1.0
    }
}

/// Number of propagating cavity branches, `floor(n k₀ d / π) = floor(2nα)`.
pub fn mode_count(cfg: &CavityConfig) -> usize {
    (2.0 * cfg.n * cfg.alpha).floor() as usize
}

/// Golden-rule emission rate in units of the vacuum rate.
///
/// `W/W_vac = 3/(4α) Σ_{j=1..M} (1 + j²/(4n²α²)) sin²(jπ(R−1)/2)`.
pub fn golden_rule_rate(cfg: &CavityConfig) -> f64 {
    let m = mode_count(cfg);
    let (n, alpha, r) = (cfg.n, cfg.alpha, cfg.r_asym);
    let tm = 4.0 * n * n * alpha * alpha;
    let sum: f64 = (1..=m)
        .map(|j| {
            let j = j as f64;
            let s = (j * PI * (r - 1.0) / 2.0).sin();
            (1.0 + j * j / tm) * s * s
        })
        .sum();
    0.75 / alpha * sum
}

/// Rate in the unbounded medium, `W_bg = n W_vac`.
pub fn background_rate(n: f64) -> f64 {
    n
}

/// Uniform grid `start, start + step, ...` up to `stop`.
///
/// `stop` is included when `(stop − start)/step` is integral to within a
/// relative `1e−9`; otherwise the grid ends at the last point not past `stop`.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Step(step));
    }
    if !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::EmptyWindow { start, stop });
    }
    let ratio = (stop - start) / step;
    let nearest = ratio.round();
    let intervals = if (ratio - nearest).abs() <= GRID_INTEGRAL_TOL * nearest.max(1.0) {
        nearest
    } else {
        ratio.floor()
    } as usize;
    Ok((0..=intervals).map(|i| start + i as f64 * step).collect())
}

/// Rate sampled on a uniform grid of scale factors.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    alphas: Vec<f64>,
    rates: Vec<f64>,
    n: f64,
    r_asym: f64,
}

impl RateCurve {
    /// Wraps externally produced samples, checking grid uniformity and sign.
    pub fn new(alphas: Vec<f64>, rates: Vec<f64>, n: f64, r_asym: f64) -> Result<Self> {
        if alphas.len() != rates.len() {
            return Err(Error::LengthMismatch {
                alphas: alphas.len(),
                rates: rates.len(),
            });
        }
        if alphas.len() < 2 {
            return Err(Error::TooFewSamples(alphas.len()));
        }
        let expected = (alphas[alphas.len() - 1] - alphas[0]) / (alphas.len() - 1) as f64;
        if !(expected > 0.0) {
            return Err(Error::Step(expected));
        }
        let scale = alphas[0]
            .abs()
            .max(alphas[alphas.len() - 1].abs())
            .max(expected);
        for (i, w) in alphas.windows(2).enumerate() {
            let found = w[1] - w[0];
            if (found - expected).abs() > UNIFORM_TOL * scale {
                return Err(Error::NonUniform {
                    index: i + 1,
                    found,
                    expected,
                });
            }
        }
        if let Some((&alpha, &rate)) = alphas.iter().zip(&rates).find(|(_, r)| !(**r >= 0.0)) {
            return Err(Error::NegativeRate { alpha, rate });
        }
        Ok(Self {
            alphas,
            rates,
            n,
            r_asym,
        })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn r_asym(&self) -> f64 {
        self.r_asym
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Grid spacing derived from the endpoints.
    pub fn step(&self) -> f64 {
        (self.alphas[self.len() - 1] - self.alphas[0]) / (self.len() - 1) as f64
    }

    /// `(α₁, α₂)` of the sampled window.
    pub fn window(&self) -> (f64, f64) {
        (self.alphas[0], self.alphas[self.len() - 1])
    }

    pub fn mean(&self) -> f64 {
        self.rates.iter().sum::<f64>() / self.len() as f64
    }
}

/// Samples [`golden_rule_rate`] on `[alpha_start, alpha_stop]` with spacing `step`.
pub fn sample_rate_curve(
    n: f64,
    r_asym: f64,
    alpha_start: f64,
    alpha_stop: f64,
    step: f64,
) -> Result<RateCurve> {
    // validates n and R once, alpha per sample
    CavityConfig::new(n, 1.0, r_asym)?;
    if !(alpha_start > 0.0) {
        return Err(Error::Scale(alpha_start));
    }
    let alphas = uniform_grid(alpha_start, alpha_stop, step)?;
    let rates = alphas
        .par_iter()
        .map(|&a| CavityConfig::new(n, a, r_asym).map(|c| golden_rule_rate(&c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateCurve {
        alphas,
        rates,
        n,
        r_asym,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const N_PMMA: f64 = 1.49;

    fn cfg(n: f64, a: f64, r: f64) -> CavityConfig {
        CavityConfig::new(n, a, r).unwrap()
    }

    #[test]
    fn mode_count_examples() {
        assert_eq!(mode_count(&cfg(N_PMMA, 1.0, 0.0)), 2);
        assert_eq!(mode_count(&cfg(N_PMMA, 0.3, 0.0)), 0);
        assert_eq!(mode_count(&cfg(N_PMMA, 16.0, 0.0)), 47);
    }

    #[test]
    fn golden_rule_examples() {
        assert_eq!(golden_rule_rate(&cfg(N_PMMA, 0.3, 0.0)), 0.0);
        assert_abs_diff_eq!(
            golden_rule_rate(&cfg(N_PMMA, 1.0, 1.0)),
            0.0,
            epsilon = 1e-30
        );
        // j = 1 only: 3/4 (1 + 1/(4 n²))
        assert_abs_diff_eq!(
            golden_rule_rate(&cfg(N_PMMA, 1.0, 0.0)),
            0.834_455_655_150_668_9,
            epsilon = 1e-13
        );
        // j = 1, 2 with sin² = 3/4 each
        assert_abs_diff_eq!(
            golden_rule_rate(&cfg(N_PMMA, 1.0, 1.0 / 3.0)),
            1.441_708_706_815_008_3,
            epsilon = 1e-12
        );
    }

    #[test]
    fn background_is_index() {
        assert_eq!(background_rate(1.0), 1.0);
        assert_eq!(background_rate(1.49), 1.49);
        assert_eq!(background_rate(2.0), 2.0);
    }

    #[test]
    fn rejects_invalid_configs() {
        assert_eq!(
            CavityConfig::new(0.9, 1.0, 0.0),
            Err(Error::RefractiveIndex(0.9))
        );
        assert_eq!(CavityConfig::new(1.2, 0.0, 0.0), Err(Error::Scale(0.0)));
        assert_eq!(CavityConfig::new(1.2, -1.0, 0.0), Err(Error::Scale(-1.0)));
        assert_eq!(CavityConfig::new(1.2, 1.0, 1.5), Err(Error::Asymmetry(1.5)));
        assert!(CavityConfig::new(1.2, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn geometry_matches_placement() {
        let c = cfg(N_PMMA, 3.0, 1.0 / 3.0);
        assert_abs_diff_eq!(c.d1(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.d2(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.z(), 0.5, epsilon = 1e-15);
        let back = CavityConfig::from_distances(N_PMMA, c.d1(), c.d2()).unwrap();
        assert_abs_diff_eq!(back.r_asym(), c.r_asym(), epsilon = 1e-15);
        assert_abs_diff_eq!(back.alpha(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn paper_window_has_1501_samples() {
        let curve = sample_rate_curve(N_PMMA, 0.0, 1.0, 16.0, 0.01).unwrap();
        assert_eq!(curve.len(), 1501);
        assert_abs_diff_eq!(curve.window().1, 16.0, epsilon = 1e-12);
        for (a, w) in curve.alphas().iter().zip(curve.rates()) {
            assert_eq!(*w, golden_rule_rate(&cfg(N_PMMA, *a, 0.0)));
        }
    }

    #[test]
    fn degenerate_window_is_rejected() {
        assert!(matches!(
            sample_rate_curve(N_PMMA, 0.0, 1.0, 1.0, 0.01),
            Err(Error::EmptyWindow { .. })
        ));
        assert!(matches!(
            sample_rate_curve(N_PMMA, 0.0, 1.0, 2.0, 0.0),
            Err(Error::Step(_))
        ));
    }

    #[test]
    fn non_integral_window_stops_short() {
        let g = uniform_grid(0.0, 1.05, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert!(*g.last().unwrap() <= 1.05);
    }

    #[test]
    fn mean_over_teeth_tends_to_index() {
        // ten tooth periods of 1/(2n) starting at alpha = 10
        let period = 1.0 / (2.0 * N_PMMA);
        let step = period / 2000.0;
        let curve = sample_rate_curve(N_PMMA, 0.0, 10.0, 10.0 + 10.0 * period, step).unwrap();
        assert!(
            (curve.mean() - N_PMMA).abs() < 0.02,
            "mean {}",
            curve.mean()
        );
    }

    #[test]
    fn rate_curve_validation() {
        assert!(matches!(
            RateCurve::new(vec![1.0, 2.0, 4.0], vec![0.0; 3], 1.0, 0.0),
            Err(Error::NonUniform { .. })
        ));
        assert!(matches!(
            RateCurve::new(vec![1.0, 2.0], vec![0.0, -1.0], 1.0, 0.0),
            Err(Error::NegativeRate { .. })
        ));
        assert!(matches!(
            RateCurve::new(vec![1.0], vec![0.0], 1.0, 0.0),
            Err(Error::TooFewSamples(1))
        ));
    }

    proptest! {
        #[test]
        fn quenched_on_either_mirror(n in 1.0f64..3.0, a in 0.05f64..30.0) {
            prop_assert_eq!(golden_rule_rate(&cfg(n, a, 1.0)).abs() < 1e-12, true);
            prop_assert_eq!(golden_rule_rate(&cfg(n, a, -1.0)).abs() < 1e-12, true);
        }

        #[test]
        fn even_in_asymmetry(n in 1.0f64..3.0, a in 0.05f64..30.0, r in -1.0f64..1.0) {
            let w1 = golden_rule_rate(&cfg(n, a, r));
            let w2 = golden_rule_rate(&cfg(n, a, -r));
            prop_assert!((w1 - w2).abs() <= 1e-12 * w1.max(1.0));
        }

        #[test]
        fn cutoff_and_positivity(n in 1.0f64..3.0, a in 0.01f64..10.0) {
            let w = golden_rule_rate(&cfg(n, a, 0.0));
            if a < 1.0 / (2.0 * n) {
                prop_assert_eq!(w, 0.0);
            } else {
                prop_assert!(w > 0.0);
            }
        }

        #[test]
        fn smooth_between_thresholds(n in 1.0f64..2.5, a in 0.6f64..20.0, r in -0.9f64..0.9) {
            // no integer of 2n*alpha is crossed inside [a, a + h]
            let h = 1e-7;
            let lo = (2.0 * n * a).floor();
            prop_assume!((2.0 * n * (a + h)).floor() == lo);
            let w1 = golden_rule_rate(&cfg(n, a, r));
            let w2 = golden_rule_rate(&cfg(n, a + h, r));
            prop_assert!((w1 - w2).abs() < 1e-4);
        }
    }
}
