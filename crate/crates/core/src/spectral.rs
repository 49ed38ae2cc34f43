//! Windowed Fourier analysis of the rate as a function of the scale factor.
//!
//! The transform `W̃(γ) = ∫ [W(α) − W_bg] α e^{iαγ} dα` over the sampled
//! window turns each closed-orbit term `sin(αS⁰ + φ)/(αS⁰)` into a peak at
//! `γ = S⁰`. With a bare rectangular window of length `Λ = α₂ − α₁` each peak
//! is a `sinc` main lobe of half-width `2π/Λ` surrounded by side lobes.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cavity::{background_rate, sample_rate_curve, uniform_grid, CavityConfig, RateCurve};
use crate::error::{Error, Result};
use crate::orbits::{predicted_peaks, OrbitFamily};

/// Samples between exact phase evaluations in the rotating-phasor sum.
const REANCHOR: usize = 64;

/// Default pairing tolerance between detected and predicted peaks.
pub const MATCH_TOL: f64 = 0.1;

/// Uniform grid of transform variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GammaGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        uniform_grid(self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub gammas: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `(α₁, α₂, Δα)` of the transformed curve.
    pub window: (f64, f64, f64),
    pub background: f64,
}

impl Spectrum {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn window_length(&self) -> f64 {
        self.window.1 - self.window.0
    }
}

/// Trapezoid weights of a sampled grid.
fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { xs[i] - xs[i - 1] } else { 0.0 };
            let right = if i + 1 < n { xs[i + 1] - xs[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// `Σ_i w_i f_i e^{iγα_i}` for every `γ`, with trapezoid weights on a uniform `alphas` grid.
///
/// Accepts any real `γ`, including negative ones. Each `γ` is an independent
/// sequential sum, so results do not depend on how the work is split.
pub fn windowed_transform(alphas: &[f64], samples: &[f64], gammas: &[f64]) -> Vec<Complex64> {
    assert_eq!(alphas.len(), samples.len());
    let weighted: Vec<f64> = trapezoid_weights(alphas)
        .iter()
        .zip(samples)
        .map(|(w, f)| w * f)
        .collect();
    let h = if alphas.len() > 1 {
        (alphas[alphas.len() - 1] - alphas[0]) / (alphas.len() - 1) as f64
    } else {
        0.0
    };
    gammas
        .par_iter()
        .map(|&gamma| {
            let rotor = Complex64::from_polar(1.0, gamma * h);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut phase = Complex64::new(1.0, 0.0);
            for (i, (&a, &f)) in alphas.iter().zip(&weighted).enumerate() {
                if i % REANCHOR == 0 {
                    phase = Complex64::from_polar(1.0, gamma * a);
                }
                acc += phase * f;
                phase *= rotor;
            }
            acc
        })
        .collect()
}

/// Transform of `[W(α) − w_bg] α` over the curve's window.
pub fn modified_fourier_transform(
    curve: &RateCurve,
    w_bg: f64,
    grid: &GammaGrid,
) -> Result<Spectrum> {
    if curve.len() < 2 {
        return Err(Error::TooFewSamples(curve.len()));
    }
    if !(grid.start > 0.0) {
        return Err(Error::GammaStart(grid.start));
    }
    let gammas = grid.points()?;
    let samples: Vec<f64> = curve
        .alphas()
        .iter()
        .zip(curve.rates())
        .map(|(a, w)| (w - w_bg) * a)
        .collect();
    let values = windowed_transform(curve.alphas(), &samples, &gammas);
    let (a1, a2) = curve.window();
    Ok(Spectrum {
        gammas,
        values,
        window: (a1, a2, curve.step()),
        background: w_bg,
    })
}

/// Outcome of one sampling inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingRule {
    pub passed: bool,
    pub actual: f64,
    pub limit: f64,
    /// Signed slack; negative when violated.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingReport {
    /// `α₂ − α₁ ≥ 2π/γ′`.
    pub window_rule: SamplingRule,
    /// `Δα ≤ 0.1 · 2π/γ_max`.
    pub step_rule: SamplingRule,
}

impl SamplingReport {
    pub fn passed(&self) -> bool {
        self.window_rule.passed && self.step_rule.passed
    }
}

impl fmt::Display for SamplingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = &self.window_rule;
        let s = &self.step_rule;
        writeln!(
            f,
            "window: alpha2 - alpha1 = {} {} 2pi/gamma' = {} [{}]",
            w.actual,
            if w.passed { ">=" } else { "<" },
            w.limit,
            if w.passed { "ok" } else { "VIOLATED" }
        )?;
        write!(
            f,
            "step:   d_alpha = {} {} 0.1*2pi/gamma_max = {} [{}]",
            s.actual,
            if s.passed { "<=" } else { ">" },
            s.limit,
            if s.passed { "ok" } else { "VIOLATED" }
        )
    }
}

/// Checks a window `(α₁, α₂, Δα)` against the first expected peak `γ′` and the largest `γ`.
pub fn validate_sampling(
    window: (f64, f64, f64),
    gamma_first: f64,
    gamma_max: f64,
) -> SamplingReport {
    let (a1, a2, step) = window;
    let width = a2 - a1;
    let min_width = 2.0 * PI / gamma_first;
    let max_step = 0.1 * 2.0 * PI / gamma_max;
    SamplingReport {
        window_rule: SamplingRule {
            passed: width >= min_width,
            actual: width,
            limit: min_width,
            margin: width - min_width,
        },
        step_rule: SamplingRule {
            passed: step <= max_step,
            actual: step,
            limit: max_step,
            margin: max_step - step,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
    pub matched_action: Option<f64>,
    pub matched: bool,
}

impl Peak {
    /// `position − matched_action`, when matched.
    pub fn delta(&self) -> Option<f64> {
        self.matched_action.map(|s| self.position - s)
    }
}

/// Peak detection settings.
///
/// A grid point is a peak when it is a local maximum of `|W̃|` that
///
/// * reaches `threshold_frac` of the global maximum,
/// * is the largest value within `min_separation` on either side,
/// * has a main-lobe shape: the parabola through it and its neighbours has
///   normalized curvature `−|W̃|''/(|W̃| T²)` at most `max_lobe_curvature`,
///   where `T = (α₂ − α₁)/2`. An isolated main lobe sits near `1/3`,
///   side lobes near `1` and above,
/// * (with `edge_guard`) lies at least one main-lobe half-width `2π/(α₂ − α₁)`
///   inside the grid, so its lobe is not cut by the grid ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakSearch {
    pub threshold_frac: f64,
    pub min_separation: f64,
    pub max_lobe_curvature: f64,
    pub edge_guard: bool,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self {
            threshold_frac: 0.05,
            min_separation: 0.5,
            max_lobe_curvature: 0.5,
            edge_guard: true,
        }
    }
}

impl PeakSearch {
    pub fn new(threshold_frac: f64, min_separation: f64) -> Self {
        Self {
            threshold_frac,
            min_separation,
            ..Self::default()
        }
    }

    /// Threshold and separation only; no lobe-shape or edge tests.
    pub fn plain(threshold_frac: f64, min_separation: f64) -> Self {
        Self {
            threshold_frac,
            min_separation,
            max_lobe_curvature: f64::INFINITY,
            edge_guard: false,
        }
    }
}

/// Local maxima of `|W̃|`, refined by a three-point parabola and sorted by position.
pub fn find_peaks(spec: &Spectrum, search: &PeakSearch) -> Vec<Peak> {
    let g = &spec.gammas;
    let a = spec.magnitudes();
    let len = a.len();
    if len < 3 {
        return Vec::new();
    }
    let global = a.iter().cloned().fold(0.0, f64::max);
    let half_len = spec.window_length() / 2.0;
    let lobe = 2.0 * PI / spec.window_length();
    let mut peaks = Vec::new();
    for i in 1..len - 1 {
        let (y0, y1, y2) = (a[i - 1], a[i], a[i + 1]);
        if !(y1 > y0 && y1 >= y2) || y1 < search.threshold_frac * global || y1 <= 0.0 {
            continue;
        }
        let dominated = (0..len)
            .rev()
            .skip(len - i)
            .take_while(|&k| g[i] - g[k] <= search.min_separation)
            .chain((i + 1..len).take_while(|&k| g[k] - g[i] <= search.min_separation))
            .any(|k| a[k] > y1);
        if dominated {
            continue;
        }
        let dg = 0.5 * (g[i + 1] - g[i - 1]);
        let curvature = y0 - 2.0 * y1 + y2;
        let offset = if curvature < 0.0 {
            0.5 * (y0 - y2) / curvature
        } else {
            0.0
        };
        let position = g[i] + offset * dg;
        let height = y1 - 0.25 * (y0 - y2) * offset;
        let normalized = -curvature / (dg * dg * height * half_len * half_len);
        if normalized > search.max_lobe_curvature {
            continue;
        }
        if search.edge_guard && (position - g[0] < lobe || g[len - 1] - position < lobe) {
            continue;
        }
        peaks.push(Peak {
            position,
            height,
            matched_action: None,
            matched: false,
        });
    }
    peaks
}

/// One detected/predicted pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakMatch {
    pub position: f64,
    pub height: f64,
    pub predicted_position: f64,
    pub predicted_height: f64,
    pub delta_position: f64,
    /// `(height − predicted_height)/predicted_height`.
    pub delta_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub pairs: Vec<PeakMatch>,
    pub unmatched_peaks: Vec<Peak>,
    pub unmatched_predicted: Vec<(f64, f64)>,
    /// Input peaks with `matched_action` filled in.
    pub peaks: Vec<Peak>,
}

impl MatchReport {
    pub fn matched(&self) -> usize {
        self.pairs.len()
    }

    pub fn max_position_error(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.delta_position.abs())
            .fold(0.0, f64::max)
    }
}

/// Greedy nearest pairing of detected peaks with predicted `(S⁰, H)` within `tolerance`.
pub fn match_peaks(peaks: &[Peak], predicted: &[(f64, f64)], tolerance: f64) -> MatchReport {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in peaks.iter().enumerate() {
        for (j, q) in predicted.iter().enumerate() {
            let d = (p.position - q.0).abs();
            if d <= tolerance {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut peak_to: Vec<Option<usize>> = vec![None; peaks.len()];
    let mut taken = vec![false; predicted.len()];
    for (_, i, j) in candidates {
        if peak_to[i].is_none() && !taken[j] {
            peak_to[i] = Some(j);
            taken[j] = true;
        }
    }
    let mut pairs = Vec::new();
    let mut unmatched_peaks = Vec::new();
    let mut annotated = Vec::with_capacity(peaks.len());
    for (p, slot) in peaks.iter().zip(&peak_to) {
        match slot {
            Some(j) => {
                let (s, h) = predicted[*j];
                pairs.push(PeakMatch {
                    position: p.position,
                    height: p.height,
                    predicted_position: s,
                    predicted_height: h,
                    delta_position: p.position - s,
                    delta_height: (p.height - h) / h,
                });
                annotated.push(Peak {
                    matched_action: Some(s),
                    matched: true,
                    ..*p
                });
            }
            None => {
                unmatched_peaks.push(*p);
                annotated.push(Peak {
                    matched_action: None,
                    matched: false,
                    ..*p
                });
            }
        }
    }
    let unmatched_predicted = predicted
        .iter()
        .zip(&taken)
        .filter(|(_, t)| !**t)
        .map(|(q, _)| *q)
        .collect();
    MatchReport {
        pairs,
        unmatched_peaks,
        unmatched_predicted,
        peaks: annotated,
    }
}

/// Unit-scale action of every orbit family branch across a range of `R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCurve {
    pub family: OrbitFamily,
    pub k: u32,
    pub r_values: Vec<f64>,
    pub actions: Vec<f64>,
}

/// Family branches whose action stays below `max_action` somewhere on `r_grid`.
pub fn family_curves(n: f64, r_grid: &[f64], max_action: f64) -> Vec<FamilyCurve> {
    let mut curves = Vec::new();
    for family in OrbitFamily::ALL {
        let mut k = family.first_k();
        loop {
            let actions: Vec<f64> = r_grid
                .iter()
                .map(|&r| 2.0 * PI * n * family.length_coefficient(k, r))
                .collect();
            if actions.iter().all(|&s| s > max_action) {
                break;
            }
            curves.push(FamilyCurve {
                family,
                k,
                r_values: r_grid.to_vec(),
                actions,
            });
            k += 1;
        }
    }
    curves
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub r_asym: f64,
    /// Detected peaks, annotated with the nearest predicted action within [`MATCH_TOL`].
    pub peaks: Vec<Peak>,
    /// Distinct predicted actions up to the top of the `γ` grid.
    pub predicted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub families: Vec<FamilyCurve>,
}

/// Peak positions versus `R`: sample, transform and detect at every `R`.
pub fn r_sweep(
    n: f64,
    r_grid: &[f64],
    window: (f64, f64, f64),
    gammas: &GammaGrid,
    search: &PeakSearch,
) -> Result<SweepTable> {
    for &r in r_grid {
        if !(r.abs() < 1.0) {
            return Err(Error::Asymmetry(r));
        }
    }
    let (a1, a2, step) = window;
    let rows = r_grid
        .par_iter()
        .map(|&r| {
            let curve = sample_rate_curve(n, r, a1, a2, step)?;
            let spec = modified_fourier_transform(&curve, background_rate(n), gammas)?;
            let peaks = find_peaks(&spec, search);
            let cfg = CavityConfig::new(n, 1.0, r)?;
            let predicted: Vec<(f64, f64)> = predicted_peaks(&cfg, (a1, a2), gammas.stop)?
                .iter()
                .map(|p| (p.position, p.height))
                .collect();
            let report = match_peaks(&peaks, &predicted, MATCH_TOL);
            Ok(SweepRow {
                r_asym: r,
                peaks: report.peaks,
                predicted: predicted.iter().map(|p| p.0).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        rows,
        families: family_curves(n, r_grid, gammas.stop),
    })
}
