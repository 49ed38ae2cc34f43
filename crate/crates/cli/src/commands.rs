//! One function per subcommand. Each returns the bytes to emit.

use std::fmt::Write as _;
use std::path::Path;

use mirror_emission::check::{all_passed, Check};
use mirror_emission::io::{self, num};
use mirror_emission::orbits::{calibrate, first_orbits};
use mirror_emission::spectral::{MatchReport, MATCH_TOL};
use mirror_emission::{
    background_rate, enumerate_orbits, fields, find_peaks, golden_rule_rate, match_peaks, modes,
    modified_fourier_transform, predicted_peaks, r_sweep, sample_rate_curve, semiclassical_rate,
    validate_sampling, CavityConfig, GammaGrid, PeakSearch, PredictedPeak, RateCurve, Spectrum,
};
use serde_json::{Map, Value};

use crate::config::{Format, Params};
use crate::CliError;

/// Extra files written next to the main output, keyed by suffix.
pub struct Output {
    pub body: String,
    pub extras: Vec<(&'static str, String)>,
}

impl From<String> for Output {
    fn from(body: String) -> Self {
        Self {
            body,
            extras: Vec::new(),
        }
    }
}

pub fn run(p: &Params) -> Result<Output, CliError> {
    match p.command.as_str() {
        "rate" => rate(p).map(Output::from),
        "curve" => curve(p).map(Output::from),
        "spectrum" => spectrum(p).map(Output::from),
        "peaks" => peaks(p).map(Output::from),
        "orbits" => orbits(p).map(Output::from),
        "predict" => predict(p).map(Output::from),
        "reconstruct" => reconstruct(p).map(Output::from),
        "sweep" => sweep(p),
        "table1" => table1(p).map(Output::from),
        "verify" => verify(p),
        other => Err(CliError::Usage(format!("unknown command `{other}`"))),
    }
}

fn rate(p: &Params) -> Result<String, CliError> {
    let cfg = CavityConfig::new(p.n, p.alpha, p.r)?;
    let mut out = format!("{}\n", golden_rule_rate(&cfg));
    if p.orbits > 0 {
        let _ = writeln!(out, "{}", semiclassical_rate(&cfg, p.orbits)?);
    }
    Ok(out)
}

fn load_curve(p: &Params) -> Result<RateCurve, CliError> {
    match &p.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Ok(io::read_curve_csv(&text, p.n, p.r)?)
        }
        None => Ok(sample_rate_curve(
            p.n,
            p.r,
            p.alpha_min,
            p.alpha_max,
            p.d_alpha,
        )?),
    }
}

fn curve(p: &Params) -> Result<String, CliError> {
    let csv = io::curve_csv(&sample_rate_curve(
        p.n,
        p.r,
        p.alpha_min,
        p.alpha_max,
        p.d_alpha,
    )?);
    Ok(render_table(&csv, p.format))
}

fn grid(p: &Params) -> GammaGrid {
    GammaGrid::new(p.gamma_min, p.gamma_max, p.d_gamma)
}

fn search(p: &Params) -> PeakSearch {
    PeakSearch::new(p.threshold, p.min_sep)
}

fn predicted(p: &Params, window: (f64, f64)) -> Result<Vec<PredictedPeak>, CliError> {
    let cfg = CavityConfig::new(p.n, 1.0, p.r)?;
    Ok(predicted_peaks(&cfg, window, p.gamma_max)?)
}

/// Enforces the sampling rules against the first predicted peak in the `γ` range.
fn check_sampling(p: &Params, r: f64, window: (f64, f64, f64)) -> Result<(), CliError> {
    let (a1, a2, _) = window;
    let cfg = CavityConfig::new(p.n, 1.0, r)?;
    let first = predicted_peaks(&cfg, (a1, a2), p.gamma_max)?
        .iter()
        .map(|q| q.position)
        .find(|&s| s >= p.gamma_min)
        .unwrap_or(p.gamma_min);
    let report = validate_sampling(window, first, p.gamma_max);
    if report.passed() {
        return Ok(());
    }
    if p.force {
        eprintln!("warning: sampling rules violated (forced)\n{report}");
        Ok(())
    } else {
        Err(CliError::Sampling(report.to_string()))
    }
}

fn analysed(p: &Params) -> Result<(RateCurve, Spectrum), CliError> {
    let curve = load_curve(p)?;
    let (a1, a2) = curve.window();
    check_sampling(p, p.r, (a1, a2, curve.step()))?;
    let spec = modified_fourier_transform(&curve, background_rate(p.n), &grid(p))?;
    Ok((curve, spec))
}

fn spectrum(p: &Params) -> Result<String, CliError> {
    let (_, spec) = analysed(p)?;
    Ok(render_table(&io::spectrum_csv(&spec), p.format))
}

fn peaks(p: &Params) -> Result<String, CliError> {
    let (curve, spec) = analysed(p)?;
    let found = find_peaks(&spec, &search(p));
    let targets: Vec<(f64, f64)> = predicted(p, curve.window())?
        .iter()
        .map(|q| (q.position, q.height))
        .collect();
    let report = match_peaks(&found, &targets, MATCH_TOL);
    Ok(match p.format {
        Format::Json => io::peaks_json(&report.peaks),
        Format::Csv => {
            let mut out = String::from("position,height,matched_action,delta\n");
            for q in &report.peaks {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    num(q.position),
                    num(q.height),
                    q.matched_action.map(num).unwrap_or_default(),
                    q.delta().map(num).unwrap_or_default()
                );
            }
            out
        }
    })
}

fn orbits(p: &Params) -> Result<String, CliError> {
    let cfg = CavityConfig::new(p.n, p.alpha, p.r)?;
    let list = if p.orbits > 0 {
        first_orbits(&cfg, p.orbits)?
    } else {
        enumerate_orbits(&cfg, p.gamma_max)?
    };
    Ok(render_table(&io::orbits_csv(&list), p.format))
}

fn predict(p: &Params) -> Result<String, CliError> {
    let list = predicted(p, (p.alpha_min, p.alpha_max))?;
    Ok(match p.format {
        Format::Json => io::predicted_json(&list),
        Format::Csv => {
            let mut out = String::from("position,height,degeneracy,members\n");
            for q in &list {
                let members: Vec<String> = q
                    .members
                    .iter()
                    .map(|m| format!("{}:{}", m.family.name(), m.k))
                    .collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    num(q.position),
                    num(q.height),
                    q.degeneracy,
                    members.join(" ")
                );
            }
            out
        }
    })
}

fn reconstruct(p: &Params) -> Result<String, CliError> {
    let curve = sample_rate_curve(p.n, p.r, p.alpha_min, p.alpha_max, p.d_alpha)?;
    let mut out = String::from("alpha,golden_rule");
    for c in &p.orbit_counts {
        let _ = write!(out, ",orbits_{c}");
    }
    out.push('\n');
    for (&a, &w) in curve.alphas().iter().zip(curve.rates()) {
        let cfg = CavityConfig::new(p.n, a, p.r)?;
        let _ = write!(out, "{},{}", num(a), num(w));
        for &c in &p.orbit_counts {
            let _ = write!(out, ",{}", num(semiclassical_rate(&cfg, c)?));
        }
        out.push('\n');
    }
    Ok(render_table(&out, p.format))
}

fn r_values(p: &Params) -> Result<Vec<f64>, CliError> {
    if !(p.d_r > 0.0) || p.r_max < p.r_min {
        return Err(CliError::Usage(format!(
            "bad R range [{}, {}] step {}",
            p.r_min, p.r_max, p.d_r
        )));
    }
    let count = ((p.r_max - p.r_min) / p.d_r + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| p.r_min + i as f64 * p.d_r).collect())
}

fn sweep(p: &Params) -> Result<Output, CliError> {
    let rs = r_values(p)?;
    let window = (p.alpha_min, p.alpha_max, p.d_alpha);
    for &r in &rs {
        check_sampling(p, r, window)?;
    }
    let table = r_sweep(p.n, &rs, window, &grid(p), &search(p))?;
    Ok(Output {
        body: render_table(&io::sweep_csv(&table), p.format),
        extras: vec![(".families.csv", io::families_csv(&table))],
    })
}

struct Table1Row {
    r: f64,
    report: MatchReport,
    calibrated: Vec<PredictedPeak>,
}

fn table1(p: &Params) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for r in [0.0, 1.0 / 3.0, 3.0 / 5.0] {
        let curve = sample_rate_curve(p.n, r, p.alpha_min, p.alpha_max, p.d_alpha)?;
        check_sampling(p, r, (p.alpha_min, p.alpha_max, p.d_alpha))?;
        let spec = modified_fourier_transform(&curve, background_rate(p.n), &grid(p))?;
        let found = find_peaks(&spec, &search(p));
        let cfg = CavityConfig::new(p.n, 1.0, r)?;
        let pred: Vec<PredictedPeak> = predicted_peaks(&cfg, curve.window(), p.gamma_max)?
            .into_iter()
            .filter(|q| q.position >= p.gamma_min)
            .collect();
        let targets: Vec<(f64, f64)> = pred.iter().map(|q| (q.position, q.height)).collect();
        let report = match_peaks(&found, &targets, MATCH_TOL);
        // heights fixed on the first detected peak
        let calibrated = match report.pairs.first() {
            Some(first) => {
                let anchor = pred
                    .iter()
                    .position(|q| q.position == first.predicted_position)
                    .unwrap_or(0);
                calibrate(&pred, anchor, first.height).unwrap_or_default()
            }
            None => pred.clone(),
        };
        rows.push(Table1Row {
            r,
            report,
            calibrated,
        });
    }
    let mut out = String::from(
        "R,peak_index,ft_position,predicted_position,ft_height,predicted_height,calibrated_height\n",
    );
    for row in &rows {
        for (i, pair) in row.report.pairs.iter().enumerate() {
            let cal = row
                .calibrated
                .iter()
                .find(|q| q.position == pair.predicted_position)
                .map(|q| q.height)
                .unwrap_or(f64::NAN);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                num(row.r),
                i + 1,
                num(pair.position),
                num(pair.predicted_position),
                num(pair.height),
                num(pair.predicted_height),
                num(cal)
            );
        }
        for q in &row.report.unmatched_peaks {
            let _ = writeln!(
                out,
                "{},,{},,{},,",
                num(row.r),
                num(q.position),
                num(q.height)
            );
        }
    }
    Ok(render_table(&out, p.format))
}

fn verify(p: &Params) -> Result<Output, CliError> {
    let mut checks: Vec<Check> = fields::verify_fields(p.seed);
    if p.modes {
        checks.extend(modes::verify_modes(p.seed));
    }
    let body = match p.format {
        Format::Json => io::to_json(&checks),
        Format::Csv => {
            let mut out = String::from("name,passed,worst,tolerance\n");
            for c in &checks {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    c.name,
                    c.passed,
                    num(c.worst),
                    num(c.tolerance)
                );
            }
            out
        }
    };
    for c in &checks {
        eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    if all_passed(&checks) {
        Ok(body.into())
    } else {
        Err(CliError::Verify(body))
    }
}

/// Header CSV as-is, or as a JSON array of records with numeric fields kept numeric.
fn render_table(csv: &str, format: Format) -> String {
    if format == Format::Csv {
        return csv.to_string();
    }
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let records: Vec<Value> = lines
        .map(|line| {
            let mut m = Map::new();
            for (k, v) in header.iter().zip(line.split(',')) {
                let value = if v.is_empty() {
                    Value::Null
                } else if let Ok(x) = v.parse::<f64>() {
                    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
                } else {
                    Value::String(v.to_string())
                };
                m.insert((*k).to_string(), value);
            }
            Value::Object(m)
        })
        .collect();
    io::to_json(&records)
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = crate::config::with_suffix(path, &format!(".tmp{}", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}
