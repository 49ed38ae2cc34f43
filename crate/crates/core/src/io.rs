//! CSV and JSON emission of curves, orbits, spectra and sweeps.
//!
//! Floating-point fields are written with 17 significant digits so that a
//! written curve re-reads to the same bits.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cavity::RateCurve;
use crate::error::{Error, Result};
use crate::orbits::{ClosedOrbit, PredictedPeak};
use crate::spectral::{Peak, Spectrum, SweepTable};

/// Full-precision float formatting.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn curve_csv(curve: &RateCurve) -> String {
    let mut out = String::from("alpha,rate\n");
    for (a, w) in curve.alphas().iter().zip(curve.rates()) {
        let _ = writeln!(out, "{},{}", num(*a), num(*w));
    }
    out
}

/// Reads `alpha,rate` rows back into a [`RateCurve`].
pub fn read_curve_csv(text: &str, n: f64, r_asym: f64) -> Result<RateCurve> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "alpha,rate" => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `alpha,rate`".into(),
            })
        }
    }
    let mut alphas = Vec::new();
    let mut rates = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    message: format!("bad row `{line}`"),
                })
        };
        let mut fields = line.split(',');
        alphas.push(parse(fields.next())?);
        rates.push(parse(fields.next())?);
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: i + 1,
                message: "too many fields".into(),
            });
        }
    }
    RateCurve::new(alphas, rates, n, r_asym)
}

pub fn orbits_csv(orbits: &[ClosedOrbit]) -> String {
    let mut out = String::from("family,k,length,reflections,action\n");
    for o in orbits {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            o.family.name(),
            o.k,
            num(o.length),
            o.reflections,
            num(o.action)
        );
    }
    out
}

pub fn spectrum_csv(spec: &Spectrum) -> String {
    let mut out = String::from("gamma,re,im,abs\n");
    for (g, v) in spec.gammas.iter().zip(&spec.values) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(*g),
            num(v.re),
            num(v.im),
            num(v.norm())
        );
    }
    out
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("R,peak_index,position,predicted_action\n");
    for row in &table.rows {
        for (i, p) in row.peaks.iter().enumerate() {
            let action = p.matched_action.map(num).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                num(row.r_asym),
                i + 1,
                num(p.position),
                action
            );
        }
    }
    out
}

/// Family curves of a sweep: `family,k,R,action`.
pub fn families_csv(table: &SweepTable) -> String {
    let mut out = String::from("family,k,R,action\n");
    for c in &table.families {
        for (r, s) in c.r_values.iter().zip(&c.actions) {
            let _ = writeln!(out, "{},{},{},{}", c.family.name(), c.k, num(*r), num(*s));
        }
    }
    out
}

#[derive(Serialize)]
struct PeakRecord {
    position: f64,
    height: f64,
    matched_action: Option<f64>,
    delta: Option<f64>,
}

pub fn peaks_json(peaks: &[Peak]) -> String {
    let records: Vec<PeakRecord> = peaks
        .iter()
        .map(|p| PeakRecord {
            position: p.position,
            height: p.height,
            matched_action: p.matched_action,
            delta: p.delta(),
        })
        .collect();
    to_json(&records)
}

#[derive(Serialize)]
struct MemberRecord<'a> {
    family: &'a str,
    k: u32,
    length: f64,
    reflections: u32,
}

#[derive(Serialize)]
struct PredictedRecord<'a> {
    position: f64,
    height: f64,
    degeneracy: usize,
    members: Vec<MemberRecord<'a>>,
}

pub fn predicted_json(peaks: &[PredictedPeak]) -> String {
    let records: Vec<PredictedRecord> = peaks
        .iter()
        .map(|p| PredictedRecord {
            position: p.position,
            height: p.height,
            degeneracy: p.degeneracy,
            members: p
                .members
                .iter()
                .map(|m| MemberRecord {
                    family: m.family.name(),
                    k: m.k,
                    length: m.length,
                    reflections: m.reflections,
                })
                .collect(),
        })
        .collect();
    to_json(&records)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
