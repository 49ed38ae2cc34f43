//! Resolved run parameters, the flat `key = value` config format and manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the subcommand default.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Refractive index of the medium between the mirrors
    #[arg(long)]
    pub n: Option<f64>,
    /// Atom placement (d2 - d1)/(d2 + d1)
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// Scale factor for single-point commands
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_min: Option<f64>,
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub d_alpha: Option<f64>,
    #[arg(long)]
    pub gamma_min: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub d_gamma: Option<f64>,
    /// Orbit count for `orbits` (0 = all up to gamma-max) and for the
    /// semiclassical line of `rate` (0 = omitted)
    #[arg(long)]
    pub orbits: Option<usize>,
    /// Orbit counts for `reconstruct`, comma separated
    #[arg(long)]
    pub orbit_counts: Option<String>,
    /// Sweep range of R
    #[arg(long = "R-min", allow_hyphen_values = true)]
    pub r_min: Option<f64>,
    #[arg(long = "R-max", allow_hyphen_values = true)]
    pub r_max: Option<f64>,
    #[arg(long = "d-R")]
    pub d_r: Option<f64>,
    /// Peak threshold as a fraction of the largest |W~|
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Minimum separation between detected peaks
    #[arg(long)]
    pub min_sep: Option<f64>,
    /// Seed of the randomized verification checks
    #[arg(long)]
    pub seed: Option<u64>,
    /// Include the cavity-mode suite in `verify`
    #[arg(long)]
    pub modes: bool,
    /// Proceed despite a sampling-rule violation
    #[arg(long)]
    pub force: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Rate curve CSV to analyse instead of sampling one
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key = value file of defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Every parameter after resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub command: String,
    pub n: f64,
    pub r: f64,
    pub alpha: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub d_alpha: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub d_gamma: f64,
    pub orbits: usize,
    pub orbit_counts: Vec<usize>,
    pub r_min: f64,
    pub r_max: f64,
    pub d_r: f64,
    pub threshold: f64,
    pub min_sep: f64,
    pub seed: u64,
    pub modes: bool,
    pub force: bool,
    pub format: Format,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Params {
    pub fn defaults(command: &str) -> Self {
        let sweep = command == "sweep";
        Self {
            command: command.to_string(),
            n: 1.49,
            r: 0.0,
            alpha: 1.0,
            alpha_min: 1.0,
            alpha_max: 16.0,
            d_alpha: if sweep { 0.005 } else { 0.01 },
            gamma_min: 2.0,
            gamma_max: if sweep { 100.0 } else { 50.0 },
            d_gamma: 0.01,
            orbits: 0,
            orbit_counts: vec![4, 16, 100],
            r_min: 0.0,
            r_max: 0.8,
            d_r: 0.05,
            threshold: 0.05,
            min_sep: 0.5,
            seed: 1,
            modes: false,
            force: false,
            format: match command {
                "peaks" | "predict" | "verify" => Format::Json,
                _ => Format::Csv,
            },
            input: None,
            out: None,
        }
    }

    /// Defaults, overlaid by the config file, overlaid by flags.
    pub fn resolve(command: &str, flags: &Flags) -> Result<Self, CliError> {
        let mut p = Self::defaults(command);
        if let Some(path) = &flags.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            p.apply_config(&text)?;
        }
        p.apply_flags(flags)?;
        Ok(p)
    }

    fn apply_flags(&mut self, f: &Flags) -> Result<(), CliError> {
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = f.$field.clone() {
                    self.$field = v;
                }
            )*};
        }
        take!(n, r, alpha, alpha_min, alpha_max, d_alpha, gamma_min, gamma_max, d_gamma);
        take!(orbits, r_min, r_max, d_r, threshold, min_sep, seed, format);
        if let Some(list) = &f.orbit_counts {
            self.orbit_counts = parse_counts(list).map_err(CliError::Usage)?;
        }
        self.modes |= f.modes;
        self.force |= f.force;
        if f.input.is_some() {
            self.input = f.input.clone();
        }
        if f.out.is_some() {
            self.out = f.out.clone();
        }
        Ok(())
    }

    fn apply_config(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", i + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|m| CliError::Usage(format!("config line {}: {m}", i + 1)))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad value `{v}` for {key}"))
        }
        fn flag(key: &str, v: &str) -> Result<bool, String> {
            match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(format!("bad value `{v}` for {key}")),
            }
        }
        fn path(v: &str) -> Option<PathBuf> {
            (!v.is_empty()).then(|| PathBuf::from(v))
        }
        match key {
            "command" => {
                if value != self.command {
                    return Err(format!("written for `{value}`, not `{}`", self.command));
                }
            }
            "n" => self.n = num(key, value)?,
            "R" => self.r = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "alpha_min" => self.alpha_min = num(key, value)?,
            "alpha_max" => self.alpha_max = num(key, value)?,
            "d_alpha" => self.d_alpha = num(key, value)?,
            "gamma_min" => self.gamma_min = num(key, value)?,
            "gamma_max" => self.gamma_max = num(key, value)?,
            "d_gamma" => self.d_gamma = num(key, value)?,
            "orbits" => self.orbits = num(key, value)?,
            "orbit_counts" => self.orbit_counts = parse_counts(value)?,
            "R_min" => self.r_min = num(key, value)?,
            "R_max" => self.r_max = num(key, value)?,
            "d_R" => self.d_r = num(key, value)?,
            "threshold" => self.threshold = num(key, value)?,
            "min_sep" => self.min_sep = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "modes" => self.modes = flag(key, value)?,
            "force" => self.force = flag(key, value)?,
            "format" => {
                self.format = Format::parse(value).ok_or(format!("unknown format `{value}`"))?
            }
            "input" => self.input = path(value),
            "out" => self.out = path(value),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// All resolved parameters in the config format, keys sorted.
    pub fn manifest(&self) -> String {
        let show = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        let counts: Vec<String> = self.orbit_counts.iter().map(|c| c.to_string()).collect();
        let entries: BTreeMap<&str, String> = [
            ("command", self.command.clone()),
            ("n", self.n.to_string()),
            ("R", self.r.to_string()),
            ("alpha", self.alpha.to_string()),
            ("alpha_min", self.alpha_min.to_string()),
            ("alpha_max", self.alpha_max.to_string()),
            ("d_alpha", self.d_alpha.to_string()),
            ("gamma_min", self.gamma_min.to_string()),
            ("gamma_max", self.gamma_max.to_string()),
            ("d_gamma", self.d_gamma.to_string()),
            ("orbits", self.orbits.to_string()),
            ("orbit_counts", counts.join(",")),
            ("R_min", self.r_min.to_string()),
            ("R_max", self.r_max.to_string()),
            ("d_R", self.d_r.to_string()),
            ("threshold", self.threshold.to_string()),
            ("min_sep", self.min_sep.to_string()),
            ("seed", self.seed.to_string()),
            ("modes", self.modes.to_string()),
            ("force", self.force.to_string()),
            ("format", self.format.name().to_string()),
            ("input", show(&self.input)),
            ("out", show(&self.out)),
        ]
        .into_iter()
        .collect();
        let mut s = String::new();
        for (k, v) in entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn manifest_path(&self) -> Option<PathBuf> {
        self.out.as_deref().map(|o| with_suffix(o, ".manifest"))
    }
}

pub fn parse_counts(list: &str) -> Result<Vec<usize>, String> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| format!("bad orbit count `{s}`"))
        })
        .collect()
}

/// `path` with `suffix` appended to its file name.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
