//! Run configuration: defaults, then the config file, then `DRESSED_RING_TOL_OVERRIDE`, then
//! command-line flags (flags win).
//!
//! Physical inputs are dimensionful with `ħ = c = 1`: `m` and energies share one unit, lengths
//! are in its inverse and `γ` in its square. With `m = 1` everything is relative to the photon
//! mass.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use dressed_ring::{SolveMode, SystemParamsF64, Tolerances};

use crate::error::{CliError, Result};

pub const TOL_OVERRIDE_ENV: &str = "DRESSED_RING_TOL_OVERRIDE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    Spectrum,
    ExcitationCurve,
    Selfenergy,
    Resonances,
    Field,
    Oracle,
    Verify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Spectrum => "spectrum",
            Subcommand::ExcitationCurve => "excitation-curve",
            Subcommand::Selfenergy => "selfenergy",
            Subcommand::Resonances => "resonances",
            Subcommand::Field => "field",
            Subcommand::Oracle => "oracle",
            Subcommand::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Selects one resonant state: arc, half-wavelength count and χ branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResonanceSpec {
    pub region: dressed_ring::Region,
    pub nu: u32,
    pub branch: u8,
}

/// Dressed states of emitters on a ring waveguide.
#[derive(Debug, Parser)]
#[command(name = "dressed-ring", version, about)]
pub struct Args {
    pub subcommand: Subcommand,

    /// INI-style file of `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Photon mass (sets the energy unit)
    #[arg(long)]
    pub m: Option<f64>,

    /// Ring circumference
    #[arg(long = "L")]
    pub length: Option<f64>,

    /// Coupling constant
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Emitter excitation energy
    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Emitter separation; omit for a single emitter
    #[arg(long)]
    pub d: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub k_min: Option<i64>,

    #[arg(long)]
    pub k_max: Option<i64>,

    /// Output directory; stdout if omitted
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long)]
    pub format: Option<Format>,

    /// Worker threads for the oracle ladder
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Any config key, e.g. `--set e_steps=400` or `--set quad_rel=1e-10`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Args {
    /// Explicit flags as config entries, in a fixed order.
    fn entries(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("m", self.m.map(|v| v.to_string()));
        push("L", self.length.map(|v| v.to_string()));
        push("gamma", self.gamma.map(|v| v.to_string()));
        push("epsilon", self.epsilon.map(|v| v.to_string()));
        push("d", self.d.map(|v| v.to_string()));
        push("k_min", self.k_min.map(|v| v.to_string()));
        push("k_max", self.k_max.map(|v| v.to_string()));
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("format", self.format.map(|f| format_name(f).to_string()));
        push("jobs", self.jobs.map(|v| v.to_string()));
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(out)
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub mass: f64,
    pub length: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub separation: Option<f64>,
    pub k_min: i64,
    pub k_max: i64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: usize,
    pub tolerances: Tolerances,
    /// Oracle cut-offs `K`.
    pub ladder: Vec<i64>,
    pub mode: SolveMode,
    /// Energy grid for `selfenergy`.
    pub e_min: f64,
    pub e_max: f64,
    pub e_steps: usize,
    /// Optional ε sweep for `excitation-curve`.
    pub eps_min: Option<f64>,
    pub eps_max: Option<f64>,
    pub eps_steps: usize,
    pub nu_max: u32,
    pub detuning_tol: f64,
    pub headroom: f64,
    /// Field grid points; chosen from the state's cut-off when absent.
    pub n_grid: Option<usize>,
    /// Interval of the state plotted by `field` (defaults to `k_min`).
    pub state_k: Option<i64>,
    pub parity: dressed_ring::Parity,
    pub resonance: Option<ResonanceSpec>,
}

impl RunConfig {
    pub fn defaults(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            mass: 1.0,
            length: 10.0,
            gamma: 1e-2,
            epsilon: 2.3,
            separation: None,
            k_min: 0,
            k_max: 20,
            out: None,
            format: Format::Csv,
            jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            tolerances: Tolerances::default(),
            ladder: vec![250, 500, 1000, 2000],
            mode: SolveMode::FullDeterminant,
            e_min: 0.05,
            e_max: 4.0,
            e_steps: 400,
            eps_min: None,
            eps_max: None,
            eps_steps: 1,
            nu_max: 6,
            detuning_tol: dressed_ring::resonance::DEFAULT_DETUNING_TOL,
            headroom: dressed_ring::resonance::DEFAULT_HEADROOM,
            n_grid: None,
            state_k: None,
            parity: dressed_ring::Parity::Symmetric,
            resonance: None,
        }
    }

    /// Resolves the full configuration from parsed flags and the environment.
    pub fn from_args(args: &Args) -> Result<Self> {
        let mut cfg = Self::defaults(args.subcommand);
        if let Some(path) = &args.config {
            for (k, v) in read_config_file(path)? {
                cfg.apply(&k, &v)?;
            }
        }
        if let Ok(blob) = std::env::var(TOL_OVERRIDE_ENV) {
            cfg.apply_tolerance_override(&blob)?;
        }
        for (k, v) in args.entries()? {
            cfg.apply(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key. Keys are case-sensitive (`L` is the length); `-` and `_` are interchangeable.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        match key.as_str() {
            "m" => self.mass = num(&key, value)?,
            "L" => self.length = num(&key, value)?,
            "gamma" => self.gamma = num(&key, value)?,
            "epsilon" => self.epsilon = num(&key, value)?,
            "d" => self.separation = optional(value).map(|v| num(&key, v)).transpose()?,
            "k_min" => self.k_min = num(&key, value)?,
            "k_max" => self.k_max = num(&key, value)?,
            "out" => self.out = optional(value).map(PathBuf::from),
            "format" => {
                self.format = Format::from_str(value, true).map_err(|_| CliError::Usage(format!("format must be csv or json, got '{value}'")))?
            }
            "jobs" => self.jobs = num(&key, value)?,
            "ladder" => {
                self.ladder = value.split(',').map(|s| num("ladder", s.trim())).collect::<Result<_>>()?;
            }
            "mode" => {
                self.mode = match value {
                    "full" => SolveMode::FullDeterminant,
                    "approx" => SolveMode::Approximate,
                    _ => return Err(CliError::Usage(format!("mode must be full or approx, got '{value}'"))),
                }
            }
            "e_min" => self.e_min = num(&key, value)?,
            "e_max" => self.e_max = num(&key, value)?,
            "e_steps" => self.e_steps = num(&key, value)?,
            "eps_min" => self.eps_min = optional(value).map(|v| num(&key, v)).transpose()?,
            "eps_max" => self.eps_max = optional(value).map(|v| num(&key, v)).transpose()?,
            "eps_steps" => self.eps_steps = num(&key, value)?,
            "nu_max" => self.nu_max = num(&key, value)?,
            "detuning_tol" => self.detuning_tol = num(&key, value)?,
            "headroom" => self.headroom = num(&key, value)?,
            "n_grid" => self.n_grid = optional(value).map(|v| num(&key, v)).transpose()?,
            "state_k" => self.state_k = optional(value).map(|v| num(&key, v)).transpose()?,
            "parity" => {
                self.parity = match value {
                    "symmetric" | "+" | "+1" => dressed_ring::Parity::Symmetric,
                    "antisymmetric" | "-" | "-1" => dressed_ring::Parity::Antisymmetric,
                    _ => return Err(CliError::Usage(format!("parity must be symmetric or antisymmetric, got '{value}'"))),
                }
            }
            "resonance" => self.resonance = optional(value).map(parse_resonance).transpose()?,
            _ => {
                if !set_tolerance(&mut self.tolerances, &key, value)? {
                    return Err(CliError::Usage(format!("unknown config key '{key}'")));
                }
            }
        }
        Ok(())
    }

    /// Applies a JSON object of tolerance fields, e.g. `{"quad_rel": 1e-10}`.
    pub fn apply_tolerance_override(&mut self, blob: &str) -> Result<()> {
        let value: serde_json::Value =
            serde_json::from_str(blob).map_err(|e| CliError::Usage(format!("{TOL_OVERRIDE_ENV}: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| CliError::Usage(format!("{TOL_OVERRIDE_ENV} must be a JSON object")))?;
        for (k, v) in obj {
            if !set_tolerance(&mut self.tolerances, k, &v.to_string())? {
                return Err(CliError::Usage(format!("{TOL_OVERRIDE_ENV}: unknown tolerance '{k}'")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        self.params()?;
        if self.k_min < 0 || self.k_max < self.k_min {
            return Err(CliError::Usage(format!("need 0 <= k_min <= k_max, got {}..{}", self.k_min, self.k_max)));
        }
        if self.jobs == 0 {
            return Err(CliError::Usage("jobs must be >= 1".into()));
        }
        if self.ladder.is_empty() || self.ladder.iter().any(|&k| k < 1) {
            return Err(CliError::Usage("ladder must list positive cut-offs".into()));
        }
        if !(self.e_min > 0.0 && self.e_max > self.e_min && self.e_steps >= 2) {
            return Err(CliError::Usage("need 0 < e_min < e_max and e_steps >= 2".into()));
        }
        match (self.eps_min, self.eps_max) {
            (None, None) => {}
            (Some(a), Some(b)) if a > 0.0 && b > a && self.eps_steps >= 2 => {}
            _ => return Err(CliError::Usage("an ε sweep needs 0 < eps_min < eps_max and eps_steps >= 2".into())),
        }
        if !(self.detuning_tol > 0.0 && self.headroom > 0.0) {
            return Err(CliError::Usage("detuning_tol and headroom must be positive".into()));
        }
        if let Some(n) = self.n_grid {
            if n < 2 || n % 2 == 1 {
                return Err(CliError::Usage(format!("n_grid must be even and >= 2, got {n}")));
            }
        }
        Ok(())
    }

    /// Parameters in units of `m`. Emitter 1 sits at the origin, emitter 2 at `d` along the ring.
    pub fn params(&self) -> Result<SystemParamsF64> {
        let positions = match self.separation {
            None => vec![0.0],
            Some(d) => {
                if !(d > 0.0 && d < self.length) {
                    return Err(CliError::Usage(format!("need 0 < d < L, got d = {d}, L = {}", self.length)));
                }
                vec![0.0, if d >= self.length / 2.0 { d - self.length } else { d }]
            }
        };
        SystemParamsF64::from_dimensionful(self.mass, self.length, self.gamma, self.epsilon, &positions)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Converts a dimensionful energy to units of `m`.
    pub fn energy_in_m(&self, e: f64) -> f64 {
        e / self.mass
    }

    /// One-line `key=value` echo of every setting, in a fixed order.
    pub fn echo(&self) -> String {
        let t = &self.tolerances;
        let g = |x: f64| format!("{x:?}");
        let opt = |v: Option<f64>| v.map_or("none".to_string(), g);
        let mut s = format!(
            "subcommand={} m={} L={} gamma={} epsilon={} d={} k_min={} k_max={} format={} mode={} ladder={}",
            self.subcommand.name(),
            g(self.mass),
            g(self.length),
            g(self.gamma),
            g(self.epsilon),
            opt(self.separation),
            self.k_min,
            self.k_max,
            format_name(self.format),
            if self.mode == SolveMode::FullDeterminant { "full" } else { "approx" },
            self.ladder.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
        );
        let _ = write!(
            s,
            " e_min={} e_max={} e_steps={} eps_min={} eps_max={} eps_steps={} nu_max={} detuning_tol={} headroom={}",
            g(self.e_min),
            g(self.e_max),
            self.e_steps,
            opt(self.eps_min),
            opt(self.eps_max),
            self.eps_steps,
            self.nu_max,
            g(self.detuning_tol),
            g(self.headroom),
        );
        let _ = write!(
            s,
            " n_grid={} state_k={} parity={} resonance={}",
            self.n_grid.map_or("auto".to_string(), |n| n.to_string()),
            self.state_k.map_or("k_min".to_string(), |k| k.to_string()),
            if self.parity == dressed_ring::Parity::Symmetric { "symmetric" } else { "antisymmetric" },
            self.resonance.map_or("none".to_string(), |r| format!(
                "{}:{}:{}",
                if r.region == dressed_ring::Region::Inner { "inner" } else { "outer" },
                r.nu,
                r.branch
            )),
        );
        let _ = write!(
            s,
            " quad_rel={} pole_exclusion={} bracket={} residual={} root_acceptance={} tail={} k_trunc_cap={} search_floor={} removable={} max_quad_intervals={}",
            g(t.quad_rel),
            g(t.pole_exclusion),
            g(t.bracket),
            g(t.residual),
            g(t.root_acceptance),
            g(t.tail),
            t.k_trunc_cap,
            g(t.search_floor),
            g(t.removable),
            t.max_quad_intervals,
        );
        s
    }
}

fn optional(value: &str) -> Option<&str> {
    match value.trim() {
        "" | "none" => None,
        v => Some(v),
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value '{value}' for '{key}'")))
}

/// `region:nu:branch`, e.g. `inner:2:1`.
fn parse_resonance(value: &str) -> Result<ResonanceSpec> {
    let bad = || CliError::Usage(format!("resonance must look like inner:2:1, got '{value}'"));
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    let [region, nu, branch] = parts.as_slice() else {
        return Err(bad());
    };
    let region = match *region {
        "inner" => dressed_ring::Region::Inner,
        "outer" => dressed_ring::Region::Outer,
        _ => return Err(bad()),
    };
    let nu: u32 = nu.parse().map_err(|_| bad())?;
    let branch: u8 = branch.parse().map_err(|_| bad())?;
    if nu == 0 || !(1..=2).contains(&branch) {
        return Err(bad());
    }
    Ok(ResonanceSpec { region, nu, branch })
}

/// Sets a [`Tolerances`] field by name. Returns `false` for an unknown name.
fn set_tolerance(t: &mut Tolerances, key: &str, value: &str) -> Result<bool> {
    match key {
        "quad_rel" => t.quad_rel = num(key, value)?,
        "pole_exclusion" => t.pole_exclusion = num(key, value)?,
        "bracket" => t.bracket = num(key, value)?,
        "residual" => t.residual = num(key, value)?,
        "root_acceptance" => t.root_acceptance = num(key, value)?,
        "tail" => t.tail = num(key, value)?,
        "k_trunc_cap" => t.k_trunc_cap = num(key, value)?,
        "search_floor" => t.search_floor = num(key, value)?,
        "removable" => t.removable = num(key, value)?,
        "max_quad_intervals" => t.max_quad_intervals = num(key, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

/// Reads `key = value` pairs in file order. Section headers are accepted and ignored, so the
/// file is effectively flat. `#` and `;` start comments, also after a value when preceded by a space.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn parse_config(text: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let opt = ini::ParseOption { enabled_quote: false, enabled_escape: false, ..Default::default() };
    let doc = ini::Ini::load_from_str_opt(text, opt).map_err(|e| e.to_string())?;
    Ok(doc
        .iter()
        .flat_map(|(_, props)| props.iter().map(|(k, v)| (k.to_string(), v.to_string())))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Args {
        Args::try_parse_from(std::iter::once("dressed-ring").chain(v.iter().copied())).unwrap()
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ini");
        std::fs::write(&path, "# ring\n[system]\nL = 20\ngamma = 1e-3 ; weak\nepsilon=3\n").unwrap();
        let a = args(&["spectrum", "--config", path.to_str().unwrap(), "--L", "12"]);
        let c = RunConfig::from_args(&a).unwrap();
        assert_eq!(c.length, 12.0);
        assert_eq!(c.gamma, 1e-3);
        assert_eq!(c.epsilon, 3.0);
    }

    #[test]
    fn unknown_key_is_a_usage_error() {
        let mut c = RunConfig::defaults(Subcommand::Spectrum);
        let e = c.apply("lenght", "3").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(c.apply("quad_rel", "1e-10").is_ok());
        assert_eq!(c.tolerances.quad_rel, 1e-10);
    }

    #[test]
    fn tolerance_override_by_name() {
        let mut c = RunConfig::defaults(Subcommand::Verify);
        c.apply_tolerance_override(r#"{"pole_exclusion": 1e-8, "k_trunc_cap": 5000}"#).unwrap();
        assert_eq!(c.tolerances.pole_exclusion, 1e-8);
        assert_eq!(c.tolerances.k_trunc_cap, 5000);
        assert!(c.apply_tolerance_override(r#"{"nope": 1}"#).is_err());
        c.apply_tolerance_override(r#"{"tail": -1}"#).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn separation_beyond_half_ring() {
        let mut c = RunConfig::defaults(Subcommand::Spectrum);
        c.apply("d", "7").unwrap();
        let p = c.params().unwrap();
        assert!((p.separation().unwrap() - 7.0).abs() < 1e-12);
        c.apply("d", "10").unwrap();
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn dimensionful_inputs_are_rescaled() {
        let mut c = RunConfig::defaults(Subcommand::Spectrum);
        for (k, v) in [("m", "2"), ("L", "5"), ("gamma", "4e-2"), ("epsilon", "4.6")] {
            c.apply(k, v).unwrap();
        }
        let p = c.params().unwrap();
        assert_eq!((p.length(), p.gamma(), p.epsilon()), (10.0, 1e-2, 2.3));
    }

    #[test]
    fn resonance_spec_parses() {
        let r = parse_resonance("outer:3:2").unwrap();
        assert_eq!((r.region, r.nu, r.branch), (dressed_ring::Region::Outer, 3, 2));
        assert!(parse_resonance("inner:0:1").is_err());
        assert!(parse_resonance("inner:1").is_err());
    }
}
