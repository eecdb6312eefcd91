//! INI-style run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lae_core::field_calculus::GridSpec;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: malformed entry `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("unknown key [{section}].{key}")]
    UnknownKey { section: String, key: String },
    #[error("[{section}].{key}: {reason}")]
    Invalid { section: String, key: String, reason: String },
    #[error("override `{0}` must look like --section.key=value")]
    BadOverride(String),
}

fn invalid(section: &str, key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { section: section.into(), key: key.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    TaylorGreen,
    Random,
    Zero,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::TaylorGreen => "taylor_green",
            Preset::Random => "random",
            Preset::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub eps: f64,
    pub n_noise: usize,
    pub xi_seed: u64,
    pub noise_band: i64,
    pub noise_amplitude: f64,
    /// Initial mean flow.
    pub preset: Preset,
    /// Initial correlation `F₀ = alpha² I`.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub n_members: usize,
    pub seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub antithetic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub time: TimeConfig,
    pub mc: McConfig,
    pub output: OutputConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            grid: GridConfig { n: 64 },
            model: ModelConfig {
                eps: 0.1,
                n_noise: 2,
                xi_seed: 1,
                noise_band: 2,
                noise_amplitude: 0.5,
                preset: Preset::TaylorGreen,
                alpha: 0.0,
            },
            time: TimeConfig { dt: 1e-3, t_end: 1.0, snapshot_every: 100 },
            mc: McConfig { n_members: 1000, seed: 1, dt: 1e-3, t_end: 0.5, antithetic: false },
            output: OutputConfig { dir: PathBuf::from("out") },
        }
    }
}

fn num<T: std::str::FromStr>(section: &str, key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| invalid(section, key, format!("cannot parse `{v}`")))
}

fn boolean(section: &str, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(invalid(section, key, format!("expected a boolean, got `{v}`"))),
    }
}

impl Config {
    /// Set one key from its textual value.
    pub fn set(&mut self, section: &str, key: &str, v: &str) -> Result<(), ConfigError> {
        let (s, k) = (section, key);
        match (s, k) {
            ("grid", "n") => self.grid.n = num(s, k, v)?,
            ("model", "eps") => self.model.eps = num(s, k, v)?,
            ("model", "n_noise") => self.model.n_noise = num(s, k, v)?,
            ("model", "xi_seed") => self.model.xi_seed = num(s, k, v)?,
            ("model", "noise_band") => self.model.noise_band = num(s, k, v)?,
            ("model", "noise_amplitude") => self.model.noise_amplitude = num(s, k, v)?,
            ("model", "alpha") => self.model.alpha = num(s, k, v)?,
            ("model", "preset") => {
                self.model.preset = match v {
                    "taylor_green" => Preset::TaylorGreen,
                    "random" => Preset::Random,
                    "zero" => Preset::Zero,
                    _ => return Err(invalid(s, k, format!("unknown preset `{v}`"))),
                }
            }
            ("time", "dt") => self.time.dt = num(s, k, v)?,
            ("time", "t_end") => self.time.t_end = num(s, k, v)?,
            ("time", "snapshot_every") => self.time.snapshot_every = num(s, k, v)?,
            ("mc", "n_members") => self.mc.n_members = num(s, k, v)?,
            ("mc", "seed") => self.mc.seed = num(s, k, v)?,
            ("mc", "dt") => self.mc.dt = num(s, k, v)?,
            ("mc", "t_end") => self.mc.t_end = num(s, k, v)?,
            ("mc", "antithetic") => self.mc.antithetic = boolean(s, k, v)?,
            ("output", "dir") => self.output.dir = PathBuf::from(v),
            _ => return Err(ConfigError::UnknownKey { section: s.into(), key: k.into() }),
        }
        Ok(())
    }

    /// Apply `--section.key=value` flags.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, flags: &[S]) -> Result<(), ConfigError> {
        for f in flags {
            let f = f.as_ref();
            let body = f.strip_prefix("--").ok_or_else(|| ConfigError::BadOverride(f.into()))?;
            let (path, value) = body.split_once('=').ok_or_else(|| ConfigError::BadOverride(f.into()))?;
            let (section, key) = path.split_once('.').ok_or_else(|| ConfigError::BadOverride(f.into()))?;
            self.set(section, key, value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        GridSpec::periodic(self.grid.n).map_err(|e| invalid("grid", "n", e.to_string()))?;
        let m = &self.model;
        if !(0.0..1.0).contains(&m.eps) {
            return Err(invalid("model", "eps", format!("{} outside [0, 1)", m.eps)));
        }
        if m.n_noise > 64 {
            return Err(invalid("model", "n_noise", format!("{} exceeds 64 channels", m.n_noise)));
        }
        if m.noise_band < 1 || m.noise_band as usize >= self.grid.n / 4 {
            return Err(invalid("model", "noise_band", format!("{} outside [1, n/4)", m.noise_band)));
        }
        positive_or_zero("model", "noise_amplitude", m.noise_amplitude)?;
        positive_or_zero("model", "alpha", m.alpha)?;
        positive("time", "dt", self.time.dt)?;
        positive("time", "t_end", self.time.t_end)?;
        if self.time.dt > self.time.t_end {
            return Err(invalid("time", "dt", "larger than t_end"));
        }
        if self.time.snapshot_every == 0 {
            return Err(invalid("time", "snapshot_every", "must be at least 1"));
        }
        let mc = &self.mc;
        if mc.n_members < 2 {
            return Err(invalid("mc", "n_members", "need at least 2 members"));
        }
        if mc.antithetic && mc.n_members % 2 == 1 {
            return Err(invalid("mc", "n_members", "antithetic ensembles need an even count"));
        }
        positive("mc", "dt", mc.dt)?;
        positive("mc", "t_end", mc.t_end)?;
        if mc.dt > mc.t_end {
            return Err(invalid("mc", "dt", "larger than t_end"));
        }
        if self.output.dir.as_os_str().is_empty() {
            return Err(invalid("output", "dir", "empty path"));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::periodic(self.grid.n).expect("validated")
    }

    /// Canonical text with every key, in fixed order; hashed into manifests.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let m = &self.model;
        let _ = write!(
            s,
            "[grid]\nn = {}\n\n[model]\neps = {:?}\nn_noise = {}\nxi_seed = {}\nnoise_band = {}\nnoise_amplitude = {:?}\npreset = {}\nalpha = {:?}\n\n",
            self.grid.n, m.eps, m.n_noise, m.xi_seed, m.noise_band, m.noise_amplitude, m.preset.name(), m.alpha
        );
        let _ = write!(
            s,
            "[time]\ndt = {:?}\nt_end = {:?}\nsnapshot_every = {}\n\n[mc]\nn_members = {}\nseed = {}\ndt = {:?}\nt_end = {:?}\nantithetic = {}\n\n[output]\ndir = {}\n",
            self.time.dt,
            self.time.t_end,
            self.time.snapshot_every,
            self.mc.n_members,
            self.mc.seed,
            self.mc.dt,
            self.mc.t_end,
            self.mc.antithetic,
            self.output.dir.display()
        );
        s
    }
}

fn positive(section: &str, key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(section, key, format!("{v} must be positive")))
    }
}

fn positive_or_zero(section: &str, key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(section, key, format!("{v} must be non-negative")))
    }
}

/// Parse INI text on top of the defaults. `#` and `;` start comments.
pub fn parse_str(text: &str) -> Result<Config, ConfigError> {
    let mut cfg = Config::default();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Malformed { line: i + 1, text: raw.into() })?
                .trim();
            if !matches!(name, "grid" | "model" | "time" | "mc" | "output") {
                return Err(ConfigError::UnknownSection { line: i + 1, section: name.into() });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Malformed { line: i + 1, text: raw.into() })?;
        let sec = section.as_deref().ok_or_else(|| ConfigError::Malformed { line: i + 1, text: raw.into() })?;
        cfg.set(sec, key.trim(), value.trim())?;
    }
    Ok(cfg)
}

/// Read, parse and validate a configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    let cfg = parse_str(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_round_trips() {
        let mut c = Config::default();
        c.model.eps = 0.3;
        c.mc.antithetic = true;
        c.mc.n_members = 10;
        let back = parse_str(&c.render()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn comments_and_whitespace() {
        let c = parse_str("# header\n[grid]\n  n = 32 ; trailing\n\n[mc]\nantithetic=yes\n").unwrap();
        assert_eq!(c.grid.n, 32);
        assert!(c.mc.antithetic);
        assert!(matches!(parse_str("n = 3"), Err(ConfigError::Malformed { line: 1, .. })));
        assert!(matches!(parse_str("[grid\n"), Err(ConfigError::Malformed { .. })));
    }
}
