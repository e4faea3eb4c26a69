//! Flat `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, list axes are comma
//! separated. Keys mirror the run-configuration fields.

use std::collections::BTreeMap;

use fcs_tempo::bathcorr::BathParams;
use fcs_tempo::heatstats::default_u_eps;
use fcs_tempo::spinsys::{SpinParams, SpinState};
use fcs_tempo::tempo::RunConfig;
use fcs_tempo::tensornet::TruncationPolicy;

use crate::CliError;

/// Every key the front end understands, with its default (empty = unset).
pub const KEYS: &[(&str, &str)] = &[
    ("alpha", "0.1"),
    ("omega_c", "5"),
    ("temperature", "1"),
    ("omega0", "0"),
    ("omega_tunnel", "1"),
    ("initial", "up"),
    ("delta", "0.05"),
    ("n_steps", "100"),
    ("t_final", ""),
    ("depth", "50"),
    ("p", "60"),
    ("max_bond", ""),
    ("u", ""),
    ("memory_time", ""),
    ("vary", "depth"),
    ("oracle", "quapi"),
];

/// Parsed file: every key maps to one or more raw values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Vec<String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        let mut problems = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(format!("line {}: expected `key = value`", i + 1));
                continue;
            };
            let key = key.trim().to_string();
            let values: Vec<String> = value.split(',').map(|v| v.trim().to_string()).collect();
            if values.iter().any(String::is_empty) {
                problems.push(format!("line {}: empty value for `{key}`", i + 1));
                continue;
            }
            if entries.insert(key.clone(), values).is_some() {
                problems.push(format!("line {}: `{key}` assigned twice", i + 1));
            }
        }
        let unknown: Vec<&str> =
            entries.keys().map(String::as_str).filter(|k| !KEYS.iter().any(|(name, _)| name == k)).collect();
        if !unknown.is_empty() {
            problems.push(format!("unknown keys: {}", unknown.join(", ")));
        }
        if problems.is_empty() {
            Ok(Self { entries })
        } else {
            Err(CliError::Config(problems.join("; ")))
        }
    }

    pub fn set(&mut self, key: &str, values: &[&str]) {
        self.entries.insert(key.to_string(), values.iter().map(|v| v.to_string()).collect());
    }

    /// Keys holding more than one value, in sorted order.
    pub fn axes(&self) -> Vec<String> {
        self.entries.iter().filter(|(_, v)| v.len() > 1).map(|(k, _)| k.clone()).collect()
    }

    /// Values of `key`, falling back to the default.
    pub fn values(&self, key: &str) -> Vec<String> {
        match self.entries.get(key) {
            Some(v) => v.clone(),
            None => default_of(key).into_iter().map(String::from).collect(),
        }
    }

    /// Cross product over every list axis; the last sorted axis varies fastest.
    pub fn expand(&self) -> Vec<Point> {
        let mut points = vec![Point::default()];
        for (key, default) in KEYS {
            let values = self.entries.get(*key).cloned().unwrap_or_else(|| {
                if default.is_empty() {
                    Vec::new()
                } else {
                    vec![default.to_string()]
                }
            });
            if values.is_empty() {
                continue;
            }
            let mut next = Vec::with_capacity(points.len() * values.len());
            for p in &points {
                for v in &values {
                    let mut q = p.clone();
                    q.0.insert(key.to_string(), v.clone());
                    next.push(q);
                }
            }
            points = next;
        }
        points
    }

    /// The single point of a configuration without list axes.
    pub fn single(&self) -> Result<Point, CliError> {
        let axes = self.axes();
        if !axes.is_empty() {
            return Err(CliError::Config(format!("this command takes single values, but lists were given for: {}", axes.join(", "))));
        }
        Ok(self.expand().remove(0))
    }
}

fn default_of(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d).filter(|d| !d.is_empty())
}

/// One fully resolved assignment of every set key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point(pub BTreeMap<String, String>);

impl Point {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key)
            .map(|v| v.parse::<f64>().map_err(|_| CliError::Config(format!("`{key}` must be a number, got `{v}`"))))
            .transpose()
    }

    fn count(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.get(key)
            .map(|v| v.parse::<usize>().map_err(|_| CliError::Config(format!("`{key}` must be a non-negative integer, got `{v}`"))))
            .transpose()
    }

    fn need_real(&self, key: &str) -> Result<f64, CliError> {
        self.real(key)?.ok_or_else(|| CliError::Config(format!("missing `{key}`")))
    }

    pub fn with(&self, key: &str, value: &str) -> Self {
        let mut p = self.clone();
        p.0.insert(key.to_string(), value.to_string());
        p
    }

    /// Typed parameters; engine validation failures count as config errors.
    pub fn params(&self) -> Result<Params, CliError> {
        let cfg = |e: fcs_tempo::Error| CliError::Config(e.to_string());
        let bath = BathParams::ohmic(self.need_real("alpha")?, self.need_real("omega_c")?, self.need_real("temperature")?)
            .map_err(cfg)?;
        let spin = SpinParams::new(self.need_real("omega0")?, self.need_real("omega_tunnel")?).map_err(cfg)?;
        let name = self.get("initial").unwrap_or("up");
        let initial = SpinState::named(name)
            .ok_or_else(|| CliError::Config(format!("`initial` must be one of up, down, left, right; got `{name}`")))?;
        let delta = self.need_real("delta")?;
        let n_steps = match self.real("t_final")? {
            Some(t) if delta > 0.0 => (t / delta).round() as usize,
            _ => self.count("n_steps")?.unwrap_or(0),
        };
        let depth = self.count("depth")?.unwrap_or(0);
        let p = match self.get("p") {
            Some("inf") | Some("none") => None,
            _ => self.real("p")?,
        };
        let policy = TruncationPolicy::new(p, self.count("max_bond")?).map_err(cfg)?;
        let u = match self.real("u")? {
            Some(u) => u,
            None => default_u_eps(bath.spectral().alpha(), bath.spectral().omega_c()),
        };
        let mut run = RunConfig::new(spin, bath, initial, delta, n_steps, depth).with_policy(policy).with_u(u);
        run.memory_time = self.real("memory_time")?;
        run.validate().map_err(cfg)?;
        Ok(Params { run, u })
    }
}

/// A resolved run configuration and its counting field.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub run: RunConfig<f64>,
    pub u: f64,
}

impl Params {
    pub fn at_u(&self, u: f64) -> RunConfig<f64> {
        self.run.clone().with_u(u)
    }
}
