//! Experiment configuration files.
//!
//! Configs are TOML:
//!
//! ```toml
//! name = "example"
//! seed = 7              # master seed; required (or pass --seed)
//! T = 2000              # horizon
//! runs = 50             # paired runs per cell
//! # out = "results"     # output directory
//! # traces = true       # also write traces.csv
//! # trace_stride = 10   # default ceil(T / 200)
//!
//! [env]
//! kind = "linear_contextual"   # or "karmed"
//! d = 10
//! K = [3, 10]
//! sigma = [0.5, 1.0]
//! posterior = "known"          # or "nig"
//! bounds = "posterior"         # or "ridge"
//!
//! [[policies]]
//! kind = "ts"
//!
//! [[policies]]
//! kind = "tsucb"
//! m = 100
//! ```
//!
//! `d`, `sigma`, `posterior` and `bounds` do not apply to `karmed`. Overrides use
//! dotted paths, with array elements addressed by index: `T=500`,
//! `env.K=[10]`, `policies.1.m=5`. Values are parsed as TOML and fall back
//! to bare strings.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envs::{EnvKind, EnvParams};
use crate::error::{Error, Result};
use crate::harness::{default_trace_stride, CellSpec, GridSpec};
use crate::policies::agent::{BoundsSource, PosteriorFamily};
use crate::policies::{PolicyConfig, PolicyKind};

/// Built-in configs, addressable by name wherever a config path is taken.
pub const PRESETS: [(&str, &str); 2] = [
    ("paper_grid", include_str!("../presets/paper_grid.toml")),
    ("desk_grid", include_str!("../presets/desk_grid.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    pub kind: EnvKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior: Option<PosteriorFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub kind: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids_samples: Option<usize>,
}

impl PolicySection {
    pub fn to_policy(&self, index: usize) -> Result<PolicyConfig> {
        let field = |f: &str| format!("policies.{index}.{f}");
        if self.m.is_some() && self.kind != PolicyKind::Tsucb {
            return Err(Error::config(field("m"), "only applies to tsucb"));
        }
        if self.ids_samples.is_some() && self.kind != PolicyKind::Ids {
            return Err(Error::config(field("ids_samples"), "only applies to ids"));
        }
        let mut p = PolicyConfig::new(self.kind);
        if let Some(m) = self.m {
            if m < 1 {
                return Err(Error::config(field("m"), "must be at least 1"));
            }
            p.m = m;
        }
        if let Some(n) = self.ids_samples {
            if n < 2 {
                return Err(Error::config(field("ids_samples"), "must be at least 2"));
            }
            p.ids_samples = n;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Written as a string when it does not fit a TOML integer.
    #[serde(default, with = "seed_repr", skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub runs: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub traces: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_stride: Option<u64>,
    pub env: EnvSection,
    pub policies: Vec<PolicySection>,
}

fn default_name() -> String {
    "experiment".into()
}

mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Str(String),
    }

    pub fn serialize<S: Serializer>(seed: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match seed {
            Some(v) if *v <= i64::MAX as u64 => s.serialize_i64(*v as i64),
            Some(v) => s.serialize_str(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        use serde::de::Error;
        match Repr::deserialize(d)? {
            Repr::Int(v) => u64::try_from(v).map(Some).map_err(|_| D::Error::custom("seed must be non-negative")),
            Repr::Str(s) => s.parse().map(Some).map_err(|_| D::Error::custom(format!("invalid seed `{s}`"))),
        }
    }
}

/// Turns a TOML deserialization failure into a field-level config error.
fn toml_error(e: &dyn std::fmt::Display) -> Error {
    let msg = e.to_string();
    let field = msg
        .split('`')
        .nth(1)
        .filter(|f| !f.is_empty() && !f.contains(' '))
        .unwrap_or("config");
    Error::config(field, msg.trim().replace('\n', " "))
}

fn parse_override(s: &str) -> Result<(String, toml::Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Error::config(s, "override must look like key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::config(s, "empty override key"));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

fn set_path(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    let (last, init) = parts.split_last().expect("split yields at least one part");
    let mut node: &mut toml::Value = root
        .entry(init.first().copied().unwrap_or(last).to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    if init.is_empty() {
        *node = value;
        return Ok(());
    }
    for part in init.iter().skip(1).chain(std::iter::once(last)) {
        node = match node {
            toml::Value::Table(t) => t
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(a) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| Error::config(key, format!("`{part}` is not an array index")))?;
                let len = a.len();
                a.get_mut(i)
                    .ok_or_else(|| Error::config(key, format!("index {i} out of range (length {len})")))?
            }
            _ => return Err(Error::config(key, format!("cannot descend into `{part}`"))),
        };
    }
    *node = value;
    Ok(())
}

impl ExperimentConfig {
    /// Parses TOML text and applies `key=value` overrides.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| toml_error(&e))?;
        for o in overrides {
            let (key, value) = parse_override(o)?;
            set_path(&mut table, &key, value)?;
        }
        let cfg = ExperimentConfig::deserialize(toml::Value::Table(table)).map_err(|e| toml_error(&e))?;
        Ok(cfg)
    }

    /// Loads a file, or a preset when `source` names one and no such file
    /// exists.
    pub fn load(source: &str, overrides: &[String]) -> Result<Self> {
        let path = Path::new(source);
        let text = if path.exists() {
            std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?
        } else if let Some(text) = preset(source) {
            text.to_string()
        } else {
            return Err(Error::config(
                "config",
                format!("`{source}` is neither a file nor a preset ({})", preset_names()),
            ));
        };
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn master_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::config("seed", "missing required field"))
    }

    pub fn validate(&self) -> Result<()> {
        self.grid().map(|_| ())
    }

    pub fn policies(&self) -> Result<Vec<PolicyConfig>> {
        if self.policies.is_empty() {
            return Err(Error::config("policies", "at least one policy is required"));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(self.policies.len());
        for (i, p) in self.policies.iter().enumerate() {
            let cfg = p.to_policy(i)?;
            if !seen.insert(cfg.sort_key()) {
                return Err(Error::config(format!("policies.{i}"), format!("duplicate policy {cfg}")));
            }
            out.push(cfg);
        }
        if !out.iter().any(|p| p.kind == PolicyKind::Ts) {
            return Err(Error::config("policies", "TS is required as the regret baseline"));
        }
        Ok(out)
    }

    pub fn cells(&self) -> Result<Vec<CellSpec>> {
        let env = &self.env;
        if env.k.is_empty() {
            return Err(Error::config("env.K", "at least one arm count is required"));
        }
        if let Some(&k) = env.k.iter().find(|&&k| k < 2) {
            return Err(Error::config("env.K", format!("need at least 2 arms, got {k}")));
        }
        let mut cells = Vec::new();
        match env.kind {
            EnvKind::Karmed => {
                for (field, present) in [
                    ("env.d", env.d.is_some()),
                    ("env.sigma", env.sigma.is_some()),
                    ("env.posterior", env.posterior.is_some()),
                    ("env.bounds", env.bounds.is_some()),
                ] {
                    if present {
                        return Err(Error::config(field, "does not apply to karmed"));
                    }
                }
                for &k in &env.k {
                    if self.horizon < k as u64 {
                        return Err(Error::config(
                            "T",
                            format!("horizon {} is shorter than the {k} forced-exploration steps", self.horizon),
                        ));
                    }
                    cells.push(CellSpec::new(EnvParams::karmed(k), self.horizon));
                }
            }
            EnvKind::LinearContextual => {
                let d = env.d.ok_or_else(|| Error::config("env.d", "missing required field"))?;
                if d == 0 {
                    return Err(Error::config("env.d", "must be positive"));
                }
                let sigmas = env
                    .sigma
                    .as_ref()
                    .ok_or_else(|| Error::config("env.sigma", "missing required field"))?;
                if sigmas.is_empty() {
                    return Err(Error::config("env.sigma", "at least one value is required"));
                }
                if let Some(s) = sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
                    return Err(Error::config("env.sigma", format!("must be positive, got {s}")));
                }
                for &k in &env.k {
                    for &s in sigmas {
                        cells.push(CellSpec {
                            env: EnvParams::linear_contextual(d, k, s),
                            posterior: env.posterior.unwrap_or_default(),
                            bounds: env.bounds.unwrap_or_default(),
                            horizon: self.horizon,
                        });
                    }
                }
            }
        }
        let mut keys = BTreeSet::new();
        for c in &cells {
            if !keys.insert(c.key()) {
                return Err(Error::config("env", format!("duplicate cell {c}")));
            }
        }
        Ok(cells)
    }

    /// Validated grid.
    pub fn grid(&self) -> Result<GridSpec> {
        let master_seed = self.master_seed()?;
        if self.horizon < 2 {
            return Err(Error::config("T", "horizon must be at least 2"));
        }
        if self.runs == 0 {
            return Err(Error::config("runs", "must be positive"));
        }
        if self.trace_stride == Some(0) {
            return Err(Error::config("trace_stride", "must be positive"));
        }
        let trace_stride = self
            .traces
            .then(|| self.trace_stride.unwrap_or_else(|| default_trace_stride(self.horizon)));
        Ok(GridSpec {
            cells: self.cells()?,
            policies: self.policies()?,
            runs: self.runs,
            master_seed,
            trace_stride,
        })
    }
}

pub fn preset_names() -> String {
    PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
}
