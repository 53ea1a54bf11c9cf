//! Flat `key = value` scenario files.
//!
//! Lines are `key = value`; `#` starts a comment. Keys ending in `_us` or
//! `_khz` are rewritten to `_s` and `_hz` with the value scaled on parse.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("key `{key}`: {reason} (got `{value}`)")]
    Invalid {
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("key `{0}` given more than once")]
    Duplicate(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
}

pub type ConfigResult<T> = Result<T, ConfigError>;

/// Parsed key/value pairs with unit suffixes already resolved.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

/// `(suffix, replacement, factor)`; negative factors divide, which keeps
/// values such as `120 µs` exact.
const SUFFIXES: [(&str, &str, f64); 2] = [("_us", "_s", -1e6), ("_khz", "_hz", 1e3)];

impl RawConfig {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut cfg = RawConfig::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                reason: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    reason: format!("bad key `{key}`"),
                });
            }
            let (key, value) = convert_suffix(key, value)?;
            cfg.insert(key, value)?;
        }
        Ok(cfg)
    }

    /// Recovers the config echoed in a file header written by [`Resolved::header`].
    pub fn from_header(text: &str) -> ConfigResult<Self> {
        let body: String = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l.strip_prefix("# "))
            .filter(|l| !l.starts_with("derived:"))
            .map(|l| format!("{l}\n"))
            .collect();
        Self::parse(&body)
    }

    pub fn insert(&mut self, key: String, value: String) -> ConfigResult<()> {
        if self.entries.contains_key(&key) {
            return Err(ConfigError::Duplicate(key));
        }
        self.entries.insert(key, value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

fn convert_suffix(key: &str, value: &str) -> ConfigResult<(String, String)> {
    for (suffix, replacement, scale) in SUFFIXES {
        if let Some(stem) = key.strip_suffix(suffix) {
            let scaled = value
                .split(',')
                .map(|v| parse_f64(key, v.trim()).map(|x| format_exact(rescale(x, scale))))
                .collect::<ConfigResult<Vec<_>>>()?
                .join(",");
            return Ok((format!("{stem}{replacement}"), scaled));
        }
    }
    Ok((key.to_string(), value.to_string()))
}

fn rescale(x: f64, factor: f64) -> f64 {
    if factor < 0.0 {
        x / -factor
    } else {
        x * factor
    }
}

fn parse_f64(key: &str, value: &str) -> ConfigResult<f64> {
    let x: f64 = value.parse().map_err(|_| ConfigError::Invalid {
        key: key.into(),
        value: value.into(),
        reason: "not a number".into(),
    })?;
    if !x.is_finite() {
        return Err(ConfigError::Invalid {
            key: key.into(),
            value: value.into(),
            reason: "must be finite".into(),
        });
    }
    Ok(x)
}

/// Shortest decimal that parses back to exactly `x`.
pub fn format_exact(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e9).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Reads typed values and records the fully resolved configuration,
/// defaults included, in the order the keys were read.
#[derive(Debug)]
pub struct Reader<'a> {
    raw: &'a RawConfig,
    resolved: Vec<(String, String)>,
}

impl<'a> Reader<'a> {
    pub fn new(raw: &'a RawConfig) -> Self {
        Self {
            raw,
            resolved: Vec::new(),
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.raw.get(key).is_some()
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.push((key.to_string(), value));
    }

    pub fn string(&mut self, key: &str) -> ConfigResult<String> {
        let v = self
            .raw
            .get(key)
            .ok_or_else(|| ConfigError::Missing(key.into()))?
            .to_string();
        self.record(key, v.clone());
        Ok(v)
    }

    pub fn string_or(&mut self, key: &str, default: &str) -> String {
        let v = self.raw.get(key).unwrap_or(default).to_string();
        self.record(key, v.clone());
        v
    }

    pub fn f64(&mut self, key: &str) -> ConfigResult<f64> {
        let raw = self
            .raw
            .get(key)
            .ok_or_else(|| ConfigError::Missing(key.into()))?;
        let x = parse_f64(key, raw)?;
        self.record(key, format_exact(x));
        Ok(x)
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> ConfigResult<f64> {
        if self.raw.get(key).is_some() {
            self.f64(key)
        } else {
            self.record(key, format_exact(default));
            Ok(default)
        }
    }

    /// Optional value; absent keys are not echoed.
    pub fn f64_opt(&mut self, key: &str) -> ConfigResult<Option<f64>> {
        if self.raw.get(key).is_some() {
            self.f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn string_opt(&mut self, key: &str) -> Option<String> {
        let v = self.raw.get(key)?.to_string();
        self.record(key, v.clone());
        Some(v)
    }

    pub fn f64_list(&mut self, key: &str) -> ConfigResult<Vec<f64>> {
        let raw = self
            .raw
            .get(key)
            .ok_or_else(|| ConfigError::Missing(key.into()))?;
        let xs = raw
            .split(',')
            .map(|v| parse_f64(key, v.trim()))
            .collect::<ConfigResult<Vec<_>>>()?;
        let echo = xs.iter().map(|&x| format_exact(x)).collect::<Vec<_>>().join(",");
        self.record(key, echo);
        Ok(xs)
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> ConfigResult<usize> {
        let v = match self.raw.get(key) {
            None => default,
            Some(raw) => raw.parse().map_err(|_| ConfigError::Invalid {
                key: key.into(),
                value: raw.into(),
                reason: "not a nonnegative integer".into(),
            })?,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    /// Fails on any key that was never read.
    pub fn finish(self) -> ConfigResult<Resolved> {
        for key in self.raw.keys() {
            if !self.resolved.iter().any(|(k, _)| k == key) {
                return Err(ConfigError::Unknown(key.into()));
            }
        }
        Ok(Resolved {
            entries: self.resolved,
            derived: Vec::new(),
        })
    }
}

/// Fully resolved configuration plus derived quantities, echoed into every
/// output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub entries: Vec<(String, String)>,
    pub derived: Vec<(String, String)>,
}

impl Resolved {
    pub fn add_derived(&mut self, key: &str, value: f64) {
        self.derived.push((key.into(), format_exact(value)));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Config text that parses back to the same resolution.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Comment block placed at the top of output files.
    pub fn header(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "# {k} = {v}");
        }
        for (k, v) in &self.derived {
            let _ = writeln!(s, "# derived: {k} = {v}");
        }
        s
    }
}
