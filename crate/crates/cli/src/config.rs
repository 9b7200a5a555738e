//! `key = value` run configuration, merged from a file and command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

pub const KNOWN_KEYS: &[&str] = &[
    "seed", "out", "workers", "paths", "steps", "schemes", "scheme", "a", "b", "sigma", "y0",
    "horizon", "max_k", "grid", "degree",
];

/// Values read from a config file.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key `{key}`", i + 1);
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }
}

/// Effective settings of one run, in resolution order, for the manifest.
#[derive(Debug, Default)]
pub struct Resolver {
    file: FileConfig,
    effective: Vec<(&'static str, String)>,
}

impl Resolver {
    pub fn new(file: FileConfig) -> Self {
        Self { file, effective: Vec::new() }
    }

    /// Flag value if given, else the file value, else `default`.
    pub fn pick<T>(&mut self, key: &'static str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match (flag, self.file.values.get(key)) {
            (Some(v), _) => v,
            (None, Some(s)) => s
                .parse()
                .map_err(|e| anyhow!("config key `{key}`: cannot parse `{s}`: {e}"))?,
            (None, None) => default,
        };
        self.effective.push((key, value.to_string()));
        Ok(value)
    }

    /// Like [`pick`](Self::pick) for comma-separated lists.
    pub fn pick_list<T>(&mut self, key: &'static str, flag: Option<String>, default: &str) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let text = flag
            .or_else(|| self.file.values.get(key).cloned())
            .unwrap_or_else(|| default.to_string());
        let items = parse_list(&text).with_context(|| format!("`{key}`"))?;
        self.effective.push((key, text));
        Ok(items)
    }

    /// The effective configuration as a loadable config file.
    pub fn manifest(&self, command: &str) -> String {
        let mut out = format!(
            "# polybm {} {command}\n",
            env!("CARGO_PKG_VERSION")
        );
        for (k, v) in &self.effective {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

pub fn parse_list<T>(text: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: Display,
{
    let items: Vec<T> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| anyhow!("cannot parse `{s}`: {e}")))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        bail!("empty list");
    }
    Ok(items)
}
