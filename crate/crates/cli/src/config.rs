//! Flat key-value run configuration with `[section]` headers. Keys are
//! addressed as `section.key`; command-line flags always win over the file.
//!
//! Recognized schema:
//!   [run]  seed, threads
//!   [mc]   samples
//!   [grid] dr, n
//!   [py]   mixing, tol, max_iter

use clusterkit::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Default)]
pub struct Config {
    pub entries: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let full = if section.is_empty() {
                key.trim().to_string()
            } else {
                format!("{section}.{}", key.trim())
            };
            entries.insert(full, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    /// Typed lookup; a present but malformed value is a config error.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("config key '{key}': cannot parse '{raw}'"))
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let cfg = Config::parse(
            "# comment\n[run]\nseed = 7\n[grid]\ndr = 0.01 # inline\nn = 512\n",
        )
        .unwrap();
        assert_eq!(cfg.get::<u64>("run.seed").unwrap(), Some(7));
        assert_eq!(cfg.get::<f64>("grid.dr").unwrap(), Some(0.01));
        assert_eq!(cfg.get::<usize>("grid.n").unwrap(), Some(512));
        assert_eq!(cfg.get::<u64>("mc.samples").unwrap(), None);
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        assert!(Config::parse("just words\n").is_err());
        let cfg = Config::parse("[run]\nseed = notanumber\n").unwrap();
        assert!(cfg.get::<u64>("run.seed").is_err());
    }
}
