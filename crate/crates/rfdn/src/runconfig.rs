//! `key = value` run files mirroring command-line flags.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are flag names
//! without the leading dashes; flags given on the command line win.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parses `text`, rejecting any key outside `allowed`.
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value, got `{line}`", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !allowed.contains(&key) {
                return Err(CliError::Usage(format!("unknown config key `{key}` on line {}", i + 1)));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Usage(format!("config key `{key}` given twice")));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path, allowed: &[&str]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text, allowed)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| v.parse().map_err(|_| CliError::Usage(format!("config key `{key}`: invalid value `{v}`"))))
            .transpose()
    }

    /// `flag` if given, else the file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }
}
