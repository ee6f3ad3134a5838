//! Merging of command-line flags with a TOML config file.
//!
//! Config keys are the long flag names with `-` replaced by `_` (`n_min`,
//! `trials`, `L`, ...). A flag always wins over the same key in the file.
//! The optional key `experiment` names the subcommand the file is meant for.
//! Any other key the subcommand does not read is an error naming that key.

use std::collections::BTreeSet;
use std::path::Path;

use serde_json::{Map, Value};
use toml::Table;

use super::CliError;
use crate::prob::Probability;

pub struct Resolver {
    table: Table,
    used: BTreeSet<String>,
    /// Every resolved input, for the config hash.
    pub inputs: Map<String, Value>,
}

impl Resolver {
    pub fn new(config: Option<&Path>, subcommand: &str) -> Result<Self, CliError> {
        let table = match config {
            None => Table::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
                text.parse::<Table>()
                    .map_err(|e| CliError::Config(format!("malformed config {}: {e}", path.display())))?
            }
        };
        Self::from_table(table, subcommand)
    }

    pub fn from_table(table: Table, subcommand: &str) -> Result<Self, CliError> {
        if let Some(exp) = table.get("experiment") {
            match exp.as_str() {
                Some(name) if name == subcommand => {}
                _ => {
                    return Err(CliError::Config(format!(
                        "key `experiment` = {exp} does not match subcommand `{subcommand}`"
                    )))
                }
            }
        }
        let mut used = BTreeSet::new();
        used.insert("experiment".to_string());
        Ok(Resolver {
            table,
            used,
            inputs: Map::new(),
        })
    }

    /// Raw value, marking the key as read.
    pub fn raw(&mut self, key: &str) -> Option<toml::Value> {
        self.used.insert(key.to_string());
        self.table.get(key).cloned()
    }

    fn bad(key: &str, want: &str, got: &toml::Value) -> CliError {
        CliError::Config(format!("key `{key}`: expected {want}, found {got}"))
    }

    fn record(&mut self, key: &str, value: Value) {
        self.inputs.insert(key.to_string(), value);
    }

    pub fn u64(&mut self, key: &str, flag: Option<u64>) -> Result<Option<u64>, CliError> {
        let v = match (flag, self.raw(key)) {
            (Some(v), _) => Some(v),
            (None, None) => None,
            (None, Some(toml::Value::Integer(i))) if i >= 0 => Some(i as u64),
            (None, Some(other)) => return Err(Self::bad(key, "a nonnegative integer", &other)),
        };
        if let Some(v) = v {
            self.record(key, Value::from(v));
        }
        Ok(v)
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>) -> Result<Option<usize>, CliError> {
        Ok(self.u64(key, flag.map(|v| v as u64))?.map(|v| v as usize))
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>) -> Result<Option<f64>, CliError> {
        let v = match (flag, self.raw(key)) {
            (Some(v), _) => Some(v),
            (None, None) => None,
            (None, Some(toml::Value::Float(f))) => Some(f),
            (None, Some(toml::Value::Integer(i))) => Some(i as f64),
            (None, Some(other)) => return Err(Self::bad(key, "a number", &other)),
        };
        if let Some(v) = v {
            self.record(key, Value::from(v));
        }
        Ok(v)
    }

    pub fn bool(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        let v = match (flag, self.raw(key)) {
            (true, _) => true,
            (false, None) => false,
            (false, Some(toml::Value::Boolean(b))) => b,
            (false, Some(other)) => return Err(Self::bad(key, "a boolean", &other)),
        };
        self.record(key, Value::from(v));
        Ok(v)
    }

    pub fn string(&mut self, key: &str, flag: Option<String>) -> Result<Option<String>, CliError> {
        let v = match (flag, self.raw(key)) {
            (Some(v), _) => Some(v),
            (None, None) => None,
            (None, Some(toml::Value::String(s))) => Some(s),
            (None, Some(other)) => return Err(Self::bad(key, "a string", &other)),
        };
        Ok(v)
    }

    /// A string that affects numerical output and therefore the hash.
    pub fn input_string(&mut self, key: &str, flag: Option<String>) -> Result<Option<String>, CliError> {
        let v = self.string(key, flag)?;
        if let Some(s) = &v {
            self.record(key, Value::from(s.clone()));
        }
        Ok(v)
    }

    /// Accepts `"1/2"`, `"0.25"` or a bare TOML float.
    pub fn prob(&mut self, key: &str, flag: Option<String>) -> Result<Option<Probability>, CliError> {
        let text = match (flag, self.raw(key)) {
            (Some(v), _) => Some(v),
            (None, None) => None,
            (None, Some(toml::Value::String(s))) => Some(s),
            (None, Some(toml::Value::Float(f))) => Some(f.to_string()),
            (None, Some(other)) => return Err(Self::bad(key, "a probability such as \"1/2\"", &other)),
        };
        let Some(text) = text else { return Ok(None) };
        let p: Probability = text
            .parse()
            .map_err(|e| CliError::Config(format!("key `{key}`: {e}")))?;
        self.record(key, Value::from(p.to_string()));
        Ok(Some(p))
    }

    /// Raw TOML array of strings (bit rows) or of numbers.
    pub fn array(&mut self, key: &str) -> Result<Option<toml::value::Array>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => Ok(Some(a)),
            Some(other) => Err(Self::bad(key, "an array", &other)),
        }
    }

    pub fn finish(&self) -> Result<(), CliError> {
        if let Some(key) = self.table.keys().find(|k| !self.used.contains(*k)) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        Ok(())
    }
}

pub fn required<T>(key: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
}
