//! Config-file defaults. The file is flat TOML whose keys are the
//! long flag names (`backend = "hyb"`, `max-iterations = 50`); a value
//! is used only when the matching flag was not given. Unknown keys are
//! ignored so one file can serve every subcommand.

use std::path::{Path, PathBuf};

use crate::common::CliError;

#[derive(Debug, Default)]
pub struct Config {
    table: toml::Table,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Lib(tilemv::Error::Io(e)))?;
        let table: toml::Table = text.parse().map_err(|e| {
            CliError::Usage(format!("config file {}: {e}", path.display()))
        })?;
        Ok(Config { table })
    }

    fn wrong_type(&self, key: &str, want: &str) -> CliError {
        CliError::Usage(format!(
            "config key `{key}` must be a {want}, got {}",
            self.table[key]
        ))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(v)) => Ok(Some(*v)),
            Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(_) => Err(self.wrong_type(key, "number")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(Some(*v as usize)),
            Some(_) => Err(self.wrong_type(key, "non-negative integer")),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        Ok(self.usize(key)?.map(|v| v as u64))
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::String(v)) => Ok(Some(v.clone())),
            Some(_) => Err(self.wrong_type(key, "string")),
        }
    }

    pub fn path(&self, key: &str) -> Result<Option<PathBuf>, CliError> {
        Ok(self.string(key)?.map(PathBuf::from))
    }
}
