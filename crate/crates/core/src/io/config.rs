//! Flat `key = value` configuration text with `#` comments. Keys may repeat
//! (used for scene primitives); the last occurrence wins for scalar lookups.

use std::fmt::Write as _;
use std::path::Path;

use super::IoError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pairs: Vec<(String, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(IoError::BadLine {
                    line: lineno + 1,
                    reason: "expected key = value".to_string(),
                });
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            if key.is_empty() {
                return Err(IoError::BadLine {
                    line: lineno + 1,
                    reason: "empty key".to_string(),
                });
            }
            pairs.push((key.to_string(), value.to_string()));
        }
        Ok(Self { pairs })
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.pairs.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.pairs
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn require(&self, key: &str) -> Result<&str, IoError> {
        self.get(key)
            .ok_or_else(|| IoError::MissingKey(key.to_string()))
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64, IoError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| IoError::BadValue {
                key: key.to_string(),
                reason: format!("{v:?} is not a real"),
            }),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize, IoError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| IoError::BadValue {
                key: key.to_string(),
                reason: format!("{v:?} is not an unsigned integer"),
            }),
        }
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64, IoError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| IoError::BadValue {
                key: key.to_string(),
                reason: format!("{v:?} is not an unsigned integer"),
            }),
        }
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool, IoError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(IoError::BadValue {
                key: key.to_string(),
                reason: format!("{v:?} is not a boolean"),
            }),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.pairs {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
