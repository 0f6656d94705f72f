//! Flat `key = value` configuration with `[section]` headers.
//!
//! ```text
//! # comment
//! [corner]
//! beta = 1.5
//! sigma_plus = 1.0
//! [coeffs]
//! a = 1.0, 0.1
//! ```
//!
//! Keys are stored as `section.key`; keys before any header have no prefix.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError {
                    line: n + 1,
                    message: format!("unterminated section header `{line}`"),
                })?;
                section = name.trim().to_owned();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError {
                line: n + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError {
                    line: n + 1,
                    message: "empty key".into(),
                });
            }
            let key = if section.is_empty() {
                k.to_owned()
            } else {
                format!("{section}.{k}")
            };
            if values.insert(key.clone(), v.trim().to_owned()).is_some() {
                return Err(ConfigError {
                    line: n + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_owned(), value.into());
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse().map_err(|_| ConfigError {
                    line: 0,
                    message: format!("`{key}` = `{v}` is not a number"),
                })
            })
            .transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse().map_err(|_| ConfigError {
                    line: 0,
                    message: format!("`{key}` = `{v}` is not a non-negative integer"),
                })
            })
            .transpose()
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse().map_err(|_| ConfigError {
                            line: 0,
                            message: format!("`{key}`: `{s}` is not a number"),
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let c = ConfigFile::parse("top = 1\n[corner]\n beta = 1.5 # reentrant\n\n[coeffs]\na = 1, 0.5,\n").unwrap();
        assert_eq!(c.get("top"), Some("1"));
        assert_eq!(c.f64("corner.beta").unwrap(), Some(1.5));
        assert_eq!(c.f64_list("coeffs.a").unwrap(), Some(vec![1.0, 0.5]));
        assert_eq!(c.f64("corner.sigma_plus").unwrap(), None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(ConfigFile::parse("[a]\nnovalue\n").unwrap_err().line, 2);
        assert_eq!(ConfigFile::parse("[a\n").unwrap_err().line, 1);
        assert_eq!(ConfigFile::parse("x=1\nx=2\n").unwrap_err().line, 2);
        assert!(ConfigFile::parse("x = abc").unwrap().f64("x").is_err());
    }
}
