//! Flat dotted-key configuration files: one `section.key=value` per line,
//! `#` comments, no nesting. Command-line flags take precedence over file
//! values, which take precedence over built-in defaults.

use anyhow::{bail, Context, Result};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        FileConfig::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<FileConfig> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key=value, got '{raw}'", lineno + 1);
            };
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_') {
                bail!("line {}: bad key '{key}'", lineno + 1);
            }
            if values.insert(key.to_string(), value.trim().to_string()).is_some() {
                bail!("line {}: duplicate key '{key}'", lineno + 1);
            }
        }
        Ok(FileConfig { values })
    }

    /// Typed lookup; a missing key is None, an unparsable value is an error.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key '{key}': {e} (value '{raw}')"),
            },
        }
    }

    /// Flag value if given, else file value, else default.
    pub fn resolve<T: FromStr + Clone>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        Ok(self.get(key)?.unwrap_or(default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_blanks() {
        let cfg = FileConfig::parse(
            "# a comment\npso.swarm_size = 50\n\ntrain.lr=0.01\ncertify.epsilon=0.05\n",
        )
        .unwrap();
        assert_eq!(cfg.get::<usize>("pso.swarm_size").unwrap(), Some(50));
        assert_eq!(cfg.get::<f64>("train.lr").unwrap(), Some(0.01));
        assert_eq!(cfg.get::<f64>("missing.key").unwrap(), None);
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let cfg = FileConfig::parse("pso.swarm_size=50\n").unwrap();
        assert_eq!(cfg.resolve(Some(9usize), "pso.swarm_size", 100).unwrap(), 9);
        assert_eq!(cfg.resolve(None::<usize>, "pso.swarm_size", 100).unwrap(), 50);
        assert_eq!(cfg.resolve(None::<usize>, "pso.iterations", 100).unwrap(), 100);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(FileConfig::parse("just words\n").is_err());
        assert!(FileConfig::parse("a b=1\n").is_err());
        assert!(FileConfig::parse("k=1\nk=2\n").is_err());
        let cfg = FileConfig::parse("train.lr=fast\n").unwrap();
        assert!(cfg.get::<f64>("train.lr").is_err());
    }
}
