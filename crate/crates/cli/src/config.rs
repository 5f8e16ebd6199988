//! Run configuration file support. A config file can supply a value for any
//! long option of the current subcommand; explicit flags always win. Two
//! syntaxes are accepted: a JSON object, or `key = value` lines with `#`
//! comments. Keys match the flag names with either dashes or underscores.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

/// Parsed config file contents.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, serde_json::Value>,
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl FileConfig {
    pub fn empty() -> Self {
        FileConfig::default()
    }

    pub fn load(path: &Path) -> Result<FileConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("config file {}: {e}", path.display()))
    }

    fn parse(text: &str) -> Result<FileConfig, String> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            let map: serde_json::Map<String, serde_json::Value> =
                serde_json::from_str(text).map_err(|e| format!("invalid json: {e}"))?;
            return Ok(FileConfig {
                values: map.into_iter().map(|(k, v)| (normalize_key(&k), v)).collect(),
            });
        }
        let mut values = BTreeMap::new();
        for (number, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", number + 1))?;
            values.insert(
                normalize_key(key),
                serde_json::Value::String(value.trim().to_string()),
            );
        }
        Ok(FileConfig { values })
    }

    /// Raw string form of a value, if present.
    pub fn get_string(&self, key: &str) -> Option<String> {
        self.values.get(&normalize_key(key)).map(|v| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    }

    /// Parse a value through `FromStr`, reporting the key on failure.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.get_string(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("config key \"{key}\": cannot parse \"{raw}\"")),
        }
    }
}

/// `flag.or(config).unwrap_or(default)` for one option.
pub fn resolve<T: FromStr + Clone>(
    flag: Option<T>,
    config: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, String> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(config.get::<T>(key)?.unwrap_or(default)),
    }
}

/// Same, but with no default: stays `None` when neither source has it.
pub fn resolve_opt<T: FromStr>(
    flag: Option<T>,
    config: &FileConfig,
    key: &str,
) -> Result<Option<T>, String> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.get::<T>(key),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_lines() {
        let cfg = FileConfig::parse("# comment\nanchor = 2008\nmax-length = 6\n").unwrap();
        assert_eq!(cfg.get::<i32>("anchor").unwrap(), Some(2008));
        assert_eq!(cfg.get::<usize>("max_length").unwrap(), Some(6));
    }

    #[test]
    fn parses_json_object() {
        let cfg = FileConfig::parse("{\"anchor\": 2008, \"min-active-share\": 0.4}").unwrap();
        assert_eq!(cfg.get::<i32>("anchor").unwrap(), Some(2008));
        assert_eq!(cfg.get::<f64>("min_active_share").unwrap(), Some(0.4));
    }

    #[test]
    fn flags_override_config() {
        let cfg = FileConfig::parse("anchor = 2008\n").unwrap();
        assert_eq!(resolve(Some(2010), &cfg, "anchor", 1999).unwrap(), 2010);
        assert_eq!(resolve(None, &cfg, "anchor", 1999).unwrap(), 2008);
        assert_eq!(resolve::<i32>(None, &cfg, "other", 1999).unwrap(), 1999);
    }

    #[test]
    fn bad_values_name_the_key() {
        let cfg = FileConfig::parse("anchor = notayear\n").unwrap();
        let err = cfg.get::<i32>("anchor").unwrap_err();
        assert!(err.contains("anchor"));
    }
}
