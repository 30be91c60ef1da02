use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;

use super::{usage, CliError, Format};

const KEYS: &[&str] = &[
    "seed", "threads", "cap", "replicas", "out-dir", "format", "file", "protocol", "horizon", "target", "scout", "product", "width",
    "kmin", "kmax", "name", "law", "law2", "s0", "x", "rho", "mu", "n", "y", "s1", "s2", "interval", "grid", "scan", "event",
];

/// Flat `key=value` settings; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

pub trait ConfigValue: Sized {
    fn parse_value(s: &str) -> Result<Self, String>;
}

macro_rules! from_str_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(s: &str) -> Result<Self, String> {
                <$t as FromStr>::from_str(s).map_err(|e| e.to_string())
            }
        }
    )*};
}
from_str_value!(u64, usize, f64, String, std::path::PathBuf);

impl ConfigValue for bool {
    fn parse_value(s: &str) -> Result<Self, String> {
        match s {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(format!("expected a boolean, got `{s}`")),
        }
    }
}

impl ConfigValue for Format {
    fn parse_value(s: &str) -> Result<Self, String> {
        Format::from_str(s, true)
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| usage(format!("config line {}: expected key=value", i + 1)))?;
            let k = k.trim().replace('_', "-");
            if !KEYS.contains(&k.as_str()) {
                return Err(usage(format!("config line {}: unknown key `{k}`", i + 1)));
            }
            values.insert(k, v.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The command-line value if given, else the config value.
    pub fn pick<T: ConfigValue>(&self, cli: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.get(key) {
            Some(v) => T::parse_value(v).map(Some).map_err(|e| usage(format!("config `{key}`: {e}"))),
            None => Ok(None),
        }
    }

    /// Repeatable values; a config value holds several separated by `;`.
    pub fn pick_list(&self, cli: &[String], key: &str) -> Vec<String> {
        if !cli.is_empty() {
            return cli.to_vec();
        }
        self.get(key).map(|v| v.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prefers_cli() {
        let c = Config::parse("# run\nseed = 7\nout_dir=/tmp/x\ntarget=1;-2\n").unwrap();
        assert_eq!(c.pick::<u64>(None, "seed").unwrap(), Some(7));
        assert_eq!(c.pick(Some(3u64), "seed").unwrap(), Some(3));
        assert_eq!(c.get("out-dir"), Some("/tmp/x"));
        assert_eq!(c.pick_list(&[], "target"), vec!["1", "-2"]);
        assert!(Config::parse("bogus=1").is_err());
        assert!(Config::parse("seed").is_err());
        assert!(c.pick::<f64>(None, "out-dir").is_err());
    }
}
