//! Flat `key = value` config files and flag/file/default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

pub const CACHE_DIR_ENV: &str = "TFJOINT_CACHE_DIR";

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl ConfigFile {
    /// Blank lines and `#` comments are ignored; keys use the long flag
    /// names, with `_` and `-` interchangeable.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", lineno + 1))
            })?;
            entries.insert(normalize(key), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }
}

/// Picks each parameter from the flag, then the config file, then the
/// default, and records the string form of whatever was chosen.
pub struct Resolver<'a> {
    file: &'a ConfigFile,
    resolved: BTreeMap<String, String>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: &'a ConfigFile) -> Self {
        Self {
            file,
            resolved: BTreeMap::new(),
        }
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match (flag, self.file.get(key)) {
            (Some(v), _) => v,
            (None, Some(text)) => text
                .parse()
                .map_err(|e| CliError::Usage(format!("config key {key} = {text:?}: {e}")))?,
            (None, None) => default,
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match (flag, self.file.get(key)) {
            (Some(v), _) => Some(v),
            (None, Some(text)) => Some(
                text.parse()
                    .map_err(|e| CliError::Usage(format!("config key {key} = {text:?}: {e}")))?,
            ),
            (None, None) => None,
        };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    pub fn into_map(self) -> BTreeMap<String, String> {
        self.resolved
    }
}

/// Shared run settings after resolution.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub threads: usize,
    pub solver: String,
    pub output_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
}

pub struct GlobalFlags {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub solver: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub no_cache: bool,
}

pub fn resolve_settings(flags: GlobalFlags, resolver: &mut Resolver<'_>) -> CliResult<Settings> {
    let seed = resolver.value("seed", flags.seed, 0)?;
    let threads = resolver.value("threads", flags.threads, 0)?;
    let solver = resolver.value("solver", flags.solver, "auto".to_string())?;
    let output_dir: String = resolver.value(
        "output-dir",
        flags.output_dir.map(|p| p.display().to_string()),
        "tfjoint-out".to_string(),
    )?;
    let output_dir = PathBuf::from(output_dir);
    let no_cache = flags.no_cache || resolver.file.get("no-cache") == Some("true");
    let cache_dir = if no_cache {
        resolver.record("cache-dir", "disabled");
        None
    } else {
        let chosen = flags
            .cache_dir
            .or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
            .or_else(|| resolver.file.get("cache-dir").map(PathBuf::from))
            .unwrap_or_else(|| output_dir.join("cache"));
        resolver.record("cache-dir", chosen.display());
        Some(chosen)
    };
    Ok(Settings {
        seed,
        threads,
        solver,
        output_dir,
        cache_dir,
    })
}

/// `"2-5"`, `"2..5"`, `"2..=5"` or a single value.
pub fn parse_range(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("bad range {text:?}; expected e.g. 2-5"));
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = if let Some((a, b)) = text.split_once("..=") {
        (parse(a)?, parse(b)?)
    } else if let Some((a, b)) = text.split_once("..") {
        (parse(a)?, parse(b)?)
    } else if let Some((a, b)) = text.split_once('-') {
        (parse(a)?, parse(b)?)
    } else {
        let v = parse(text)?;
        (v, v)
    };
    if hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

pub fn parse_list<T: FromStr>(text: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad list entry {s:?} in {text:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flag_precedence() {
        let file = ConfigFile::parse("# comment\nphotons = 3\ntime_scale=2\n\n").unwrap();
        let mut r = Resolver::new(&file);
        assert_eq!(r.value("photons", None, 2usize).unwrap(), 3);
        assert_eq!(r.value("photons", Some(4usize), 2).unwrap(), 4);
        assert_eq!(r.value("time-scale", None, 1.0f64).unwrap(), 2.0);
        assert_eq!(r.value("modes", None, 6usize).unwrap(), 6);
        let map = r.into_map();
        assert_eq!(map["photons"], "4");
        assert!(ConfigFile::parse("novalue").is_err());
    }

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_range("2-5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_range("3..=4").unwrap(), vec![3, 4]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert!(parse_range("5-2").is_err());
        assert_eq!(parse_list::<f64>("0.1, 2").unwrap(), vec![0.1, 2.0]);
        assert!(parse_list::<f64>("x").is_err());
    }
}
