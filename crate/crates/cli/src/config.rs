use std::path::Path;
use std::str::FromStr;

use vissm::kv::KvDocument;

use crate::error::{CliError, CliResult};

const KNOWN_KEYS: [&str; 17] = [
    "seed", "out", "vars", "seq", "trials", "agg", "delta_long", "delta_short", "delta_freq", "suites",
    "break_coupling", "cases", "study", "input", "repeats", "window", "lambda",
];

/// Values from an optional config file, consulted when a flag is absent.
#[derive(Debug, Default)]
pub struct FileConfig {
    doc: KvDocument,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let doc = KvDocument::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if let Some(bad) = doc.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(CliError::Usage(format!("{}: unknown key `{bad}`", path.display())));
        }
        Ok(Self { doc })
    }

    /// Flag value, else file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> CliResult<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.doc.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Usage(format!("config value for `{key}` is invalid: {raw:?}"))),
            None => Ok(default),
        }
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.doc
            .get(key)
            .map(|raw| raw.parse().map_err(|_| CliError::Usage(format!("config value for `{key}` is invalid: {raw:?}"))))
            .transpose()
    }
}

pub fn parse_list(raw: &str, what: &str) -> CliResult<Vec<usize>> {
    let values = raw
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| CliError::Usage(format!("{what}: {s:?} is not a count"))))
        .collect::<CliResult<Vec<_>>>()?;
    if values.is_empty() {
        return Err(CliError::Usage(format!("{what}: empty list")));
    }
    Ok(values)
}

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file() {
        let cfg = FileConfig { doc: KvDocument::parse("seed = 5\ntrials = x\n").unwrap() };
        assert_eq!(cfg.pick(Some(9u64), "seed", 0).unwrap(), 9);
        assert_eq!(cfg.pick(None::<u64>, "seed", 0).unwrap(), 5);
        assert_eq!(cfg.pick(None::<u64>, "repeats", 3).unwrap(), 3);
        assert!(cfg.pick(None::<usize>, "trials", 1).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("16, 64,256", "vars").unwrap(), vec![16, 64, 256]);
        assert!(parse_list("16,x", "vars").is_err());
        assert!(parse_list("", "vars").is_err());
    }
}
