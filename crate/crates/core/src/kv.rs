//! Flat `key = value` text documents.
//!
//! One entry per line, `#` starts a comment, blank lines are ignored. Matrices are written as
//! `name = [RxC] v00 v01 ... ` in row-major order; numbers use the shortest representation
//! that parses back to the same `f64`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDocument {
    entries: Vec<(String, String)>,
}

impl KvDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse { line: idx + 1, message: format!("expected `key = value`, got {line:?}") });
            };
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Parse { line: idx + 1, message: format!("invalid key {key:?}") });
            }
            doc.set(key, value.trim());
        }
        Ok(doc)
    }

    /// Inserts or replaces, keeping the first position of the key.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_owned(), value)),
        }
    }

    pub fn set_f64(&mut self, key: &str, v: f64) {
        self.set(key, format!("{v:?}"));
    }

    pub fn set_matrix(&mut self, key: &str, m: &Matrix) {
        let mut s = format!("[{}x{}]", m.rows(), m.cols());
        for v in m.as_slice() {
            let _ = write!(s, " {v:?}");
        }
        self.set(key, s);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse { line: 0, message: format!("missing key `{key}`") })
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| Error::Parse {
                    line: self.line_of(key),
                    message: format!("`{key}` is not a number: {v:?}"),
                })
            })
            .transpose()
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.require(key)?;
        Ok(self.get_f64(key)?.expect("present"))
    }

    pub fn require_matrix(&self, key: &str) -> Result<Matrix> {
        let raw = self.require(key)?;
        let err = |message: String| Error::Parse { line: self.line_of(key), message };
        let rest = raw
            .strip_prefix('[')
            .ok_or_else(|| err(format!("`{key}` must start with a [RxC] shape")))?;
        let (shape, values) =
            rest.split_once(']').ok_or_else(|| err(format!("unterminated shape in `{key}`")))?;
        let (r, c) = shape
            .split_once('x')
            .and_then(|(r, c)| Some((r.trim().parse::<usize>().ok()?, c.trim().parse::<usize>().ok()?)))
            .ok_or_else(|| err(format!("bad shape {shape:?} in `{key}`")))?;
        let data = values
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| err(format!("bad number {v:?} in `{key}`"))))
            .collect::<Result<Vec<_>>>()?;
        Matrix::new(r, c, data)
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.iter().position(|(k, _)| k == key).map_or(0, |i| i + 1)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
