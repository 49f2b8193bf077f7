use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Locking key; bit `i` drives key-select `i`. Written MSB-first, i.e. bit 0
/// is the leftmost character.
#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize)]
#[serde(into = "String")]
pub struct Key(pub Vec<bool>);

impl Key {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Copy with bit `i` inverted.
    pub fn flipped(&self, i: usize) -> Key {
        let mut k = self.clone();
        k.0[i] = !k.0[i];
        k
    }

    /// Key file contents: a `k=<len>` header line, then the bitstring.
    pub fn to_file(&self) -> String {
        format!("k={}\n{}\n", self.len(), self)
    }

    pub fn from_file(text: &str) -> Result<Key> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or(Error::Parse { line: 1, msg: "empty key file".into() })?;
        let len: usize = header
            .strip_prefix("k=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or(Error::Parse { line: 1, msg: format!("expected `k=<int>`, found `{header}`") })?;
        let key: Key = lines.next().unwrap_or("").parse()?;
        if key.len() != len {
            return Err(Error::KeyLength { expected: len, got: key.len() });
        }
        Ok(key)
    }
}

impl From<Key> for String {
    fn from(k: Key) -> String {
        k.to_string()
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Key {
    type Err = Error;

    fn from_str(s: &str) -> Result<Key> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse { line: 2, msg: format!("bad key character `{c}`") }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Key)
    }
}
