//! Plain-text `key=value` configuration. Tokens are separated by
//! whitespace or newlines; `#` starts a comment that runs to end of line.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for token in line.split_whitespace() {
                let (key, value) = token
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected key=value, found `{token}`")))?;
                if key.is_empty() {
                    return Err(Error::Parse(format!("empty key in `{token}`")));
                }
                if entries.insert(key.to_string(), value.to_string()).is_some() {
                    return Err(Error::Parse(format!("duplicate key `{key}`")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require_str(&self, key: &str) -> Result<&str> {
        self.get_str(key)
            .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get_str(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("cannot parse `{key}={raw}`"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }
}

impl std::fmt::Display for KeyValues {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, v) in &self.entries {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tokens_and_comments() {
        let kv = KeyValues::parse("family=gaussian mu=0.5 # note\nn=10\n").unwrap();
        assert_eq!(kv.get_str("family"), Some("gaussian"));
        assert_eq!(kv.require::<f64>("mu").unwrap(), 0.5);
        assert_eq!(kv.require::<usize>("n").unwrap(), 10);
        assert!(kv.get::<f64>("absent").unwrap().is_none());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(KeyValues::parse("oops").is_err());
        assert!(KeyValues::parse("a=1 a=2").is_err());
        assert!(KeyValues::parse("=3").is_err());
        let kv = KeyValues::parse("mu=abc").unwrap();
        assert!(kv.require::<f64>("mu").is_err());
    }

    #[test]
    fn display_round_trips() {
        let kv = KeyValues::parse("b=2 a=1").unwrap();
        assert_eq!(KeyValues::parse(&kv.to_string()).unwrap(), kv);
    }
}
