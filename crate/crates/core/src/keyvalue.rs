//! Line-oriented `key=value` files shared by the group, oracle and pipeline
//! configuration formats.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    /// Parses ASCII `key=value` lines. Blank lines and lines starting with
    /// `#` are skipped. Duplicate keys are rejected.
    pub fn parse(text: &str) -> Result<KeyValues> {
        if !text.is_ascii() {
            return Err(Error::parse("input must be ASCII"));
        }
        let mut entries: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("line {}: expected key=value", lineno + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(format!("line {}: empty key", lineno + 1)));
            }
            if entries.iter().any(|(e, _)| e == k) {
                return Err(Error::parse(format!("line {}: duplicate key {:?}", lineno + 1, k)));
            }
            entries.push((k.to_string(), v.trim().to_string()));
        }
        Ok(KeyValues { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::parse(format!("missing key {:?}", key)))
    }

    pub fn parse_num<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::parse(format!("key {:?}: bad number {:?}", key, v))),
        }
    }

    /// Fails on any key not in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::parse(format!("unknown key {:?}", k)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let kv = KeyValues::parse("# comment\nkind=free\n rank = 2 \n").unwrap();
        assert_eq!(kv.get("kind"), Some("free"));
        assert_eq!(kv.parse_num::<usize>("rank").unwrap(), Some(2));
        assert!(kv.check_keys(&["kind"]).is_err());
        assert!(KeyValues::parse("kind\n").is_err());
        assert!(KeyValues::parse("a=1\na=2\n").is_err());
        assert!(KeyValues::parse("kind=fr\u{e9}e\n").is_err());
    }
}
