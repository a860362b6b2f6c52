//! Report plumbing: input digests, float rounding and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
const SIGNIFICANT_DIGITS: usize = 12;

/// A file read from disk together with its SHA-256.
pub struct Input {
    pub path: PathBuf,
    pub text: String,
    pub sha256: String,
}

impl Input {
    pub fn read(path: &Path) -> cogrowth::Result<Input> {
        let text = fs::read_to_string(path).map_err(|e| {
            cogrowth::Error::parse(format!("cannot read {}: {}", path.display(), e))
        })?;
        let sha256 = Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{:02x}", b))
            .collect();
        Ok(Input {
            path: path.to_path_buf(),
            text,
            sha256,
        })
    }

    pub fn describe(&self) -> Value {
        serde_json::json!({ "path": self.path.display().to_string(), "sha256": self.sha256 })
    }
}

fn round(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every non-integer number to 12 significant digits.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> cogrowth::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{}.tmp", name));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &target)?;
    Ok(target)
}

pub fn write_json(dir: &Path, name: &str, report: Value) -> cogrowth::Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(&normalize(report)).expect("reports serialize");
    text.push('\n');
    write_atomic(dir, name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round(10.0 / 7.0), 1.42857142857);
        assert_eq!(round(1.0986122886681098), 1.09861228867);
        assert_eq!(round(0.5), 0.5);
        let v = normalize(serde_json::json!({"a": [1.0 / 3.0, 7], "b": "x"}));
        assert_eq!(v.to_string(), r#"{"a":[0.333333333333,7],"b":"x"}"#);
    }
}
