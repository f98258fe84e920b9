//! JSON and CSV file helpers shared by the CLI and the examples.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Version stamped into every file this crate writes.
pub const FORMAT_VERSION: u32 = 1;

/// Pretty JSON with a trailing newline. Output is byte-stable for equal values.
pub fn to_json_string<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    write_text(path, &to_json_string(value)?)
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Serializes `rows` as CSV with a header row taken from the first record.
pub fn to_csv_string<T: Serialize>(rows: &[T]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, serde::Deserialize, PartialEq, Debug)]
    struct Row {
        a: u32,
        b: f64,
    }

    #[test]
    fn json_round_trip_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/row.json");
        write_json(&p, &Row { a: 1, b: 0.5 }).unwrap();
        let back: Row = read_json(&p).unwrap();
        assert_eq!(back, Row { a: 1, b: 0.5 });
        assert!(fs::read_to_string(&p).unwrap().ends_with("}\n"));
    }

    #[test]
    fn csv_has_header() {
        let s = to_csv_string(&[Row { a: 1, b: 2.0 }, Row { a: 3, b: 4.5 }]).unwrap();
        assert_eq!(s, "a,b\n1,2.0\n3,4.5\n");
    }
}
