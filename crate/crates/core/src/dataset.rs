//! Line-delimited JSON dataset records.
//!
//! One object per line with fields `id`, `text`, `valid`, `plausibility`
//! (`"believable"` or `"unbelievable"`) and an optional `pair_id`. Unknown
//! fields are rejected. Blank lines are skipped.

use crate::metrics::Subgroup;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plausibility {
    Believable,
    Unbelievable,
}

impl fmt::Display for Plausibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Plausibility::Believable => "believable",
            Plausibility::Unbelievable => "unbelievable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetInstance {
    pub id: String,
    pub text: String,
    pub valid: bool,
    pub plausibility: Plausibility,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_id: Option<String>,
}

impl DatasetInstance {
    pub fn subgroup(&self) -> Subgroup {
        Subgroup::of(self.valid, self.plausibility)
    }

    pub fn gold(&self) -> u8 {
        self.valid as u8
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
}

pub fn read_dataset(reader: impl BufRead) -> Result<Vec<DatasetInstance>, DatasetError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: DatasetInstance =
            serde_json::from_str(&line).map_err(|e| DatasetError::Malformed { line: line_no, message: e.to_string() })?;
        if inst.id.is_empty() {
            return Err(DatasetError::Malformed { line: line_no, message: "empty id".into() });
        }
        if inst.text.trim().is_empty() {
            return Err(DatasetError::Malformed { line: line_no, message: "empty text".into() });
        }
        if !ids.insert(inst.id.clone()) {
            return Err(DatasetError::DuplicateId { line: line_no, id: inst.id });
        }
        out.push(inst);
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetInstance>, DatasetError> {
    let f = std::fs::File::open(path)?;
    read_dataset(BufReader::new(f))
}

pub fn write_dataset(mut w: impl Write, instances: &[DatasetInstance]) -> std::io::Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut w, inst)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOUR: &str = r#"{"id":"a","text":"All a are b. All b are c. Therefore, all a are c.","valid":true,"plausibility":"believable"}
{"id":"b","text":"x","valid":false,"plausibility":"unbelievable","pair_id":"p1"}

{"id":"c","text":"y","valid":true,"plausibility":"unbelievable","pair_id":"p1"}
{"id":"d","text":"z","valid":false,"plausibility":"believable"}
"#;

    #[test]
    fn reads_four_records() {
        let ds = read_dataset(FOUR.as_bytes()).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds[1].pair_id.as_deref(), Some("p1"));
        assert_eq!(ds[3].subgroup(), Subgroup::IB);
    }

    #[test]
    fn missing_plausibility_reports_line() {
        let text = "{\"id\":\"a\",\"text\":\"t\",\"valid\":true,\"plausibility\":\"believable\"}\n{\"id\":\"b\",\"text\":\"t\",\"valid\":true}\n";
        match read_dataset(text.as_bytes()) {
            Err(DatasetError::Malformed { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("plausibility"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_plausibility_literal_and_unknown_field() {
        let bad = r#"{"id":"a","text":"t","valid":true,"plausibility":"plausible"}"#;
        assert!(matches!(read_dataset(bad.as_bytes()), Err(DatasetError::Malformed { line: 1, .. })));
        let extra = r#"{"id":"a","text":"t","valid":true,"plausibility":"believable","x":1}"#;
        assert!(matches!(read_dataset(extra.as_bytes()), Err(DatasetError::Malformed { line: 1, .. })));
    }

    #[test]
    fn duplicate_id_rejected() {
        let text = "{\"id\":\"a\",\"text\":\"t\",\"valid\":true,\"plausibility\":\"believable\"}\n{\"id\":\"a\",\"text\":\"u\",\"valid\":false,\"plausibility\":\"believable\"}\n";
        assert!(matches!(read_dataset(text.as_bytes()), Err(DatasetError::DuplicateId { line: 2, .. })));
    }

    #[test]
    fn write_then_read() {
        let ds = read_dataset(FOUR.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ds).unwrap();
        assert_eq!(read_dataset(buf.as_slice()).unwrap(), ds);
    }
}
