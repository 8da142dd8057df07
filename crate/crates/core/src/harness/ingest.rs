use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::oracle::Answer;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledEntity {
    pub surface: String,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocredRecord {
    pub sentence_id: String,
    pub sentence: String,
    #[serde(default)]
    pub labeled_entities: Vec<LabeledEntity>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MsrpRecord {
    pub pair_id: String,
    pub s1: String,
    pub s2: String,
    pub label: Answer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRow {
    /// 1-based: the array position for JSON, the line for TSV.
    pub row: usize,
    pub reason: String,
}

/// Validated records of one input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ingested<T> {
    pub records: Vec<T>,
    pub skipped: Vec<SkippedRow>,
    /// sha256 of the file bytes.
    pub sha256: String,
}

fn read(path: &Path) -> Result<Vec<u8>, HarnessError> {
    fs::read(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Joins tokens with spaces, dropping the space before closing punctuation
/// and after opening brackets.
pub fn detokenize(tokens: &[String]) -> String {
    let mut out = String::new();
    for t in tokens {
        let closes = matches!(t.as_str(), "," | "." | ";" | ":" | "!" | "?" | ")" | "]" | "'s" | "%" | "n't");
        if !out.is_empty() && !closes && !out.ends_with(['(', '[']) {
            out.push(' ');
        }
        out.push_str(t);
    }
    out
}

fn simple_record(v: &Value) -> Result<DocredRecord, String> {
    let r: DocredRecord = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
    if r.sentence.trim().is_empty() {
        return Err("empty sentence".into());
    }
    Ok(r)
}

/// One record per sentence of a document in the original dataset layout:
/// `sents` holds token lists and `vertexSet` groups mentions carrying
/// `name`, `sent_id` and `type`.
fn native_records(doc: &Value) -> Result<Vec<DocredRecord>, String> {
    let title = doc.get("title").and_then(Value::as_str).unwrap_or("doc");
    let sents = doc.get("sents").and_then(Value::as_array).ok_or("missing sents")?;
    let mut out = Vec::with_capacity(sents.len());
    for (i, sent) in sents.iter().enumerate() {
        let tokens: Vec<String> = sent
            .as_array()
            .ok_or("sentence is not a token list")?
            .iter()
            .map(|t| t.as_str().map(str::to_string).ok_or("token is not a string"))
            .collect::<Result<_, _>>()?;
        let mut entities: Vec<LabeledEntity> = Vec::new();
        for vertex in doc.get("vertexSet").and_then(Value::as_array).into_iter().flatten() {
            for mention in vertex.as_array().into_iter().flatten() {
                if mention.get("sent_id").and_then(Value::as_u64) != Some(i as u64) {
                    continue;
                }
                let (Some(name), Some(class)) =
                    (mention.get("name").and_then(Value::as_str), mention.get("type").and_then(Value::as_str))
                else {
                    return Err("mention lacks name or type".into());
                };
                let e = LabeledEntity {
                    surface: name.to_string(),
                    class: class.to_string(),
                };
                if !entities.contains(&e) {
                    entities.push(e);
                }
            }
        }
        out.push(DocredRecord {
            sentence_id: format!("{title}#{i}"),
            sentence: detokenize(&tokens),
            labeled_entities: entities,
        });
    }
    Ok(out)
}

/// Parses a JSON array of either flat sentence records
/// (`sentence_id`, `sentence`, `labeled_entities`) or whole documents in
/// the dataset's native layout. Empty sentences are skipped.
pub fn parse_docred(bytes: &[u8]) -> Result<Ingested<DocredRecord>, HarnessError> {
    let items: Vec<Value> = serde_json::from_slice(bytes).map_err(|e| HarnessError::Format {
        row: e.line(),
        message: e.to_string(),
    })?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let parsed = if item.get("sents").is_some() {
            native_records(item)
        } else {
            simple_record(item).map(|r| vec![r])
        };
        match parsed {
            Ok(rs) => {
                for r in rs {
                    if r.sentence.trim().is_empty() {
                        skipped.push(SkippedRow {
                            row: i + 1,
                            reason: format!("{}: empty sentence", r.sentence_id),
                        });
                    } else {
                        records.push(r);
                    }
                }
            }
            Err(reason) => skipped.push(SkippedRow { row: i + 1, reason }),
        }
    }
    Ok(Ingested {
        records,
        skipped,
        sha256: digest(bytes),
    })
}

pub fn ingest_docred(path: impl AsRef<Path>) -> Result<Ingested<DocredRecord>, HarnessError> {
    parse_docred(&read(path.as_ref())?)
}

pub const MSRP_HEADER: [&str; 5] = ["Quality", "#1 ID", "#2 ID", "#1 String", "#2 String"];

/// Parses the tab-separated paraphrase corpus. Quotes are literal text.
pub fn parse_msrp(bytes: &[u8]) -> Result<Ingested<MsrpRecord>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .has_headers(false)
        .from_reader(bytes);
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => {
            return Err(HarnessError::Format {
                row: 1,
                message: e.to_string(),
            })
        }
        None => {
            return Err(HarnessError::Format {
                row: 1,
                message: "empty file".into(),
            })
        }
    };
    let names: Vec<&str> = header.iter().map(|h| h.trim().trim_start_matches('\u{feff}')).collect();
    if names != MSRP_HEADER {
        return Err(HarnessError::Format {
            row: 1,
            message: format!("expected header {:?}, found {names:?}", MSRP_HEADER),
        });
    }
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for row in rows {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                skipped.push(SkippedRow {
                    row: line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() == 1 && row[0].trim().is_empty() {
            continue;
        }
        let mut skip = |reason: String| skipped.push(SkippedRow { row: line, reason });
        if row.len() != 5 {
            skip(format!("expected 5 fields, found {}", row.len()));
            continue;
        }
        let label = match row[0].trim() {
            "1" => Answer::Yes,
            "0" => Answer::No,
            q => {
                skip(format!("quality {q:?} is not 0 or 1"));
                continue;
            }
        };
        let (s1, s2) = (row[3].trim(), row[4].trim());
        if s1.is_empty() || s2.is_empty() {
            skip("missing sentence".into());
            continue;
        }
        records.push(MsrpRecord {
            pair_id: format!("{}-{}", row[1].trim(), row[2].trim()),
            s1: s1.to_string(),
            s2: s2.to_string(),
            label,
        });
    }
    Ok(Ingested {
        records,
        skipped,
        sha256: digest(bytes),
    })
}

pub fn ingest_msrp(path: impl AsRef<Path>) -> Result<Ingested<MsrpRecord>, HarnessError> {
    parse_msrp(&read(path.as_ref())?)
}
