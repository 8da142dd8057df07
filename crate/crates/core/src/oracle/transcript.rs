use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{OracleError, TemplateId};

/// One recorded reply. Serialized as one JSON Lines row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub prompt_hash: String,
    pub template_id: TemplateId,
    pub repeat_index: u32,
    pub raw_response: String,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

/// Append-only record of oracle replies, unique on `(prompt_hash, repeat_index)`.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
    index: HashMap<(String, u32), usize>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn get(&self, prompt_hash: &str, repeat_index: u32) -> Option<&TranscriptEntry> {
        self.index
            .get(&(prompt_hash.to_string(), repeat_index))
            .map(|&i| &self.entries[i])
    }

    pub fn append(&mut self, entry: TranscriptEntry) -> Result<(), OracleError> {
        let key = (entry.prompt_hash.clone(), entry.repeat_index);
        if self.index.contains_key(&key) {
            return Err(OracleError::DuplicateEntry {
                prompt_hash: key.0,
                repeat_index: key.1,
            });
        }
        self.index.insert(key, self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self, OracleError> {
        let mut t = Transcript::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry =
                serde_json::from_str(&line).map_err(|e| OracleError::TranscriptFormat {
                    line: n + 1,
                    message: e.to_string(),
                })?;
            t.append(entry).map_err(|e| OracleError::TranscriptFormat {
                line: n + 1,
                message: e.to_string(),
            })?;
        }
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, OracleError> {
        Self::from_reader(BufReader::new(fs::File::open(path)?))
    }

    /// Writes every entry as JSON Lines, ordered by `(prompt_hash, repeat_index)`.
    pub fn write_to(&self, mut w: impl Write) -> Result<(), OracleError> {
        let mut order: Vec<&TranscriptEntry> = self.entries.iter().collect();
        order.sort_by(|a, b| (&a.prompt_hash, a.repeat_index).cmp(&(&b.prompt_hash, b.repeat_index)));
        for e in order {
            let line = serde_json::to_string(e).expect("transcript entries always serialize");
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), OracleError> {
        self.write_to(BufWriter::new(fs::File::create(path)?))
    }
}
