use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    parse_for, Backend, BackendKind, Bindings, OracleError, OracleRequest, Parsed, RenderedPrompt,
    TemplateId, Transcript, TranscriptEntry,
};

/// Hash of `(template_id, rendered text, temperature)`; the transcript key.
pub fn prompt_hash(prompt: &RenderedPrompt, temperature: Option<f64>) -> String {
    let mut h = Sha256::new();
    h.update(prompt.template.name().as_bytes());
    h.update([0]);
    h.update(prompt.to_string().as_bytes());
    h.update([0]);
    match temperature {
        Some(t) => h.update(format!("{t:?}").as_bytes()),
        None => h.update(b"default"),
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResponse {
    pub template: TemplateId,
    pub prompt_hash: String,
    pub repeat_index: u32,
    pub raw_text: String,
    pub parsed: Parsed,
    pub backend: BackendKind,
    pub latency_ms: u64,
    /// Served from the transcript rather than the backend.
    pub cached: bool,
}

/// The oracle: a backend plus the transcript that caches and records its replies.
pub struct Oracle {
    backend: Arc<dyn Backend>,
    transcript: Mutex<Transcript>,
    temperature: Option<f64>,
}

impl Oracle {
    pub fn new(backend: impl Backend + 'static) -> Self {
        Self::from_arc(Arc::new(backend))
    }

    pub fn from_arc(backend: Arc<dyn Backend>) -> Self {
        Self {
            backend,
            transcript: Mutex::new(Transcript::new()),
            temperature: None,
        }
    }

    /// Seeds the cache with previously recorded replies.
    pub fn with_transcript(self, transcript: Transcript) -> Self {
        Self {
            transcript: Mutex::new(transcript),
            ..self
        }
    }

    pub fn with_temperature(self, temperature: Option<f64>) -> Self {
        Self { temperature, ..self }
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend.kind()
    }

    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }

    pub fn session(&self) -> Session<'_> {
        Session {
            oracle: self,
            next_index: HashMap::new(),
            calls: CallCounts::default(),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Transcript> {
        self.transcript.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn transcript(&self) -> Transcript {
        self.lock().clone()
    }

    pub fn save_transcript(&self, path: impl AsRef<Path>) -> Result<(), OracleError> {
        self.lock().save(path)
    }

    fn fetch(&self, prompt: &RenderedPrompt, hash: &str, repeat_index: u32) -> Result<OracleResponse, OracleError> {
        let respond = |raw: String, latency_ms: u64, cached: bool| OracleResponse {
            template: prompt.template,
            prompt_hash: hash.to_string(),
            repeat_index,
            parsed: parse_for(prompt.template, &raw),
            raw_text: raw,
            backend: self.backend.kind(),
            latency_ms,
            cached,
        };
        if let Some(e) = self.lock().get(hash, repeat_index) {
            return Ok(respond(e.raw_response.clone(), 0, true));
        }
        let started = Instant::now();
        let raw = self.backend.complete(&OracleRequest {
            prompt,
            prompt_hash: hash,
            repeat_index,
            temperature: self.temperature,
        })?;
        let latency_ms = started.elapsed().as_millis() as u64;
        let mut transcript = self.lock();
        // a concurrent session may have recorded this slot while we waited
        if let Some(e) = transcript.get(hash, repeat_index) {
            return Ok(respond(e.raw_response.clone(), latency_ms, true));
        }
        transcript.append(TranscriptEntry {
            prompt_hash: hash.to_string(),
            template_id: prompt.template,
            repeat_index,
            raw_response: raw.clone(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
        })?;
        Ok(respond(raw, latency_ms, false))
    }
}

/// Number of queries issued per template.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallCounts(pub BTreeMap<TemplateId, usize>);

impl CallCounts {
    pub fn get(&self, t: TemplateId) -> usize {
        self.0.get(&t).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    fn bump(&mut self, t: TemplateId, n: usize) {
        *self.0.entry(t).or_default() += n;
    }
}

/// A sequence of queries with its own repeat numbering.
///
/// The n-th time a session issues a given prompt it asks for repeat index
/// n, so identical prompts within one session receive independent replies.
pub struct Session<'a> {
    oracle: &'a Oracle,
    next_index: HashMap<String, u32>,
    calls: CallCounts,
}

impl Session<'_> {
    pub fn oracle(&self) -> &Oracle {
        self.oracle
    }

    pub fn calls(&self) -> &CallCounts {
        &self.calls
    }

    pub fn query(&mut self, template: TemplateId, bindings: &Bindings) -> Result<OracleResponse, OracleError> {
        Ok(self.query_repeated(template, bindings, 1)?.remove(0))
    }

    /// Issues the prompt `k` times; replies come back in repeat-index order.
    pub fn query_repeated(
        &mut self,
        template: TemplateId,
        bindings: &Bindings,
        k: usize,
    ) -> Result<Vec<OracleResponse>, OracleError> {
        let prompt = template.template().render(bindings)?;
        let hash = prompt_hash(&prompt, self.oracle.temperature);
        let start = self.next_index.get(&hash).copied().unwrap_or(0);
        let mut out = Vec::with_capacity(k);
        for i in 0..k as u32 {
            out.push(self.oracle.fetch(&prompt, &hash, start + i)?);
        }
        self.next_index.insert(hash, start + k as u32);
        self.calls.bump(template, k);
        Ok(out)
    }
}
