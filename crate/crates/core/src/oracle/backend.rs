use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{derive_seed, OracleError, RenderedPrompt, TemplateId, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Live,
    Scripted,
    Replay,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Live => "live",
            BackendKind::Scripted => "scripted",
            BackendKind::Replay => "replay",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleRequest<'a> {
    pub prompt: &'a RenderedPrompt,
    pub prompt_hash: &'a str,
    pub repeat_index: u32,
    pub temperature: Option<f64>,
}

/// Something that turns a rendered prompt into raw reply text.
pub trait Backend: Send + Sync {
    fn kind(&self) -> BackendKind;
    fn complete(&self, request: &OracleRequest<'_>) -> Result<String, OracleError>;
}

/// How a scripted rule chooses among its canned responses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pick {
    /// `responses[repeat_index % len]`
    #[default]
    Cycle,
    /// Index drawn from the table seed, the prompt hash and the repeat index.
    Seeded,
}

/// A canned reply rule. A rule matches when its template (if given) equals
/// the request's and every `contains` string occurs in the rendered prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptRule {
    #[serde(default)]
    pub template: Option<TemplateId>,
    #[serde(default)]
    pub contains: Vec<String>,
    pub responses: Vec<String>,
    #[serde(default)]
    pub pick: Pick,
}

impl ScriptRule {
    pub fn new(template: Option<TemplateId>, contains: &[&str], responses: &[&str]) -> Self {
        Self {
            template,
            contains: contains.iter().map(|s| s.to_string()).collect(),
            responses: responses.iter().map(|s| s.to_string()).collect(),
            pick: Pick::Cycle,
        }
    }

    pub fn seeded(mut self) -> Self {
        self.pick = Pick::Seeded;
        self
    }

    fn matches(&self, request: &OracleRequest<'_>) -> bool {
        if self.template.is_some_and(|t| t != request.prompt.template) {
            return false;
        }
        let text = request.prompt.to_string();
        self.contains.iter().all(|c| text.contains(c.as_str()))
    }
}

/// On-disk form of a scripted oracle (`--oracle scripted:<table>`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptTable {
    #[serde(default)]
    pub seed: u64,
    pub rules: Vec<ScriptRule>,
}

type Responder = dyn Fn(&OracleRequest<'_>) -> Option<String> + Send + Sync;

/// Deterministic oracle for tests and desk experiments.
///
/// A responder closure, when present, is consulted first; then the rules in
/// order. Replies depend only on the request, never on call order, so
/// concurrent use is safe and results are reproducible.
#[derive(Clone, Default)]
pub struct ScriptedBackend {
    seed: u64,
    rules: Vec<ScriptRule>,
    responder: Option<Arc<Responder>>,
}

impl fmt::Debug for ScriptedBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScriptedBackend")
            .field("seed", &self.seed)
            .field("rules", &self.rules.len())
            .field("responder", &self.responder.is_some())
            .finish()
    }
}

impl ScriptedBackend {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn from_table(table: ScriptTable) -> Result<Self, OracleError> {
        if let Some(i) = table.rules.iter().position(|r| r.responses.is_empty()) {
            return Err(OracleError::ScriptFormat(format!("rule {i} has no responses")));
        }
        Ok(Self {
            seed: table.seed,
            rules: table.rules,
            responder: None,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path)?;
        let table: ScriptTable =
            serde_json::from_str(&text).map_err(|e| OracleError::ScriptFormat(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn with_rule(mut self, rule: ScriptRule) -> Self {
        assert!(!rule.responses.is_empty(), "scripted rule needs at least one response");
        self.rules.push(rule);
        self
    }

    /// Installs a closure that answers any request it returns `Some` for.
    pub fn with_responder(
        mut self,
        f: impl Fn(&OracleRequest<'_>) -> Option<String> + Send + Sync + 'static,
    ) -> Self {
        self.responder = Some(Arc::new(f));
        self
    }

    /// A backend that always answers with `f`.
    pub fn from_fn(f: impl Fn(&OracleRequest<'_>) -> String + Send + Sync + 'static) -> Self {
        Self::new(0).with_responder(move |r| Some(f(r)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform value in `[0, n)` determined by the seed and the request key.
    pub fn seeded_index(seed: u64, prompt_hash: &str, repeat_index: u32, n: usize) -> usize {
        let label = format!("{prompt_hash}#{repeat_index}");
        (derive_seed(seed, &label) % n as u64) as usize
    }
}

impl Backend for ScriptedBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Scripted
    }

    fn complete(&self, request: &OracleRequest<'_>) -> Result<String, OracleError> {
        if let Some(reply) = self.responder.as_ref().and_then(|f| f(request)) {
            return Ok(reply);
        }
        let rule = self
            .rules
            .iter()
            .find(|r| r.matches(request))
            .ok_or_else(|| OracleError::NoScriptedResponse {
                template: request.prompt.template,
                prompt_hash: request.prompt_hash.to_string(),
            })?;
        let n = rule.responses.len();
        let i = match rule.pick {
            Pick::Cycle => request.repeat_index as usize % n,
            Pick::Seeded => {
                Self::seeded_index(self.seed, request.prompt_hash, request.repeat_index, n)
            }
        };
        Ok(rule.responses[i].clone())
    }
}

/// Serves replies from a previously recorded transcript; anything missing is
/// a [`OracleError::ReplayMiss`].
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    replies: HashMap<(String, u32), String>,
}

impl ReplayBackend {
    pub fn new(transcript: &Transcript) -> Self {
        Self {
            replies: transcript
                .entries()
                .iter()
                .map(|e| ((e.prompt_hash.clone(), e.repeat_index), e.raw_response.clone()))
                .collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, OracleError> {
        Ok(Self::new(&Transcript::load(path)?))
    }

    pub fn len(&self) -> usize {
        self.replies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replies.is_empty()
    }
}

impl Backend for ReplayBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Replay
    }

    fn complete(&self, request: &OracleRequest<'_>) -> Result<String, OracleError> {
        self.replies
            .get(&(request.prompt_hash.to_string(), request.repeat_index))
            .cloned()
            .ok_or_else(|| OracleError::ReplayMiss {
                prompt_hash: request.prompt_hash.to_string(),
                missing_index: request.repeat_index,
            })
    }
}
