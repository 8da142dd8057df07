//! Prompt templates sent to the oracle.
//!
//! Placeholders are written `{name}` and substituted in a single pass, so a
//! bound value that itself contains braces is never re-expanded.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateId {
    EntityExtraction,
    NamedClassification,
    NamedReplacement,
    SynonymList,
    PairEquivalence,
    PhraseEquivalence,
    ParaphraseGeneration,
}

impl TemplateId {
    pub const ALL: [TemplateId; 7] = [
        TemplateId::EntityExtraction,
        TemplateId::NamedClassification,
        TemplateId::NamedReplacement,
        TemplateId::SynonymList,
        TemplateId::PairEquivalence,
        TemplateId::PhraseEquivalence,
        TemplateId::ParaphraseGeneration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TemplateId::EntityExtraction => "EntityExtraction",
            TemplateId::NamedClassification => "NamedClassification",
            TemplateId::NamedReplacement => "NamedReplacement",
            TemplateId::SynonymList => "SynonymList",
            TemplateId::PairEquivalence => "PairEquivalence",
            TemplateId::PhraseEquivalence => "PhraseEquivalence",
            TemplateId::ParaphraseGeneration => "ParaphraseGeneration",
        }
    }

    pub fn template(self) -> PromptTemplate {
        let (system_text, human_text) = match self {
            TemplateId::EntityExtraction => (None, ENTITY_EXTRACTION),
            TemplateId::NamedClassification => (None, NAMED_CLASSIFICATION),
            TemplateId::NamedReplacement => (None, NAMED_REPLACEMENT),
            TemplateId::SynonymList => (None, SYNONYM_LIST),
            TemplateId::PairEquivalence => (Some(PAIR_SYSTEM), PAIR_EQUIVALENCE),
            TemplateId::PhraseEquivalence => (Some(PHRASE_SYSTEM), PHRASE_EQUIVALENCE),
            TemplateId::ParaphraseGeneration => (Some(PARAPHRASE_SYSTEM), PARAPHRASE_GENERATION),
        };
        PromptTemplate {
            id: self,
            system_text,
            human_text,
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const ENTITY_EXTRACTION: &str = "Please perform entity recognition for all entities in the following sentence: \"{text}\"\n\
\n\
Present the result as a strictly formatted numbered list e.g.\n\
\"1. movie: Wizard of Oz\n\
2. animal: tiger\"";

const NAMED_CLASSIFICATION: &str = "Is the entity \"{entity}\" in the sentence \"{text}\" a \"named entity\" or a \"normal entity\"? \
Please explain in 20 words or less, and then place your answer in double brackets [[ ]]";

const NAMED_REPLACEMENT: &str = "Please list five random entities (type: \"{entity_type}\") that could replace \"{entity}\" in the sentence \"{text}\".\n\
\n\
Format your answer with a numbered list of the synonyms. e.g.\n\
\"1. Synonym1\n\
2. Synonym2\"";

const SYNONYM_LIST: &str = "Please list synonyms for \"{entity}\" in the sentence \"{text}\".\n\
\n\
Format your answer with a numbered list of the synonyms. e.g.\n\
\"1. Synonym1\n\
2. Synonym2\"";

const PAIR_SYSTEM: &str =
    "You are a helpful assistant that decides if two sentences are paraphrases designed to output JSON.";

const PAIR_EQUIVALENCE: &str = "Decide whether the following two sentences are semantically equivalent:\n\
1. '{sentence1}' 2. '{sentence2}'\n\
Answer yes or no and provide a short explanation. Output with keys 'answer' and 'explanation'.";

const PHRASE_SYSTEM: &str =
    "You are a helpful assistant that decides if two texts could be paraphrases designed to output JSON.";

const PHRASE_EQUIVALENCE: &str = "Decide whether the following two texts could be considered semantically equivalent:\n\
1. '{text1}' 2. '{text2}'\n\
Answer yes or no and provide a short explanation. Output with keys 'answer' and 'explanation'.";

const PARAPHRASE_SYSTEM: &str = "You are a helpful paraphrases generator designed to output JSON.";

const PARAPHRASE_GENERATION: &str = "Generate five paraphrases that are semantically equivalent to the following sentence: '{sentence}'\n\
Output with key 'paraphrases'.";

#[derive(Debug, Clone, Copy)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub system_text: Option<&'static str>,
    pub human_text: &'static str,
}

impl PromptTemplate {
    /// Placeholder names in order of first appearance across system and human text.
    pub fn placeholders(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        for text in self.system_text.into_iter().chain([self.human_text]) {
            for name in scan_placeholders(text) {
                if !names.contains(&name) {
                    names.push(name);
                }
            }
        }
        names
    }

    pub fn render(&self, bindings: &Bindings) -> Result<RenderedPrompt, OracleError> {
        let system = self
            .system_text
            .map(|text| substitute(text, bindings))
            .transpose()?;
        let human = substitute(self.human_text, bindings)?;
        Ok(RenderedPrompt {
            template: self.id,
            system,
            human,
        })
    }
}

/// Placeholder bindings. Ordered so that debugging output is stable.
pub type Bindings = BTreeMap<String, String>;

/// Convenience constructor for [`Bindings`].
pub fn bindings<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Bindings {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub template: TemplateId,
    pub system: Option<String>,
    pub human: String,
}

impl fmt::Display for RenderedPrompt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(system) = &self.system {
            writeln!(f, "{system}")?;
            writeln!(f)?;
        }
        f.write_str(&self.human)
    }
}

/// Renders `template_id` with `bindings`. Fails on the first unbound placeholder.
pub fn render_prompt(template_id: TemplateId, bindings: &Bindings) -> Result<RenderedPrompt, OracleError> {
    template_id.template().render(bindings)
}

fn is_placeholder_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

fn scan_placeholders(text: &'static str) -> Vec<&'static str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if is_placeholder_name(&after[..close]) => {
                out.push(&after[..close]);
                rest = &after[close + 1..];
            }
            _ => rest = after,
        }
    }
    out
}

fn substitute(text: &str, bindings: &Bindings) -> Result<String, OracleError> {
    let mut out = String::with_capacity(text.len() + 64);
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if is_placeholder_name(&after[..close]) => {
                let name = &after[..close];
                let value = bindings
                    .get(name)
                    .ok_or_else(|| OracleError::UnboundPlaceholder(name.to_string()))?;
                out.push_str(value);
                rest = &after[close + 1..];
            }
            _ => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entity_extraction_embeds_sentence() {
        let p = render_prompt(TemplateId::EntityExtraction, &bindings([("text", "X")])).unwrap();
        assert!(p.human.contains("entities in the following sentence: \"X\""));
        assert!(p.system.is_none());
    }

    #[test]
    fn paraphrase_generation_asks_for_five() {
        let p = render_prompt(TemplateId::ParaphraseGeneration, &bindings([("sentence", "S")])).unwrap();
        assert!(p.human.contains("Generate five paraphrases"));
        assert!(p.human.contains("'S'"));
    }

    #[test]
    fn pair_identity_bindings_fill_both_slots() {
        let p = render_prompt(
            TemplateId::PairEquivalence,
            &bindings([("sentence1", "a"), ("sentence2", "a")]),
        )
        .unwrap();
        assert!(p.human.contains("1. 'a' 2. 'a'"));
    }

    #[test]
    fn unbound_placeholder_is_reported_by_name() {
        let err = render_prompt(TemplateId::PairEquivalence, &bindings([("sentence1", "a")])).unwrap_err();
        assert!(matches!(err, OracleError::UnboundPlaceholder(ref n) if n == "sentence2"));
    }

    #[test]
    fn values_are_not_re_expanded() {
        let p = render_prompt(TemplateId::EntityExtraction, &bindings([("text", "{text} {x}")])).unwrap();
        assert!(p.human.contains("\"{text} {x}\""));
    }

    #[test]
    fn every_template_lists_its_placeholders() {
        let names: Vec<_> = TemplateId::ALL
            .iter()
            .map(|t| t.template().placeholders())
            .collect();
        assert_eq!(names[0], ["text"]);
        assert_eq!(names[1], ["entity", "text"]);
        assert_eq!(names[2], ["entity_type", "entity", "text"]);
        assert_eq!(names[3], ["entity", "text"]);
        assert_eq!(names[4], ["sentence1", "sentence2"]);
        assert_eq!(names[5], ["text1", "text2"]);
        assert_eq!(names[6], ["sentence"]);
    }

    #[test]
    fn literal_double_brackets_survive() {
        let p = render_prompt(
            TemplateId::NamedClassification,
            &bindings([("entity", "x0"), ("text", "t")]),
        )
        .unwrap();
        assert!(p.human.ends_with("double brackets [[ ]]"));
    }
}
