//! Total parsers for oracle replies. None of these panic on arbitrary input.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::text::normalize;

use super::prompt::TemplateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedKind {
    Named,
    NonNamed,
}

/// One `class: surface` line of an entity list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtractedEntity {
    pub class: String,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("no well-formed numbered line")]
    EmptyList,
    #[error("malformed decision: {0}")]
    MalformedDecision(String),
    #[error("no usable paraphrases")]
    NoParaphrases,
    #[error("no [[...]] verdict")]
    MissingVerdict,
}

/// Parsed form of a reply, chosen by the template that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parsed {
    EntityList(Vec<ExtractedEntity>),
    Named(NamedKind),
    ItemList(Vec<String>),
    Decision { answer: Answer, explanation: String },
    ParaphraseList(Vec<String>),
    Invalid,
}

impl Parsed {
    pub fn is_invalid(&self) -> bool {
        matches!(self, Parsed::Invalid)
    }
}

/// Parses `raw` according to what `template` asks the oracle to produce.
pub fn parse_for(template: TemplateId, raw: &str) -> Parsed {
    let parsed = match template {
        TemplateId::EntityExtraction => parse_entity_list(raw).map(Parsed::EntityList),
        TemplateId::NamedClassification => parse_named_verdict(raw).map(Parsed::Named),
        TemplateId::NamedReplacement | TemplateId::SynonymList => {
            parse_numbered_items(raw).map(Parsed::ItemList)
        }
        TemplateId::PairEquivalence | TemplateId::PhraseEquivalence => {
            parse_decision(raw).map(|(answer, explanation)| Parsed::Decision { answer, explanation })
        }
        TemplateId::ParaphraseGeneration => parse_paraphrases(raw).map(Parsed::ParaphraseList),
    };
    parsed.unwrap_or(Parsed::Invalid)
}

/// Strips a numbered-list prefix (`12.` or `12)`) and returns the remainder.
fn strip_number(line: &str) -> Option<&str> {
    let line = line.trim().trim_matches('"').trim();
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let rest = &line[digits..];
    let rest = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')'))?;
    let rest = rest.trim();
    (!rest.is_empty()).then_some(rest)
}

/// Parses lines of the form `N. class: surface`. Order is kept; duplicates
/// (same class and surface after normalization) are dropped.
pub fn parse_entity_list(raw: &str) -> Result<Vec<ExtractedEntity>, ParseError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for line in raw.lines() {
        let Some(body) = strip_number(line) else { continue };
        let Some((class, surface)) = body.split_once(':') else { continue };
        let class = class.trim();
        let surface = surface.trim().trim_matches('"').trim();
        if class.is_empty() || surface.is_empty() {
            continue;
        }
        if seen.insert((normalize(class), normalize(surface))) {
            out.push(ExtractedEntity {
                class: class.to_string(),
                surface: surface.to_string(),
            });
        }
    }
    if out.is_empty() {
        Err(ParseError::EmptyList)
    } else {
        Ok(out)
    }
}

/// Parses `N. item` lines, as produced for the synonym and replacement prompts.
pub fn parse_numbered_items(raw: &str) -> Result<Vec<String>, ParseError> {
    let items: Vec<String> = raw
        .lines()
        .filter_map(strip_number)
        .map(|s| s.trim_matches('"').trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        Err(ParseError::EmptyList)
    } else {
        Ok(items)
    }
}

/// Reads the `[[...]]` verdict of the named/normal classification prompt.
pub fn parse_named_verdict(raw: &str) -> Result<NamedKind, ParseError> {
    let open = raw.rfind("[[").ok_or(ParseError::MissingVerdict)?;
    let inner = &raw[open + 2..];
    let close = inner.find("]]").ok_or(ParseError::MissingVerdict)?;
    let verdict = normalize(&inner[..close]);
    if verdict.contains("normal") || verdict.contains("non-named") || verdict.contains("not named") {
        Ok(NamedKind::NonNamed)
    } else if verdict.contains("named") {
        Ok(NamedKind::Named)
    } else {
        Err(ParseError::MissingVerdict)
    }
}

/// Yields every JSON object embedded in `raw`, in order of their opening brace.
fn embedded_objects(raw: &str) -> impl Iterator<Item = serde_json::Map<String, Value>> + '_ {
    raw.char_indices().filter(|&(_, c)| c == '{').filter_map(move |(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(map))) => Some(map),
            _ => None,
        }
    })
}

/// Reads `answer` and `explanation` from the first embedded JSON object
/// carrying an `answer` key. The answer is matched case-insensitively.
pub fn parse_decision(raw: &str) -> Result<(Answer, String), ParseError> {
    let Some(obj) = embedded_objects(raw).find(|o| o.contains_key("answer")) else {
        return Err(ParseError::MalformedDecision("no JSON object with an 'answer' key".into()));
    };
    let answer = match obj.get("answer") {
        Some(Value::String(s)) => s.trim().trim_end_matches('.').to_ascii_lowercase(),
        _ => return Err(ParseError::MalformedDecision("'answer' is not a string".into())),
    };
    let answer = match answer.as_str() {
        "yes" => Answer::Yes,
        "no" => Answer::No,
        other => return Err(ParseError::MalformedDecision(format!("answer '{other}' is neither yes nor no"))),
    };
    let explanation = match obj.get("explanation") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(ParseError::MalformedDecision("'explanation' is not a string".into())),
        None => return Err(ParseError::MalformedDecision("missing 'explanation'".into())),
    };
    Ok((answer, explanation))
}

/// Reads the `paraphrases` array. Entries may be strings or single-string objects.
pub fn parse_paraphrases(raw: &str) -> Result<Vec<String>, ParseError> {
    let Some(obj) = embedded_objects(raw).find(|o| o.contains_key("paraphrases")) else {
        return Err(ParseError::NoParaphrases);
    };
    let Some(Value::Array(items)) = obj.get("paraphrases") else {
        return Err(ParseError::NoParaphrases);
    };
    let mut out: Vec<String> = Vec::new();
    for item in items {
        let text = match item {
            Value::String(s) => Some(s.as_str()),
            Value::Object(m) => m.values().find_map(Value::as_str),
            _ => None,
        };
        if let Some(text) = text.map(str::trim).filter(|t| !t.is_empty()) {
            if !out.iter().any(|o| o == text) {
                out.push(text.to_string());
            }
        }
    }
    if out.is_empty() {
        Err(ParseError::NoParaphrases)
    } else {
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ent(class: &str, surface: &str) -> ExtractedEntity {
        ExtractedEntity {
            class: class.into(),
            surface: surface.into(),
        }
    }

    #[test]
    fn entity_list_in_order() {
        let got = parse_entity_list("1. movie: Wizard of Oz\n2. animal: tiger").unwrap();
        assert_eq!(got, vec![ent("movie", "Wizard of Oz"), ent("animal", "tiger")]);
    }

    #[test]
    fn entity_list_empty_is_error() {
        assert_eq!(parse_entity_list(""), Err(ParseError::EmptyList));
        assert_eq!(parse_entity_list("Sure! Here you go."), Err(ParseError::EmptyList));
    }

    #[test]
    fn entity_list_dedupes_after_normalization() {
        let raw = "1. person: A\n1. person: A";
        let got = parse_entity_list(raw).unwrap();
        assert_eq!(got, vec![ent("person", "A")]);
        // independent count: distinct normalized lines in the input
        let distinct: HashSet<_> = raw.lines().map(normalize).collect();
        assert_eq!(got.len(), distinct.len());
        let got = parse_entity_list("1. Person: A\n2. person:  a ").unwrap();
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn entity_list_tolerates_prompt_style_quotes() {
        let got = parse_entity_list("\"1. movie: Wizard of Oz\n2. animal: tiger\"").unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[1].surface, "tiger");
    }

    #[test]
    fn decision_reads_keys() {
        let (a, e) = parse_decision(r#"{"answer":"yes","explanation":"same meaning"}"#).unwrap();
        assert_eq!((a, e.as_str()), (Answer::Yes, "same meaning"));
        let (a, e) = parse_decision(r#"{"answer":"No","explanation":"..."}"#).unwrap();
        assert_eq!((a, e.as_str()), (Answer::No, "..."));
    }

    #[test]
    fn decision_embedded_in_prose() {
        let raw = "Here is my answer: {\"answer\": \"YES\", \"explanation\": \"x {y}\"} hope it helps";
        assert_eq!(parse_decision(raw).unwrap().0, Answer::Yes);
    }

    #[test]
    fn decision_errors() {
        assert!(matches!(parse_decision("plain prose"), Err(ParseError::MalformedDecision(_))));
        assert!(matches!(parse_decision(r#"{"answer":"maybe","explanation":""}"#), Err(ParseError::MalformedDecision(_))));
        assert!(matches!(parse_decision(r#"{"answer":"yes"}"#), Err(ParseError::MalformedDecision(_))));
        assert!(matches!(parse_decision(r#"{"explanation":"x"}"#), Err(ParseError::MalformedDecision(_))));
    }

    #[test]
    fn named_verdict() {
        assert_eq!(parse_named_verdict("A register name. [[named entity]]"), Ok(NamedKind::Named));
        assert_eq!(parse_named_verdict("[[Normal entity]]"), Ok(NamedKind::NonNamed));
        assert_eq!(parse_named_verdict("named"), Err(ParseError::MissingVerdict));
    }

    #[test]
    fn numbered_items() {
        assert_eq!(
            parse_numbered_items("1. Liege, Belgium\n2) Namur\nnoise").unwrap(),
            vec!["Liege, Belgium", "Namur"]
        );
        assert!(parse_numbered_items("none").is_err());
    }

    #[test]
    fn paraphrases_key() {
        let raw = r#"{"paraphrases": ["a", " b ", "", "a", {"text": "c"}]}"#;
        assert_eq!(parse_paraphrases(raw).unwrap(), vec!["a", "b", "c"]);
        assert_eq!(parse_paraphrases("prose"), Err(ParseError::NoParaphrases));
        assert_eq!(parse_paraphrases(r#"{"paraphrases": []}"#), Err(ParseError::NoParaphrases));
    }

    #[test]
    fn parse_for_marks_invalid() {
        assert_eq!(parse_for(TemplateId::PairEquivalence, "nope"), Parsed::Invalid);
        assert!(matches!(
            parse_for(TemplateId::EntityExtraction, "1. a: b"),
            Parsed::EntityList(_)
        ));
    }

    proptest! {
        #[test]
        fn parsers_are_total(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
            let s = String::from_utf8_lossy(&bytes);
            let _ = parse_entity_list(&s);
            let _ = parse_decision(&s);
            let _ = parse_paraphrases(&s);
            let _ = parse_named_verdict(&s);
            let _ = parse_numbered_items(&s);
        }

        #[test]
        fn parsers_are_total_on_structured_noise(s in r#"[0-9.:{}\[\]"a-z ,\n]{0,80}"#) {
            for t in TemplateId::ALL {
                let _ = parse_for(t, &s);
            }
        }
    }
}
