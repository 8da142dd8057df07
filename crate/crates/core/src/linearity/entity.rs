use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LinearityError;
use crate::oracle::{bindings, majority_vote, NamedKind, Parsed, Session, TemplateId};
use crate::text::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedStatus {
    Named,
    NonNamed,
    Undecided,
}

impl From<NamedKind> for NamedStatus {
    fn from(k: NamedKind) -> Self {
        match k {
            NamedKind::Named => NamedStatus::Named,
            NamedKind::NonNamed => NamedStatus::NonNamed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub surface: String,
    pub class: String,
    pub named: NamedStatus,
}

impl Entity {
    pub fn new(surface: impl Into<String>, class: impl Into<String>) -> Self {
        Self {
            surface: surface.into(),
            class: class.into(),
            named: NamedStatus::Undecided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySet {
    pub sentence: String,
    pub entities: Vec<Entity>,
    /// Multiplicity of the winning extraction among the repeats.
    pub con_o: u32,
}

impl EntitySet {
    pub fn m(&self) -> usize {
        self.entities.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Rule,
    OracleReplacement,
    OracleSynonym,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynonymPair {
    pub entity: String,
    pub synonym: String,
    pub provenance: Provenance,
}

/// `e_i → e'_i` for every entity of a sentence, in entity order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynonymTable {
    pub pairs: Vec<SynonymPair>,
}

impl SynonymTable {
    /// Builds a table from plain `(entity, synonym)` pairs, checking that
    /// every synonym is nonempty and differs from its entity.
    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
        provenance: Provenance,
    ) -> Result<Self, LinearityError> {
        let mut table = Self::default();
        for (e, s) in pairs {
            if normalize(s).is_empty() || normalize(s) == normalize(e) {
                return Err(LinearityError::NoUsableSynonym { entity: e.to_string() });
            }
            table.pairs.push(SynonymPair {
                entity: e.to_string(),
                synonym: s.to_string(),
                provenance,
            });
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Class name → candidate surfaces for named replacements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassPool(pub BTreeMap<String, Vec<String>>);

impl ClassPool {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LinearityError> {
        let text = std::fs::read_to_string(path).map_err(|e| LinearityError::Pool(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| LinearityError::Pool(e.to_string()))
    }

    pub fn class(&self, class: &str) -> Option<&[String]> {
        let key = normalize(class);
        self.0
            .iter()
            .find(|(k, _)| normalize(k) == key)
            .map(|(_, v)| v.as_slice())
    }
}

/// Ballot key for an entity-list reply: its sorted set of normalized
/// surfaces. Class labels are ignored so that `person: Aaron` and
/// `name: Aaron` vote together.
pub(crate) fn entity_ballot(parsed: &Parsed) -> Option<Vec<String>> {
    match parsed {
        Parsed::EntityList(list) => {
            let mut key: Vec<String> = list.iter().map(|e| normalize(&e.surface)).collect();
            key.sort();
            key.dedup();
            Some(key)
        }
        _ => None,
    }
}

/// Extracts the entity set of `sentence` by a plurality vote over `repeats`
/// Prompt 1 replies.
pub fn extract_entity_set(
    sentence: &str,
    session: &mut Session<'_>,
    repeats: usize,
) -> Result<EntitySet, LinearityError> {
    let replies = session.query_repeated(TemplateId::EntityExtraction, &bindings([("text", sentence)]), repeats)?;
    let ballots: Vec<_> = replies.iter().map(|r| entity_ballot(&r.parsed)).collect();
    let vote = majority_vote(&ballots).ok_or(LinearityError::AllInvalid)?;
    let Parsed::EntityList(list) = &replies[vote.first_index].parsed else {
        return Err(LinearityError::AllInvalid);
    };
    let mut entities: Vec<Entity> = Vec::new();
    for e in list {
        if !entities.iter().any(|x| normalize(&x.surface) == normalize(&e.surface)) {
            entities.push(Entity::new(e.surface.trim(), e.class.trim()));
        }
    }
    Ok(EntitySet {
        sentence: sentence.to_string(),
        entities,
        con_o: vote.count as u32,
    })
}

/// Classes whose members are named whenever they carry a capital or a digit.
pub const NAMED_CLASSES: &[&str] = &[
    "person", "people", "location", "place", "city", "country", "state", "region",
    "organization", "organisation", "company", "institution", "date", "year", "time", "film",
    "movie", "video game", "game", "book", "album", "song", "band", "team", "event", "award",
    "nationality", "language", "product", "brand",
];

/// Capitalization rules applied before the oracle is consulted.
pub fn classify_by_rules(entity: &Entity) -> NamedStatus {
    let s = entity.surface.trim();
    let has_upper = s.chars().any(char::is_uppercase);
    let has_digit = s.chars().any(|c| c.is_ascii_digit());
    if !has_upper && !has_digit {
        return NamedStatus::NonNamed;
    }
    if NAMED_CLASSES.contains(&normalize(&entity.class).as_str()) {
        return NamedStatus::Named;
    }
    let all_capitalized = s
        .split_whitespace()
        .all(|w| w.chars().find(|c| c.is_alphabetic()).is_some_and(char::is_uppercase));
    if all_capitalized {
        return NamedStatus::Named;
    }
    NamedStatus::Undecided
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecidedBy {
    Rule,
    Oracle,
    /// The vote produced no valid verdict; defaulted to non-named.
    Default,
}

/// Named/non-named decision: rules first, then a Prompt 2 vote for anything
/// the rules leave undecided. If the winning ballot is invalid the entity is
/// treated as non-named.
pub fn classify_named(
    entity: &Entity,
    sentence: &str,
    session: &mut Session<'_>,
    repeats: usize,
) -> Result<(NamedKind, DecidedBy), LinearityError> {
    match classify_by_rules(entity) {
        NamedStatus::Named => return Ok((NamedKind::Named, DecidedBy::Rule)),
        NamedStatus::NonNamed => return Ok((NamedKind::NonNamed, DecidedBy::Rule)),
        NamedStatus::Undecided => {}
    }
    let replies = session.query_repeated(
        TemplateId::NamedClassification,
        &bindings([("entity", entity.surface.as_str()), ("text", sentence)]),
        repeats,
    )?;
    let ballots: Vec<Option<NamedKind>> = replies
        .iter()
        .map(|r| match r.parsed {
            Parsed::Named(k) => Some(k),
            _ => None,
        })
        .collect();
    Ok(match majority_vote(&ballots).and_then(|v| v.winner) {
        Some(k) => (k, DecidedBy::Oracle),
        None => (NamedKind::NonNamed, DecidedBy::Default),
    })
}

/// Picks a replacement for `entity`.
///
/// `taken` lists normalized surfaces the pick must avoid (the sentence's
/// other entities and synonyms already chosen). Named entities of a pooled
/// class draw the first usable pool member; other named entities go through
/// Prompt 3 and non-named ones through Prompt 4, each voted over `repeats`
/// replies, and the first usable item of the winning list is taken.
pub fn generate_synonym(
    entity: &Entity,
    kind: NamedKind,
    sentence: &str,
    pool: Option<&ClassPool>,
    taken: &[String],
    session: &mut Session<'_>,
    repeats: usize,
) -> Result<(String, Provenance), LinearityError> {
    let own = normalize(&entity.surface);
    let usable = |c: &str| {
        let n = normalize(c);
        !n.is_empty() && n != own && !taken.contains(&n)
    };
    if kind == NamedKind::Named {
        if let Some(members) = pool.and_then(|p| p.class(&entity.class)) {
            if let Some(pick) = members.iter().find(|c| usable(c)) {
                return Ok((pick.trim().to_string(), Provenance::Rule));
            }
        }
    }
    let (template, provenance, b) = match kind {
        NamedKind::Named => (
            TemplateId::NamedReplacement,
            Provenance::OracleReplacement,
            bindings([
                ("entity_type", entity.class.as_str()),
                ("entity", entity.surface.as_str()),
                ("text", sentence),
            ]),
        ),
        NamedKind::NonNamed => (
            TemplateId::SynonymList,
            Provenance::OracleSynonym,
            bindings([("entity", entity.surface.as_str()), ("text", sentence)]),
        ),
    };
    let replies = session.query_repeated(template, &b, repeats)?;
    let ballots: Vec<Option<Vec<String>>> = replies
        .iter()
        .map(|r| match &r.parsed {
            Parsed::ItemList(items) => Some(items.iter().map(|i| normalize(i)).collect()),
            _ => None,
        })
        .collect();
    let no_synonym = || LinearityError::NoUsableSynonym {
        entity: entity.surface.clone(),
    };
    let vote = majority_vote(&ballots).ok_or_else(no_synonym)?;
    let Parsed::ItemList(items) = &replies[vote.first_index].parsed else {
        return Err(no_synonym());
    };
    items
        .iter()
        .find(|c| usable(c))
        .map(|c| (c.trim().to_string(), provenance))
        .ok_or_else(no_synonym)
}
