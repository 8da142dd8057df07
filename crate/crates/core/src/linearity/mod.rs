//! The linearity test for entity extraction.
//!
//! An extractor f maps a sentence rewritten by a characteristic vector v
//! (entities whose bit is set are replaced by synonyms) back to a vector
//! recording which originals it still finds. An honest extractor yields the
//! complement of v, which is a homomorphism from (bit vectors, XOR) to
//! (bit vectors, XNOR); the test samples x, y and checks
//! f(x ⊕ y) = f(x) ⊙ f(y).

mod campaign;
mod entity;
pub mod sim;
mod trial;
mod vector;

pub use campaign::{
    rejection_bound, run_linearity_campaign, LinearityCalls, LinearityConfig, LinearityVerdict, TrialRecord,
    UntestableReason,
};
pub use entity::{
    classify_by_rules, classify_named, extract_entity_set, generate_synonym, ClassPool, DecidedBy, Entity, EntitySet,
    NamedStatus, Provenance, SynonymPair, SynonymTable, NAMED_CLASSES,
};
pub use trial::{
    apply_replacement, check_replaceable, judge_trial, observe_parsed, observe_vector, run_trial, Extractions,
    LinearityTrial, TrialJudgement,
};
pub use vector::{xnor, xor, CharVector};

use crate::oracle::OracleError;

#[derive(Debug, thiserror::Error)]
pub enum LinearityError {
    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("'{0}' is not a bit")]
    BadVector(char),
    #[error("entity {0} does not occur in the sentence")]
    EntityNotFound(usize),
    #[error("every extraction was invalid")]
    AllInvalid,
    #[error("no entities to test")]
    NoEntities,
    #[error("no usable synonym for {entity:?}")]
    NoUsableSynonym { entity: String },
    #[error("epsilon {0} is outside (0, 1]")]
    Domain(f64),
    #[error("class pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
