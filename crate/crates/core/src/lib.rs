//! Checkers for untrusted generative language-model oracles.
//!
//! The crate treats a language model as an oracle whose answers are accepted
//! or rejected by much simpler checker procedures:
//!
//! - [`linearity`]: a group-homomorphism test over entity extraction, where
//!   replacing entities with synonyms must flip exactly the matching bits of
//!   the extraction result.
//! - [`alignment`]: directional phrase alignment between two constituency
//!   trees, used as a proof of semantic equivalence.
//! - [`paraphrase`]: a proof-constructing checker for "yes" equivalence
//!   answers and a randomized trust test for "no" answers.
//!
//! All oracle traffic flows through [`oracle`], which renders the prompt
//! templates, parses replies, votes over repeated queries and records a
//! replayable transcript. [`harness`] wires everything into campaigns over
//! DOCRED and MSRP style inputs.

pub mod alignment;
pub mod harness;
pub mod linearity;
pub mod lingua;
pub mod oracle;
pub mod paraphrase;
pub mod text;
