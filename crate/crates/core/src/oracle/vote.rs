//! Self-consistency voting over repeated oracle replies.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

/// Outcome of a plurality vote.
///
/// `ballots` lists each distinct ballot with its multiplicity, in order of
/// first occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteResult<T> {
    pub winner: T,
    pub count: usize,
    pub k: usize,
    /// Position of the winner's first occurrence in the input.
    pub first_index: usize,
    pub ballots: Vec<(T, usize)>,
}

/// Plurality vote. Ties go to the ballot that occurred first.
///
/// Returns `None` only for an empty input.
pub fn majority_vote<T: Eq + Hash + Clone>(ballots: &[T]) -> Option<VoteResult<T>> {
    if ballots.is_empty() {
        return None;
    }
    let mut slot: HashMap<&T, usize> = HashMap::new();
    let mut tally: Vec<(usize, usize)> = Vec::new(); // (first index, count)
    for (i, b) in ballots.iter().enumerate() {
        match slot.get(b) {
            Some(&s) => tally[s].1 += 1,
            None => {
                slot.insert(b, tally.len());
                tally.push((i, 1));
            }
        }
    }
    // strict comparison keeps the earliest distinct ballot on ties
    let mut best = 0;
    for (s, &(_, count)) in tally.iter().enumerate() {
        if count > tally[best].1 {
            best = s;
        }
    }
    let (first_index, count) = tally[best];
    Some(VoteResult {
        winner: ballots[first_index].clone(),
        count,
        k: ballots.len(),
        first_index,
        ballots: tally
            .iter()
            .map(|&(i, c)| (ballots[i].clone(), c))
            .collect(),
    })
}
