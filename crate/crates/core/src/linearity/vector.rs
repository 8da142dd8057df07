use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::LinearityError;

/// A length-m bit vector. Serialized as a string of `0`/`1` characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CharVector {
    bits: Vec<bool>,
}

impl CharVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(m: usize) -> Self {
        Self::new(vec![false; m])
    }

    pub fn ones(m: usize) -> Self {
        Self::new(vec![true; m])
    }

    /// Bit `i` is bit `i` of `index` (least significant first).
    pub fn from_index(index: u64, m: usize) -> Self {
        Self::new((0..m).map(|i| i < 64 && (index >> i) & 1 == 1).collect())
    }

    /// Inverse of [`CharVector::from_index`]; only meaningful for m ≤ 64.
    pub fn to_index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(i, &b)| b && *i < 64)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Uniform draw from {0,1}^m.
    pub fn random(m: usize, rng: &mut impl Rng) -> Self {
        Self::new((0..m).map(|_| rng.random::<bool>()).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self::new(self.bits.iter().map(|b| !b).collect())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Result<Self, LinearityError> {
        if self.len() != other.len() {
            return Err(LinearityError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Self::new(
            self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    /// The G1 operation.
    pub fn xor(&self, other: &Self) -> Result<Self, LinearityError> {
        self.zip_with(other, |a, b| a ^ b)
    }

    /// The G2 operation.
    pub fn xnor(&self, other: &Self) -> Result<Self, LinearityError> {
        self.zip_with(other, |a, b| a == b)
    }
}

pub fn xor(a: &CharVector, b: &CharVector) -> Result<CharVector, LinearityError> {
    a.xor(b)
}

pub fn xnor(a: &CharVector, b: &CharVector) -> Result<CharVector, LinearityError> {
    a.xnor(b)
}

impl fmt::Display for CharVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for CharVector {
    type Err = LinearityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(LinearityError::BadVector(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }
}

impl TryFrom<String> for CharVector {
    type Error = LinearityError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CharVector> for String {
    fn from(v: CharVector) -> String {
        v.to_string()
    }
}
