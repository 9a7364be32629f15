//! Flow search-space sizes and the permutation samplers behind bandit arms.
//!
//! A flow drawn from a multiset `{k_0: m_0, ..., k_{n-1}: m_{n-1}}` is any
//! ordering of its `L = m_0 + ... + m_{n-1}` steps. The number of distinct
//! orderings is the multinomial `L! / (m_0! ... m_{n-1}!)`; the
//! none-repetition (`n!`) and uniform m-repetition (`(nm)! / (m!)^n`) counts
//! are special cases.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::FlowError;
use crate::transforms::TransformKind;

fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Flows that use each of `n` transforms exactly once: `n!`.
pub fn count_none_repetition(n: u64) -> BigUint {
    factorial(n)
}

/// Flows that use each of `n` transforms exactly `m` times: `(n m)! / (m!)^n`.
pub fn count_m_repetition(n: u64, m: u64) -> BigUint {
    count_multiset(&vec![m; n as usize])
}

/// Distinct arrangements of a multiset with the given repetition counts.
pub fn count_multiset(counts: &[u64]) -> BigUint {
    let total: u64 = counts.iter().sum();
    let denom = counts
        .iter()
        .fold(BigUint::one(), |acc, &m| acc * factorial(m));
    factorial(total) / denom
}

/// Length of every flow drawn from the multiset.
pub fn flow_length(counts: &[u64]) -> u64 {
    counts.iter().sum()
}

/// Repetition count per transform kind, kept sorted by kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Multiset {
    counts: Vec<(TransformKind, u32)>,
}

impl Multiset {
    pub fn new<I>(counts: I) -> Result<Multiset, FlowError>
    where
        I: IntoIterator<Item = (TransformKind, u32)>,
    {
        let mut v: Vec<(TransformKind, u32)> = Vec::new();
        for (k, m) in counts {
            if m == 0 {
                return Err(FlowError::ZeroCount(k));
            }
            match v.iter_mut().find(|(kk, _)| *kk == k) {
                Some(e) => e.1 += m,
                None => v.push((k, m)),
            }
        }
        if v.is_empty() {
            return Err(FlowError::EmptyMultiset);
        }
        v.sort();
        Ok(Multiset { counts: v })
    }

    /// Every kind in `kinds` repeated `m` times.
    pub fn uniform(kinds: &[TransformKind], m: u32) -> Result<Multiset, FlowError> {
        Multiset::new(kinds.iter().map(|&k| (k, m)))
    }

    pub fn counts(&self) -> &[(TransformKind, u32)] {
        &self.counts
    }

    pub fn count(&self, kind: TransformKind) -> u32 {
        self.counts
            .iter()
            .find(|(k, _)| *k == kind)
            .map_or(0, |&(_, m)| m)
    }

    pub fn kinds(&self) -> impl Iterator<Item = TransformKind> + '_ {
        self.counts.iter().map(|&(k, _)| k)
    }

    /// Total number of steps `L`.
    pub fn len(&self) -> usize {
        self.counts.iter().map(|&(_, m)| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of distinct flows drawn from this multiset.
    pub fn space_size(&self) -> BigUint {
        let v: Vec<u64> = self.counts.iter().map(|&(_, m)| m as u64).collect();
        count_multiset(&v)
    }

    /// All steps in kind order, each kind repeated by its count.
    pub fn expand(&self) -> Vec<TransformKind> {
        self.counts
            .iter()
            .flat_map(|&(k, m)| std::iter::repeat_n(k, m as usize))
            .collect()
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|(k, m)| format!("{k}:{m}")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// An ordered sequence of transforms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Flow {
    pub steps: Vec<TransformKind>,
}

impl Flow {
    pub fn new(steps: Vec<TransformKind>) -> Flow {
        Flow { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn first(&self) -> Option<TransformKind> {
        self.steps.first().copied()
    }

    pub fn count(&self, kind: TransformKind) -> usize {
        self.steps.iter().filter(|&&k| k == kind).count()
    }

    pub fn concat(&self, tail: &Flow) -> Flow {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&tail.steps);
        Flow { steps }
    }

    /// True iff the step counts match `multiset` exactly.
    pub fn is_arrangement_of(&self, multiset: &Multiset) -> bool {
        self.len() == multiset.len() && multiset.counts().iter().all(|&(k, m)| self.count(k) == m as usize)
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for Flow {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let steps = s
            .split([';', ','])
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<TransformKind>, _>>()?;
        Ok(Flow { steps })
    }
}

/// Uniformly random arrangement of the multiset (Fisher-Yates over the
/// expanded step list).
pub fn sample_permutation<R: Rng + ?Sized>(multiset: &Multiset, rng: &mut R) -> Flow {
    let mut steps = multiset.expand();
    steps.shuffle(rng);
    Flow { steps }
}

/// Random arrangement that starts with `first`; the remaining steps are a
/// uniform arrangement of the multiset minus one `first`.
pub fn sample_conditioned<R: Rng + ?Sized>(
    first: TransformKind,
    multiset: &Multiset,
    rng: &mut R,
) -> Result<Flow, FlowError> {
    if multiset.count(first) == 0 {
        return Err(FlowError::NotInMultiset(first));
    }
    let mut rest = multiset.expand();
    let pos = rest.iter().position(|&k| k == first).expect("present");
    rest.remove(pos);
    rest.shuffle(rng);
    let mut steps = Vec::with_capacity(rest.len() + 1);
    steps.push(first);
    steps.extend(rest);
    Ok(Flow { steps })
}
