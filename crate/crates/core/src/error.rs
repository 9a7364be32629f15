use thiserror::Error;

use crate::transforms::TransformKind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AigError {
    #[error("malformed literal {lit}: graph has {num_nodes} nodes")]
    MalformedLiteral { lit: u32, num_nodes: usize },
    #[error("expected {expected} input patterns, got {got}")]
    PatternCount { expected: usize, got: usize },
    #[error("pattern width mismatch: expected {expected} bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("I/O arity mismatch: {left:?} vs {right:?} (inputs, outputs)")]
    ArityMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("exhaustive check refused for {inputs} inputs (limit {limit}); use random patterns")]
    ExhaustiveLimit { inputs: usize, limit: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("transform {0} does not occur in the multiset")]
    NotInMultiset(TransformKind),
    #[error("empty multiset")]
    EmptyMultiset,
    #[error("repetition count for {0} must be at least 1")]
    ZeroCount(TransformKind),
    #[error("unknown transform `{0}`")]
    UnknownTransform(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExploreError {
    #[error("no arms to select from")]
    NoArms,
    #[error("no transforms enabled")]
    NoKindsEnabled,
    #[error("iterations per stage must be at least 1")]
    ZeroIterations,
    #[error("schedule needs at least one stage")]
    ZeroStages,
    #[error("top-k carryover must be at least 1")]
    ZeroTopK,
    #[error("schedule lists {got} stage multisets for {stages} stages")]
    MultisetCount { stages: usize, got: usize },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Aig(#[from] AigError),
}
