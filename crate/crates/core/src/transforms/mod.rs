//! Semantics-preserving DAG-aware transformations.
//!
//! Every transform rebuilds the graph in topological order and reports how
//! many nodes it actually changed (`tnodes`). Counting transformable nodes
//! runs the same pass and discards the rebuilt graph, so the count always
//! equals what [`apply`] reports on the same input.

mod balance;
mod refactor;
mod resub;
mod rewrite;
pub(crate) mod truth;

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::aig::{Aig, Lit, QoR};
use crate::error::FlowError;
use crate::flowspace::Flow;

/// The transformation catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransformKind {
    /// Rebuild single-output AND trees as depth-minimal trees.
    Balance,
    /// Local algebraic rewriting that strictly reduces node count.
    Rewrite,
    /// Rewriting that also takes zero-gain moves that lower local depth.
    RewriteZ,
    /// Fanout-free cone resynthesis by Shannon decomposition.
    Refactor,
    /// Refactoring that also accepts equal-size replacements.
    RefactorZ,
    /// Merge of functionally equivalent nodes.
    Resub,
}

impl TransformKind {
    pub const ALL: [TransformKind; 6] = [
        TransformKind::Balance,
        TransformKind::Rewrite,
        TransformKind::RewriteZ,
        TransformKind::Refactor,
        TransformKind::RefactorZ,
        TransformKind::Resub,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Balance => "balance",
            TransformKind::Rewrite => "rewrite",
            TransformKind::RewriteZ => "rewrite-z",
            TransformKind::Refactor => "refactor",
            TransformKind::RefactorZ => "refactor-z",
            TransformKind::Resub => "resub",
        }
    }

    /// Variants that accept replacements of equal size.
    pub fn accepts_ties(self) -> bool {
        matches!(self, TransformKind::RewriteZ | TransformKind::RefactorZ)
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformKind {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "balance" | "b" => TransformKind::Balance,
            "rewrite" | "rw" => TransformKind::Rewrite,
            "rewrite-z" | "rewrite -z" | "rewritez" | "rwz" => TransformKind::RewriteZ,
            "refactor" | "rf" => TransformKind::Refactor,
            "refactor-z" | "refactor -z" | "refactorz" | "rfz" => TransformKind::RefactorZ,
            "resub" | "rs" => TransformKind::Resub,
            _ => return Err(FlowError::UnknownTransform(s.to_string())),
        })
    }
}

/// What one transform application did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformReport {
    pub kind: TransformKind,
    pub tnodes: usize,
    pub nodes_before: usize,
    pub nodes_after: usize,
    pub depth_before: u32,
    pub depth_after: u32,
}

/// Number of nodes `kind` would transform on `aig`. Does not modify `aig`.
pub fn count_transformable(aig: &Aig, kind: TransformKind) -> usize {
    run(aig, kind).tnodes
}

/// Apply one transform. The result is garbage-collected and functionally
/// equivalent to `aig`.
pub fn apply(aig: &Aig, kind: TransformKind) -> (Aig, TransformReport) {
    let Run {
        out,
        tnodes,
        before,
        after,
    } = run(aig, kind);
    let report = TransformReport {
        kind,
        tnodes,
        nodes_before: before.and_count,
        nodes_after: after.and_count,
        depth_before: before.depth,
        depth_after: after.depth,
    };
    (out, report)
}

/// Apply the steps of `flow` left to right.
pub fn apply_flow(aig: &Aig, flow: &Flow) -> (Aig, Vec<TransformReport>) {
    let mut cur = if aig.is_compact() { aig.clone() } else { aig.gc() };
    let mut reports = Vec::with_capacity(flow.len());
    // Kinds that found nothing to do on `cur`. Transforms are deterministic,
    // so repeating one of them before the graph changes is a no-op.
    let mut idle: Vec<TransformKind> = Vec::new();
    for &kind in &flow.steps {
        if idle.contains(&kind) {
            let q = cur.metrics();
            reports.push(TransformReport {
                kind,
                tnodes: 0,
                nodes_before: q.and_count,
                nodes_after: q.and_count,
                depth_before: q.depth,
                depth_after: q.depth,
            });
            continue;
        }
        let (next, rep) = apply(&cur, kind);
        if rep.tnodes == 0 {
            idle.push(kind);
        } else {
            idle.clear();
            cur = next;
        }
        reports.push(rep);
    }
    (cur, reports)
}

/// Runs flows from one fixed start graph, remembering the graphs reached
/// after short prefixes so flows that share their first steps share work.
/// Results equal [`apply_flow`] on the start graph.
pub struct FlowCache {
    start: Aig,
    depth: usize,
    memo: FxHashMap<Vec<TransformKind>, Aig>,
}

impl FlowCache {
    /// Prefixes of up to `depth` steps are remembered.
    pub fn new(start: &Aig, depth: usize) -> FlowCache {
        FlowCache {
            start: if start.is_compact() { start.clone() } else { start.gc() },
            depth,
            memo: FxHashMap::default(),
        }
    }

    pub fn start(&self) -> &Aig {
        &self.start
    }

    pub fn run(&mut self, flow: &Flow) -> Aig {
        let steps = &flow.steps;
        let mut k = steps.len().min(self.depth);
        while k > 0 && !self.memo.contains_key(&steps[..k]) {
            k -= 1;
        }
        let mut cur = if k == 0 { self.start.clone() } else { self.memo[&steps[..k]].clone() };
        while k < steps.len().min(self.depth) {
            cur = apply(&cur, steps[k]).0;
            k += 1;
            self.memo.insert(steps[..k].to_vec(), cur.clone());
        }
        apply_flow(&cur, &Flow::new(steps[k..].to_vec())).0
    }
}

struct Run {
    out: Aig,
    tnodes: usize,
    before: QoR,
    after: QoR,
}

fn run(aig: &Aig, kind: TransformKind) -> Run {
    let input = if aig.is_compact() { Cow::Borrowed(aig) } else { Cow::Owned(aig.gc()) };
    let before = input.metrics();
    let unchanged = |input: Cow<Aig>| Run {
        out: input.into_owned(),
        tnodes: 0,
        before,
        after: before,
    };
    let (out, tnodes) = match kind {
        TransformKind::Balance => balance::balance(&input),
        TransformKind::Rewrite => rewrite::rewrite(&input, false),
        TransformKind::RewriteZ => rewrite::rewrite(&input, true),
        TransformKind::Refactor => refactor::refactor(&input, false),
        TransformKind::RefactorZ => refactor::refactor(&input, true),
        TransformKind::Resub => resub::resub(&input),
    };
    if tnodes == 0 {
        return unchanged(input);
    }
    let out = out.gc();
    let after = out.metrics();
    // Hard guarantees: no kind grows the graph, balancing never deepens it.
    if after.and_count > before.and_count || (kind == TransformKind::Balance && after.depth > before.depth) {
        return unchanged(input);
    }
    Run {
        out,
        tnodes,
        before,
        after,
    }
}

/// A graph under construction that tracks node levels as it grows.
pub(crate) struct Builder {
    pub aig: Aig,
    levels: Vec<u32>,
}

impl Builder {
    /// Fresh graph with the same inputs as `src`.
    pub fn new(src: &Aig) -> Builder {
        let aig = src.with_same_inputs();
        let levels = vec![0; aig.num_nodes()];
        Builder { aig, levels }
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let l = self.aig.and(a, b);
        if l.index() >= self.levels.len() {
            let lv = self.levels[a.index()].max(self.levels[b.index()]) + 1;
            self.levels.push(lv);
        }
        l
    }

    pub fn lookup(&self, a: Lit, b: Lit) -> Option<Lit> {
        self.aig.lookup_and(a, b)
    }

    pub fn level(&self, l: Lit) -> u32 {
        self.levels[l.index()]
    }

    pub fn fanins(&self, l: Lit) -> Option<(Lit, Lit)> {
        self.aig.fanins(l.node())
    }

    pub fn checkpoint(&self) -> usize {
        self.aig.checkpoint()
    }

    pub fn rollback(&mut self, mark: usize) {
        self.aig.rollback(mark);
        self.levels.truncate(mark);
    }

    pub fn num_nodes(&self) -> usize {
        self.aig.num_nodes()
    }

    /// Finish with `src`'s outputs mapped through `map` (indexed by old node).
    pub fn finish(mut self, src: &Aig, map: &[Lit]) -> Aig {
        for (i, &o) in src.outputs().iter().enumerate() {
            let l = map[o.index()].xor(o.is_complemented());
            let name = src.output_names_vec()[i].clone();
            self.aig.add_named_output(l, name);
        }
        self.aig
    }
}

/// Old-to-new literal map seeded with the constant and the inputs.
pub(crate) fn initial_map(src: &Aig) -> Vec<Lit> {
    let mut map = vec![Lit::FALSE; src.num_nodes()];
    for (i, &id) in src.inputs().iter().enumerate() {
        // Builder::new adds inputs in the same order, so input i is node i + 1.
        map[id as usize] = Lit::new(i as u32 + 1, false);
    }
    map
}

#[inline]
pub(crate) fn map_lit(map: &[Lit], l: Lit) -> Lit {
    map[l.index()].xor(l.is_complemented())
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::aig::{equivalent, EquivMode};
    use TransformKind::*;

    #[test]
    fn kind_names_round_trip() {
        for k in TransformKind::ALL {
            assert_eq!(k.name().parse::<TransformKind>().unwrap(), k);
        }
        assert_eq!("rw".parse::<TransformKind>().unwrap(), Rewrite);
        assert_eq!("refactor -z".parse::<TransformKind>().unwrap(), RefactorZ);
        assert!("restructure".parse::<TransformKind>().is_err());
    }

    #[test]
    fn balance_chain() {
        let g = chain(7);
        assert!(count_transformable(&g, Balance) >= 1);
        let (h, rep) = apply(&g, Balance);
        assert_eq!(rep.depth_before, 7);
        assert_eq!(rep.depth_after, 3);
        assert_eq!(rep.nodes_after, 7);
        assert_eq!(rep.tnodes, count_transformable(&g, Balance));
        assert!(equivalent(&g, &h, EquivMode::Exhaustive).unwrap());
    }

    #[test]
    fn balanced_tree_has_no_work() {
        let g = balanced_tree(3);
        for k in TransformKind::ALL {
            assert_eq!(count_transformable(&g, k), 0, "{k}");
            let (h, rep) = apply(&g, k);
            assert_eq!(rep.tnodes, 0);
            assert_eq!(h, g);
        }
    }

    #[test]
    fn balance_twice_is_idempotent() {
        let flow = Flow::new(vec![Balance, Balance]);
        let (_, reps) = apply_flow(&chain(7), &flow);
        assert!(reps[0].tnodes >= 1);
        assert_eq!(reps[1].tnodes, 0);
    }

    #[test]
    fn rewrite_absorption() {
        let g = absorption();
        assert!(count_transformable(&g, Rewrite) >= 1);
        let (h, rep) = apply(&g, Rewrite);
        assert_eq!(rep.nodes_after, rep.nodes_before - 1);
        assert!(equivalent(&g, &h, EquivMode::Exhaustive).unwrap());
    }

    #[test]
    fn dangling_input_is_collected_first() {
        let mut g = chain(3);
        let a = g.input_lit(0);
        let b = g.input_lit(2);
        g.and(a, !b);
        let (h, rep) = apply(&g, Resub);
        assert_eq!(rep.tnodes, 0);
        assert!(h.is_compact());
        assert_eq!(h.num_ands(), 3);
    }
}
