//! Local algebraic rewriting.
//!
//! Rules, matched on the already rebuilt fanins of each node:
//!
//! - absorption: `a & (a & b) = a & b`, `a & !(!a & b) = a`
//! - contradiction: `a & (!a & b) = 0`, `(a & b) & (!a & c) = 0`
//! - substitution: `a & !(a & b) = a & !b`
//! - sharing: `(a & b) & (a & c) = a & (b & c)`
//! - (zero-gain only) reassociation: `a & (b & c) = c & (a & b)` when `c` is
//!   the deepest operand
//!
//! Double complements never survive the literal encoding, so they need no
//! rule of their own. A rewrite is taken when it frees strictly more nodes
//! than it creates; the zero-gain variant also takes equal trades that lower
//! the node's level.

use super::{initial_map, map_lit, Builder};
use crate::aig::{Aig, Lit};

/// A candidate replacement for one node.
enum Candidate {
    /// Replace by an existing literal.
    Existing(Lit),
    /// `AND(outer, AND(inner0, inner1))`.
    Nested { outer: Lit, inner: (Lit, Lit) },
    /// `AND(x, y)` built from scratch.
    Single(Lit, Lit),
}

pub(super) fn rewrite(g: &Aig, zero_gain: bool) -> (Aig, usize) {
    let old_refs = g.fanout_counts();
    let mut b = Builder::new(g);
    let mut map = initial_map(g);
    // References landing on each rebuilt node, estimated from the old graph.
    let mut refs: Vec<u32> = vec![0; b.num_nodes()];
    let mut tnodes = 0;

    for id in 0..g.num_nodes() as u32 {
        let Some((f0, f1)) = g.fanins(id) else { continue };
        let x = map_lit(&map, f0);
        let y = map_lit(&map, f1);
        let lit = match b.lookup(x, y) {
            Some(l) => l,
            None => match best_rule(&b, &refs, x, y, zero_gain) {
                Some(c) => {
                    tnodes += 1;
                    match c {
                        Candidate::Existing(l) => l,
                        Candidate::Nested { outer, inner } => {
                            let i = b.and(inner.0, inner.1);
                            b.and(outer, i)
                        }
                        Candidate::Single(p, q) => b.and(p, q),
                    }
                }
                None => b.and(x, y),
            },
        };
        refs.resize(b.num_nodes(), 0);
        if !lit.is_const() {
            refs[lit.index()] += old_refs[id as usize];
        }
        map[id as usize] = lit;
    }
    (b.finish(g, &map), tnodes)
}

/// Regular AND fanins of `l`, or `None` for inputs and constants.
fn and_fanins(b: &Builder, l: Lit) -> Option<(Lit, Lit)> {
    b.fanins(l)
}

fn freed(b: &Builder, refs: &[u32], l: Lit) -> u32 {
    u32::from(!l.is_const() && b.fanins(l).is_some() && refs[l.index()] <= 1)
}

/// New nodes needed for `AND(outer, AND(p, q))`.
fn nested_cost(b: &Builder, outer: Lit, p: Lit, q: Lit) -> (u32, Option<Lit>) {
    match b.lookup(p, q) {
        Some(inner) => match b.lookup(outer, inner) {
            Some(l) => (0, Some(l)),
            None => (1, None),
        },
        None => (2, None),
    }
}

fn best_rule(b: &Builder, refs: &[u32], x: Lit, y: Lit, zero_gain: bool) -> Option<Candidate> {
    let old_level = b.level(x).max(b.level(y)) + 1;

    // Single-level rules, trying both operand orders.
    for (p, q) in [(x, y), (y, x)] {
        let Some((q0, q1)) = and_fanins(b, q) else { continue };
        if !q.is_complemented() {
            if p == q0 || p == q1 {
                return Some(Candidate::Existing(q));
            }
            if p == !q0 || p == !q1 {
                return Some(Candidate::Existing(Lit::FALSE));
            }
        } else {
            if p == !q0 || p == !q1 {
                return Some(Candidate::Existing(p));
            }
            if p == q0 || p == q1 {
                let r = if p == q0 { q1 } else { q0 };
                let saved = 1 + freed(b, refs, q);
                let (added, existing) = match b.lookup(p, !r) {
                    Some(l) => (0, Some(l)),
                    None => (1, None),
                };
                let new_level = b.level(p).max(b.level(r)) + 1;
                if accept(saved, added, new_level, old_level, zero_gain) {
                    return Some(match existing {
                        Some(l) => Candidate::Existing(l),
                        None => Candidate::Single(p, !r),
                    });
                }
            }
        }
    }

    // Two-level rules over two regular AND fanins.
    if !x.is_complemented() && !y.is_complemented() {
        if let (Some((x0, x1)), Some((y0, y1))) = (and_fanins(b, x), and_fanins(b, y)) {
            if [x0, x1].iter().any(|&a| a == !y0 || a == !y1) {
                return Some(Candidate::Existing(Lit::FALSE));
            }
            for (s, xo) in [(x0, x1), (x1, x0)] {
                for (t, yo) in [(y0, y1), (y1, y0)] {
                    if s != t {
                        continue;
                    }
                    let saved = 1 + freed(b, refs, x) + freed(b, refs, y);
                    let (added, existing) = nested_cost(b, s, xo, yo);
                    let new_level = b.level(s).max(b.level(xo).max(b.level(yo)) + 1) + 1;
                    if accept(saved, added, new_level, old_level, zero_gain) {
                        return Some(match existing {
                            Some(l) => Candidate::Existing(l),
                            None => Candidate::Nested {
                                outer: s,
                                inner: (xo, yo),
                            },
                        });
                    }
                }
            }
        }
    }

    if zero_gain {
        for (p, q) in [(x, y), (y, x)] {
            if q.is_complemented() || freed(b, refs, q) == 0 {
                continue;
            }
            let Some((q0, q1)) = and_fanins(b, q) else { continue };
            let (deep, other) = if b.level(q0) >= b.level(q1) { (q0, q1) } else { (q1, q0) };
            if b.level(deep) <= b.level(p) {
                continue;
            }
            let (added, existing) = nested_cost(b, deep, p, other);
            let new_level = b.level(deep).max(b.level(p).max(b.level(other)) + 1) + 1;
            if accept(2, added, new_level, old_level, true) {
                return Some(match existing {
                    Some(l) => Candidate::Existing(l),
                    None => Candidate::Nested {
                        outer: deep,
                        inner: (p, other),
                    },
                });
            }
        }
    }
    None
}

fn accept(saved: u32, added: u32, new_level: u32, old_level: u32, zero_gain: bool) -> bool {
    added < saved || (zero_gain && added == saved && new_level < old_level)
}
