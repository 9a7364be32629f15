//! Merging of functionally equivalent nodes.
//!
//! Nodes are visited by increasing level. Each node's 1024-pattern random
//! signature (normalized for complementation) selects candidate
//! representatives seen earlier; a candidate is accepted only after an
//! exhaustive comparison over the union of both structural supports, which
//! must not exceed sixteen inputs. Merging into a node of lower-or-equal
//! level can never create a cycle.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hash::Hasher;

use rustc_hash::{FxHashMap, FxHasher};

use super::{map_lit, Builder};
use crate::aig::sim::exhaustive_word;
use crate::aig::{Aig, Lit, Node, EXHAUSTIVE_LIMIT};

const SIG_WORDS: usize = 16;
const SIG_SEED: u64 = 0x005e_ed0f_5e5b;

pub(super) fn resub(g: &Aig) -> (Aig, usize) {
    let levels = g.levels();
    let mut rng = ChaCha8Rng::seed_from_u64(SIG_SEED);
    let mut pats = vec![0u64; g.num_inputs() * SIG_WORDS];
    pats.iter_mut().for_each(|w| *w = rng.next_u64());
    let sims = g.simulate_nodes(SIG_WORDS, |i, dst| {
        dst.copy_from_slice(&pats[i * SIG_WORDS..(i + 1) * SIG_WORDS])
    });
    let sig = |n: u32| &sims[n as usize * SIG_WORDS..(n as usize + 1) * SIG_WORDS];

    let mut order: Vec<u32> = (0..g.num_nodes() as u32).collect();
    order.sort_unstable_by_key(|&n| (levels[n as usize], n));

    // Hash of the normalized signature -> representatives, in visiting order.
    let mut classes: FxHashMap<u64, Vec<u32>> = FxHashMap::default();
    let mut merged: Vec<Option<Lit>> = vec![None; g.num_nodes()];
    let supp = Supports::new(g);
    let mut checker = Checker::new(g);
    let mut tnodes = 0;
    let phase_of = |n: u32| sig(n)[0] & 1 == 1;
    let same_sig = |a: u32, b: u32| {
        let flip = if phase_of(a) != phase_of(b) { !0 } else { 0 };
        sig(a).iter().zip(sig(b)).all(|(x, y)| x ^ y == flip)
    };

    for &n in &order {
        // Nothing with a wider support can ever be verified.
        if supp.size(n) > EXHAUSTIVE_LIMIT {
            continue;
        }
        let phase = phase_of(n);
        let mut h = FxHasher::default();
        for &w in sig(n) {
            h.write_u64(if phase { !w } else { w });
        }
        let reps = classes.entry(h.finish()).or_default();
        if g.is_and(n) {
            let hit = reps.iter().copied().find(|&c| {
                same_sig(c, n)
                    && supp.union_size(c, n) <= EXHAUSTIVE_LIMIT
                    && checker.same(c, n, phase != phase_of(c)) == Some(true)
            });
            if let Some(c) = hit {
                merged[n as usize] = Some(Lit::new(c, phase != phase_of(c)));
                tnodes += 1;
                continue;
            }
        }
        reps.push(n);
    }

    if tnodes == 0 {
        return (g.clone(), 0);
    }
    let mut b = Builder::new(g);
    let mut map = super::initial_map(g);
    for &n in &order {
        if !g.is_and(n) {
            continue;
        }
        map[n as usize] = match merged[n as usize] {
            Some(rep) => map_lit(&map, rep),
            None => {
                let (x, y) = g.fanins(n).unwrap();
                b.and(map_lit(&map, x), map_lit(&map, y))
            }
        };
    }
    (b.finish(g, &map), tnodes)
}

/// Structural input support of every node as a bitset.
struct Supports {
    words: usize,
    bits: Vec<u64>,
}

impl Supports {
    fn new(g: &Aig) -> Supports {
        let words = g.num_inputs().div_ceil(64).max(1);
        let mut bits = vec![0u64; g.num_nodes() * words];
        for n in 0..g.num_nodes() {
            match g.node(n as u32) {
                Node::Const => {}
                Node::Input(i) => bits[n * words + i as usize / 64] |= 1 << (i % 64),
                Node::And(x, y) => {
                    let (lo, hi) = bits.split_at_mut(n * words);
                    for w in 0..words {
                        hi[w] = lo[x.index() * words + w] | lo[y.index() * words + w];
                    }
                }
            }
        }
        Supports { words, bits }
    }

    fn size(&self, a: u32) -> usize {
        let a = a as usize * self.words;
        self.bits[a..a + self.words].iter().map(|w| w.count_ones() as usize).sum()
    }

    fn union_size(&self, a: u32, b: u32) -> usize {
        let (a, b) = (a as usize * self.words, b as usize * self.words);
        (0..self.words)
            .map(|w| (self.bits[a + w] | self.bits[b + w]).count_ones() as usize)
            .sum()
    }
}

/// Exhaustive comparison of two nodes over their joint structural support.
struct Checker<'a> {
    g: &'a Aig,
    stamp: Vec<u32>,
    slot: Vec<u32>,
    epoch: u32,
}

impl<'a> Checker<'a> {
    fn new(g: &'a Aig) -> Checker<'a> {
        Checker {
            g,
            stamp: vec![0; g.num_nodes()],
            slot: vec![0; g.num_nodes()],
            epoch: 0,
        }
    }

    /// `Some(eq)` when the support fits, `None` when the pair is skipped.
    fn same(&mut self, a: u32, b: u32, complemented: bool) -> Option<bool> {
        self.epoch += 1;
        let mut cone = Vec::new();
        let mut stack = vec![a, b];
        while let Some(n) = stack.pop() {
            if self.stamp[n as usize] == self.epoch {
                continue;
            }
            self.stamp[n as usize] = self.epoch;
            cone.push(n);
            if let Some((x, y)) = self.g.fanins(n) {
                stack.push(x.node());
                stack.push(y.node());
            }
        }
        cone.sort_unstable();
        let support = cone
            .iter()
            .filter(|&&n| matches!(self.g.node(n), Node::Input(_)))
            .count();
        if support > EXHAUSTIVE_LIMIT {
            return None;
        }
        let nwords = (1usize << support).div_ceil(64);
        let mut vals = vec![0u64; cone.len() * nwords];
        let mut next_input = 0;
        for (i, &n) in cone.iter().enumerate() {
            self.slot[n as usize] = i as u32;
            let (lo, hi) = vals.split_at_mut(i * nwords);
            let dst = &mut hi[..nwords];
            match self.g.node(n) {
                Node::Const => {}
                Node::Input(_) => {
                    for (w, d) in dst.iter_mut().enumerate() {
                        *d = exhaustive_word(next_input, w);
                    }
                    next_input += 1;
                }
                Node::And(x, y) => {
                    let sx = self.slot[x.index()] as usize * nwords;
                    let sy = self.slot[y.index()] as usize * nwords;
                    let mx = if x.is_complemented() { !0 } else { 0 };
                    let my = if y.is_complemented() { !0 } else { 0 };
                    for w in 0..nwords {
                        dst[w] = (lo[sx + w] ^ mx) & (lo[sy + w] ^ my);
                    }
                }
            }
        }
        let sa = self.slot[a as usize] as usize * nwords;
        let sb = self.slot[b as usize] as usize * nwords;
        let flip = if complemented { !0 } else { 0 };
        let mask = if support < 6 { (1u64 << (1 << support)) - 1 } else { !0 };
        Some((0..nwords).all(|w| (vals[sa + w] ^ vals[sb + w] ^ flip) & mask == 0))
    }
}
