//! Bit-parallel simulation and simulation-based equivalence checking.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Aig, Lit, Node};
use crate::error::AigError;

/// Largest input count accepted by [`EquivMode::Exhaustive`].
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Words simulated per pass when a pattern set is longer than that.
const CHUNK_WORDS: usize = 64;

/// A fixed-width vector of bits; bit `i` is the value under pattern `i`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BitPattern {
    len: usize,
    words: Vec<u64>,
}

impl BitPattern {
    pub fn zeros(len: usize) -> BitPattern {
        BitPattern {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> BitPattern {
        let mut p = BitPattern::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            p.set(i, b);
        }
        p
    }

    /// Build from raw words; bits past `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> BitPattern {
        words.resize(len.div_ceil(64), 0);
        let mut p = BitPattern { len, words };
        p.clear_tail();
        p
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len);
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn concat(&self, other: &BitPattern) -> BitPattern {
        let mut out = BitPattern::zeros(self.len + other.len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        for i in 0..other.len {
            out.set(self.len + i, other.get(i));
        }
        out
    }

    fn clear_tail(&mut self) {
        if !self.len.is_multiple_of(64) {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << (self.len % 64)) - 1;
            }
        }
    }
}

impl FromStr for BitPattern {
    type Err = String;

    /// Character `i` of the string is bit `i`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BitPattern::from_bools(&bits))
    }
}

impl fmt::Display for BitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitPattern({self})")
    }
}

/// How [`equivalent`] picks its input patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivMode {
    /// All `2^n` assignments; refused above [`EXHAUSTIVE_LIMIT`] inputs.
    Exhaustive,
    /// `count` seeded pseudo-random assignments.
    Random { count: usize, seed: u64 },
}

/// Word `word` of input `input` when enumerating all assignments in order.
#[inline]
pub(crate) fn exhaustive_word(input: usize, word: usize) -> u64 {
    const MASKS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    if input < 6 {
        MASKS[input]
    } else if (word >> (input - 6)) & 1 == 1 {
        !0
    } else {
        0
    }
}

impl Aig {
    /// Simulate every node over `nwords` words of patterns. `fill` writes
    /// the words of input `i`. The result is node-major: node `n` owns
    /// `[n * nwords, (n + 1) * nwords)`.
    pub(crate) fn simulate_nodes<F>(&self, nwords: usize, mut fill: F) -> Vec<u64>
    where
        F: FnMut(usize, &mut [u64]),
    {
        let mut vals = vec![0u64; self.nodes.len() * nwords];
        for (i, n) in self.nodes.iter().enumerate() {
            match *n {
                Node::Const => {}
                Node::Input(pos) => fill(pos as usize, &mut vals[i * nwords..(i + 1) * nwords]),
                Node::And(a, b) => {
                    let (lo, hi) = vals.split_at_mut(i * nwords);
                    let dst = &mut hi[..nwords];
                    let ma = if a.is_complemented() { !0 } else { 0 };
                    let mb = if b.is_complemented() { !0 } else { 0 };
                    let sa = &lo[a.index() * nwords..(a.index() + 1) * nwords];
                    let sb = &lo[b.index() * nwords..(b.index() + 1) * nwords];
                    for w in 0..nwords {
                        dst[w] = (sa[w] ^ ma) & (sb[w] ^ mb);
                    }
                }
            }
        }
        vals
    }

    /// Bitwise evaluation of every output over the given input patterns.
    pub fn simulate(&self, patterns: &[BitPattern]) -> Result<Vec<BitPattern>, AigError> {
        if patterns.len() != self.num_inputs() {
            return Err(AigError::PatternCount {
                expected: self.num_inputs(),
                got: patterns.len(),
            });
        }
        let width = patterns.first().map_or(0, BitPattern::len);
        if let Some(p) = patterns.iter().find(|p| p.len() != width) {
            return Err(AigError::WidthMismatch {
                expected: width,
                got: p.len(),
            });
        }
        let nwords = width.div_ceil(64);
        let vals = self.simulate_nodes(nwords, |i, dst| dst.copy_from_slice(&patterns[i].words));
        Ok(self
            .outputs
            .iter()
            .map(|&o| BitPattern::from_words(width, lit_words(&vals, o, nwords)))
            .collect())
    }
}

/// Words of `lit` from a [`Aig::simulate_nodes`] result.
pub(crate) fn lit_words(vals: &[u64], lit: Lit, nwords: usize) -> Vec<u64> {
    let m = if lit.is_complemented() { !0 } else { 0 };
    vals[lit.index() * nwords..(lit.index() + 1) * nwords]
        .iter()
        .map(|w| w ^ m)
        .collect()
}

fn outputs_agree(a: &Aig, va: &[u64], b: &Aig, vb: &[u64], nwords: usize, mask_last: u64) -> bool {
    a.outputs.iter().zip(&b.outputs).all(|(&oa, &ob)| {
        let ma = if oa.is_complemented() { !0 } else { 0 };
        let mb = if ob.is_complemented() { !0 } else { 0 };
        let sa = &va[oa.index() * nwords..(oa.index() + 1) * nwords];
        let sb = &vb[ob.index() * nwords..(ob.index() + 1) * nwords];
        (0..nwords).all(|w| {
            let mask = if w + 1 == nwords { mask_last } else { !0 };
            ((sa[w] ^ ma) ^ (sb[w] ^ mb)) & mask == 0
        })
    })
}

/// Simulation-based equivalence of two graphs with matching I/O arity.
pub fn equivalent(a: &Aig, b: &Aig, mode: EquivMode) -> Result<bool, AigError> {
    if a.num_inputs() != b.num_inputs() || a.num_outputs() != b.num_outputs() {
        return Err(AigError::ArityMismatch {
            left: (a.num_inputs(), a.num_outputs()),
            right: (b.num_inputs(), b.num_outputs()),
        });
    }
    let n = a.num_inputs();
    match mode {
        EquivMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(AigError::ExhaustiveLimit {
                    inputs: n,
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let total_bits = 1usize << n;
            let total_words = total_bits.div_ceil(64);
            let mut start = 0;
            while start < total_words {
                let nwords = CHUNK_WORDS.min(total_words - start);
                let fill = |i: usize, dst: &mut [u64]| {
                    for (w, d) in dst.iter_mut().enumerate() {
                        *d = exhaustive_word(i, start + w);
                    }
                };
                let va = a.simulate_nodes(nwords, fill);
                let vb = b.simulate_nodes(nwords, fill);
                let mask = if total_bits < 64 { (1u64 << total_bits) - 1 } else { !0 };
                if !outputs_agree(a, &va, b, &vb, nwords, mask) {
                    return Ok(false);
                }
                start += nwords;
            }
            Ok(true)
        }
        EquivMode::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let total_words = count.div_ceil(64);
            let mut start = 0;
            while start < total_words {
                let nwords = CHUNK_WORDS.min(total_words - start);
                let mut inputs = vec![0u64; n * nwords];
                inputs.iter_mut().for_each(|w| *w = rng.next_u64());
                let fill = |i: usize, dst: &mut [u64]| {
                    dst.copy_from_slice(&inputs[i * nwords..(i + 1) * nwords])
                };
                let va = a.simulate_nodes(nwords, fill);
                let vb = b.simulate_nodes(nwords, fill);
                let last = start + nwords == total_words && count % 64 != 0;
                let mask = if last { (1u64 << (count % 64)) - 1 } else { !0 };
                if !outputs_agree(a, &va, b, &vb, nwords, mask) {
                    return Ok(false);
                }
                start += nwords;
            }
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(s: &str) -> BitPattern {
        s.parse().unwrap()
    }

    #[test]
    fn and_truth_table() {
        let mut g = Aig::new();
        let a = g.add_input();
        let b = g.add_input();
        let n = g.and(a, b);
        g.add_output(n);
        let out = g.simulate(&[pat("0101"), pat("0011")]).unwrap();
        assert_eq!(out[0], pat("0001"));
    }

    #[test]
    fn complemented_output() {
        let mut g = Aig::new();
        let a = g.add_input();
        g.add_output(!a);
        let out = g.simulate(&[pat("0101")]).unwrap();
        assert_eq!(out[0].to_string(), "1010");
    }

    #[test]
    fn empty_width() {
        let mut g = Aig::new();
        let a = g.add_input();
        let b = g.add_input();
        let n = g.and(a, b);
        g.add_output(n);
        let out = g.simulate(&[BitPattern::zeros(0), BitPattern::zeros(0)]).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].is_empty());
    }

    #[test]
    fn width_mismatch() {
        let mut g = Aig::new();
        g.add_input();
        g.add_input();
        let err = g.simulate(&[pat("01"), pat("011")]).unwrap_err();
        assert!(matches!(err, AigError::WidthMismatch { .. }));
        assert!(g.simulate(&[pat("01")]).is_err());
    }

    fn two_input(or: bool, swap: bool) -> Aig {
        let mut g = Aig::new();
        let a = g.add_input();
        let b = g.add_input();
        let (x, y) = if swap { (b, a) } else { (a, b) };
        let n = if or { g.or(x, y) } else { g.and(x, y) };
        g.add_output(n);
        g
    }

    #[test]
    fn equivalence_basics() {
        let and = two_input(false, false);
        assert!(equivalent(&and, &and, EquivMode::Exhaustive).unwrap());
        assert!(equivalent(&and, &two_input(false, true), EquivMode::Exhaustive).unwrap());
        assert!(!equivalent(&and, &two_input(true, false), EquivMode::Exhaustive).unwrap());
        let rnd = EquivMode::Random { count: 100, seed: 3 };
        assert!(!equivalent(&and, &two_input(true, false), rnd).unwrap());
    }

    #[test]
    fn exhaustive_refused_above_limit() {
        let mut g = Aig::new();
        for _ in 0..17 {
            g.add_input();
        }
        assert!(matches!(
            equivalent(&g, &g, EquivMode::Exhaustive),
            Err(AigError::ExhaustiveLimit { inputs: 17, .. })
        ));
        assert!(equivalent(&g, &g, EquivMode::Random { count: 4096, seed: 1 }).unwrap());
    }

    #[test]
    fn arity_mismatch() {
        let a = two_input(false, false);
        let mut b = Aig::new();
        b.add_input();
        assert!(equivalent(&a, &b, EquivMode::Exhaustive).is_err());
    }

    #[test]
    fn exhaustive_detects_single_minterm_difference() {
        // AND of 16 inputs vs constant false differs on exactly one of 65536 rows.
        let mut g = Aig::new();
        let ins: Vec<Lit> = (0..16).map(|_| g.add_input()).collect();
        let mut acc = Lit::TRUE;
        for &x in &ins {
            acc = g.and(acc, x);
        }
        g.add_output(acc);
        let mut z = Aig::new();
        for _ in 0..16 {
            z.add_input();
        }
        z.add_output(Lit::FALSE);
        assert!(!equivalent(&g, &z, EquivMode::Exhaustive).unwrap());
    }
}
