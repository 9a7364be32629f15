//! Seeded random benchmark circuits with injected redundancy.
//!
//! The circuit grows by appending small motifs. Fanins are drawn from
//! signals nobody uses yet, from a window of recent signals, or from the
//! whole pool, which gives moderate depth and reconvergence. Besides plain gates, the mix
//! includes unbalanced chains, absorbable and substitutable pairs,
//! distributive sums, shared conjunctions and functionally duplicated
//! subcircuits, so every transform kind has something to do.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aig::{Aig, Lit};

const WINDOW: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenSpec {
    pub num_inputs: usize,
    pub num_ands: usize,
    pub num_outputs: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSpecError(&'static str);

impl fmt::Display for GenSpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl std::error::Error for GenSpecError {}

impl GenSpec {
    pub fn new(num_inputs: usize, num_ands: usize, num_outputs: usize, seed: u64) -> Result<GenSpec, GenSpecError> {
        let s = GenSpec {
            num_inputs,
            num_ands,
            num_outputs,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), GenSpecError> {
        if self.num_inputs == 0 {
            return Err(GenSpecError("num_inputs must be at least 1"));
        }
        if self.num_outputs == 0 {
            return Err(GenSpecError("num_outputs must be at least 1"));
        }
        Ok(())
    }
}

struct Gen {
    g: Aig,
    rng: ChaCha8Rng,
    pool: Vec<Lit>,
    in_pool: Vec<bool>,
    level: Vec<u32>,
    /// Values under 256 random patterns, to keep signals away from constants.
    sim: Vec<[u64; 4]>,
    /// Signals deeper than this are not picked as fanins.
    max_level: u32,
    /// Pool indices of AND signals nobody uses yet, with each one's slot.
    fresh: Vec<usize>,
    fresh_slot: Vec<usize>,
    num_inputs: usize,
}

impl Gen {
    fn grow(&mut self) {
        let n = self.g.num_nodes();
        for id in self.level.len()..n {
            let (lv, sim) = match self.g.fanins(id as u32) {
                Some((a, b)) => {
                    let (sa, sb) = (self.lit_sim(a), self.lit_sim(b));
                    let lv = self.level[a.index()].max(self.level[b.index()]) + 1;
                    (lv, std::array::from_fn(|w| sa[w] & sb[w]))
                }
                None if id == 0 => (0, [0; 4]),
                None => (0, std::array::from_fn(|_| self.rng.gen())),
            };
            self.level.push(lv);
            self.sim.push(sim);
            self.in_pool.push(false);
        }
    }

    fn push(&mut self, l: Lit) {
        self.grow();
        let id = l.index();
        if l.is_const() || self.in_pool[id] {
            return;
        }
        self.in_pool[id] = true;
        self.pool.push(l.regular());
        self.fresh_slot.push(usize::MAX);
        if self.g.is_and(l.node()) {
            let i = self.pool.len() - 1;
            self.fresh_slot[i] = self.fresh.len();
            self.fresh.push(i);
        }
    }

    fn lit_sim(&self, l: Lit) -> [u64; 4] {
        let s = self.sim[l.index()];
        if l.is_complemented() {
            s.map(|w| !w)
        } else {
            s
        }
    }

    fn ones(&self, l: Lit) -> u32 {
        self.lit_sim(l).iter().map(|w| w.count_ones()).sum()
    }

    fn mark_used(&mut self, i: usize) {
        let slot = self.fresh_slot[i];
        if slot != usize::MAX {
            let last = *self.fresh.last().unwrap();
            self.fresh.swap_remove(slot);
            if last != i {
                self.fresh_slot[last] = slot;
            }
            self.fresh_slot[i] = usize::MAX;
        }
    }

    fn usable(&self, idx: usize) -> bool {
        let l = self.pool[idx];
        let ones = self.ones(l);
        self.level[l.index()] <= self.max_level && (8..=248).contains(&ones)
    }

    fn pick(&mut self) -> Lit {
        let len = self.pool.len();
        let mut idx = 0;
        for _ in 0..8 {
            let roll = self.rng.gen_range(0..100);
            idx = if roll < 55 && !self.fresh.is_empty() {
                self.fresh[self.rng.gen_range(0..self.fresh.len())]
            } else if roll < 80 {
                self.rng.gen_range(len.saturating_sub(WINDOW)..len)
            } else {
                self.rng.gen_range(0..len)
            };
            if self.usable(idx) {
                break;
            }
        }
        if !self.usable(idx) {
            idx = self.rng.gen_range(0..self.num_inputs);
        }
        self.mark_used(idx);
        // Mostly take the polarity that is true more often, so conjunctions
        // do not drift towards constant zero.
        let l = self.pool[idx];
        let likely = if self.ones(l) >= 128 { l } else { !l };
        if self.rng.gen_bool(0.8) {
            likely
        } else {
            !likely
        }
    }

    /// Up to `k` picks over distinct nodes (fewer retries on tiny pools).
    fn pick_distinct<const K: usize>(&mut self) -> [Lit; K] {
        let mut out = [Lit::FALSE; K];
        for i in 0..K {
            let mut l = self.pick();
            for _ in 0..4 {
                if !out[..i].iter().any(|o| o.node() == l.node()) {
                    break;
                }
                l = self.pick();
            }
            out[i] = l;
        }
        out
    }

    fn motif(&mut self) {
        let g_roll = self.rng.gen_range(0..100);
        match g_roll {
            0..=29 => {
                let [a, b] = self.pick_distinct();
                let x = self.g.and(a, b);
                self.push(x);
            }
            30..=39 => {
                // Unbalanced chain over regular internal edges.
                let k = self.rng.gen_range(3..=6);
                let mut x = self.pick();
                for _ in 0..k {
                    let y = self.pick();
                    x = self.g.and(x, y);
                }
                self.push(x);
            }
            40..=53 => {
                // a & (a & b)
                let [a, b] = self.pick_distinct();
                let m = self.g.and(a, b);
                let x = self.g.and(a, m);
                self.push(x);
            }
            54..=61 => {
                // a & !(a & b)
                let [a, b] = self.pick_distinct();
                let m = self.g.and(a, b);
                let x = self.g.and(a, !m);
                self.push(x);
            }
            62..=71 => {
                // (a & b) | (a & c)
                let [a, b, c] = self.pick_distinct();
                let p = self.g.and(a, b);
                let q = self.g.and(a, c);
                let x = self.g.or(p, q);
                self.push(x);
            }
            72..=79 => {
                // (a & b) & (a & c)
                let [a, b, c] = self.pick_distinct();
                let p = self.g.and(a, b);
                let q = self.g.and(a, c);
                let x = self.g.and(p, q);
                self.push(x);
            }
            80..=89 => {
                // The same function built twice with different structure.
                let [a, b, c] = self.pick_distinct();
                if self.rng.gen_bool(0.5) {
                    let ab = self.g.and(a, b);
                    let x = self.g.and(ab, c);
                    let bc = self.g.and(b, c);
                    let y = self.g.and(a, bc);
                    self.push(x);
                    self.push(y);
                } else {
                    let bc = self.g.or(b, c);
                    let x = self.g.and(a, bc);
                    let p = self.g.and(a, b);
                    let q = self.g.and(a, c);
                    let y = self.g.or(p, q);
                    self.push(x);
                    self.push(y);
                }
            }
            _ => {
                let [s, a, b] = self.pick_distinct();
                let x = if self.rng.gen_bool(0.5) {
                    self.g.xor(a, b)
                } else {
                    self.g.mux(s, a, b)
                };
                self.push(x);
            }
        }
    }
}

/// Build a circuit for `spec`. Equal specs give equal circuits.
///
/// # Panics
/// If `spec` fails [`GenSpec::validate`].
pub fn gen_random(spec: &GenSpec) -> Aig {
    spec.validate().expect("invalid GenSpec");
    let mut gen = Gen {
        g: Aig::new(),
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        pool: Vec::new(),
        in_pool: Vec::new(),
        level: Vec::new(),
        sim: Vec::new(),
        max_level: 6 * (usize::BITS - spec.num_ands.leading_zeros()).max(2),
        fresh: Vec::new(),
        fresh_slot: Vec::new(),
        num_inputs: spec.num_inputs,
    };
    let inputs: Vec<Lit> = (0..spec.num_inputs).map(|_| gen.g.add_input()).collect();
    for &i in &inputs {
        gen.push(i);
    }
    if spec.num_ands == 0 {
        for o in 0..spec.num_outputs {
            gen.g.add_output(inputs[o % inputs.len()]);
        }
        return gen.g;
    }

    while gen.g.num_ands() + gen.fresh.len().saturating_sub(spec.num_outputs) < spec.num_ands {
        gen.motif();
    }

    // Fold unused signals into the requested number of outputs.
    let mut fresh = std::mem::take(&mut gen.fresh);
    fresh.sort_unstable();
    let mut sinks: std::collections::VecDeque<Lit> = fresh.into_iter().map(|i| gen.pool[i]).collect();
    while sinks.len() > spec.num_outputs {
        let a = sinks.pop_front().unwrap();
        let b = sinks.pop_front().unwrap();
        let likely = |gen: &Gen, l: Lit| if gen.ones(l) >= 128 { l } else { !l };
        let x = gen.g.and(likely(&gen, a), likely(&gen, b));
        gen.grow();
        sinks.push_back(x.xor(gen.rng.gen_bool(0.5)));
    }
    let mut outs: Vec<Lit> = sinks.into_iter().collect();
    while outs.len() < spec.num_outputs {
        let l = gen.pool[gen.pool.len() - 1 - (outs.len() % gen.pool.len())];
        outs.push(l);
    }
    for (k, o) in outs.into_iter().enumerate() {
        let o = if o.is_const() { inputs[k % inputs.len()] } else { o };
        gen.g.add_output(o);
    }
    gen.g.gc()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_aiger;
    use crate::transforms::{count_transformable, TransformKind};

    #[test]
    fn deterministic() {
        let s = GenSpec::new(10, 300, 4, 42).unwrap();
        assert_eq!(write_aiger(&gen_random(&s)), write_aiger(&gen_random(&s)));
        let t = GenSpec { seed: 43, ..s };
        assert_ne!(write_aiger(&gen_random(&s)), write_aiger(&gen_random(&t)));
    }

    #[test]
    fn zero_ands_gives_input_outputs() {
        let g = gen_random(&GenSpec::new(3, 0, 5, 1).unwrap());
        assert_eq!(g.num_ands(), 0);
        assert!(g.outputs().iter().all(|o| !o.is_const() && !g.is_and(o.node())));
    }

    #[test]
    fn size_is_near_target() {
        for (n, seed) in [(50, 1), (500, 2), (3000, 3)] {
            let g = gen_random(&GenSpec::new(16, n, 8, seed).unwrap());
            let got = g.metrics().and_count as f64;
            assert!((got - n as f64).abs() <= 0.2 * n as f64, "target {n}, got {got}");
            assert_eq!(g.num_outputs(), 8);
        }
    }

    #[test]
    fn rewrite_finds_work() {
        let g = gen_random(&GenSpec::new(8, 500, 4, 7).unwrap());
        assert!(count_transformable(&g, TransformKind::Rewrite) > 0);
    }

    #[test]
    fn invalid_specs() {
        assert!(GenSpec::new(0, 10, 1, 0).is_err());
        assert!(GenSpec::new(1, 10, 0, 0).is_err());
    }
}
