//! Fanout-free cone refactoring.
//!
//! Each AND node with a single fanout belongs to the cone of the node it
//! feeds; every other AND node roots a cone. Cones with at least two nodes
//! and at most eight leaves are collapsed to a truth table and resynthesized
//! by Shannon decomposition. The variable split at each step is picked
//! greedily: splits with a constant cofactor (one AND) come first, then
//! complementary cofactors (one XOR), then the split whose cofactors have the
//! most balanced onset sizes. Lowest variable index breaks ties.

use rustc_hash::FxHashMap;

use super::truth::{Tt, MAX_VARS};
use super::{initial_map, map_lit, Builder};
use crate::aig::{Aig, Lit};

pub(super) fn refactor(g: &Aig, zero_gain: bool) -> (Aig, usize) {
    let refs = g.fanout_counts();
    let mut internal = vec![false; g.num_nodes()];
    for id in 0..g.num_nodes() as u32 {
        if let Some((a, b)) = g.fanins(id) {
            for f in [a, b] {
                if g.is_and(f.node()) && refs[f.index()] == 1 {
                    internal[f.index()] = true;
                }
            }
        }
    }

    let mut b = Builder::new(g);
    let mut map = initial_map(g);
    let mut tnodes = 0;
    let mut cone = Vec::new();
    let mut leaves = Vec::new();
    let mut stack = Vec::new();
    let mut val = vec![Tt::ZERO; g.num_nodes()];

    for root in 0..g.num_nodes() as u32 {
        if !g.is_and(root) || internal[root as usize] {
            continue;
        }
        collect_cone(g, &internal, root, &mut cone, &mut leaves, &mut stack);

        let start = b.checkpoint();
        for &n in &cone {
            let (x, y) = g.fanins(n).unwrap();
            map[n as usize] = b.and(map_lit(&map, x), map_lit(&map, y));
        }
        if cone.len() < 2 || leaves.len() > MAX_VARS {
            continue;
        }
        let copy = map[root as usize];
        let copy_cost = b.num_nodes() - start;
        let copy_level = b.level(copy);

        let func = cone_function(g, &cone, &leaves, &mut val);
        let leaf_lits: Vec<Lit> = leaves.iter().map(|&l| map[l as usize]).collect();

        // Synthesize on top of the copy: landing on the copy's own literal
        // means the structure is unchanged.
        let mid = b.checkpoint();
        let syn = Synth::new(&leaf_lits).build(&mut b, func);
        if syn == copy {
            b.rollback(mid);
            continue;
        }
        let syn_cost = count_new(&b, syn, start);
        let syn_level = if syn.is_const() { 0 } else { b.level(syn) };
        let better = syn_cost < copy_cost
            || (zero_gain && syn_cost == copy_cost && syn_level <= copy_level);
        if better {
            b.rollback(start);
            let lit = Synth::new(&leaf_lits).build(&mut b, func);
            map[root as usize] = lit;
            tnodes += 1;
        } else {
            b.rollback(mid);
        }
    }
    (b.finish(g, &map), tnodes)
}

/// Internal nodes of the cone rooted at `root` in ascending (topological)
/// order, and its leaves in ascending order.
fn collect_cone(
    g: &Aig,
    internal: &[bool],
    root: u32,
    cone: &mut Vec<u32>,
    leaves: &mut Vec<u32>,
    stack: &mut Vec<u32>,
) {
    cone.clear();
    leaves.clear();
    stack.clear();
    stack.push(root);
    while let Some(n) = stack.pop() {
        cone.push(n);
        let (x, y) = g.fanins(n).unwrap();
        for f in [x, y] {
            if internal[f.index()] {
                stack.push(f.node());
            } else {
                leaves.push(f.node());
            }
        }
    }
    cone.sort_unstable();
    cone.dedup();
    leaves.sort_unstable();
    leaves.dedup();
}

/// Function of `cone` over `leaves`. `val` is scratch indexed by node id.
fn cone_function(g: &Aig, cone: &[u32], leaves: &[u32], val: &mut [Tt]) -> Tt {
    for (i, &l) in leaves.iter().enumerate() {
        val[l as usize] = if l == 0 { Tt::ZERO } else { Tt::var(i) };
    }
    let get = |val: &[Tt], f: Lit| {
        let t = val[f.index()];
        if f.is_complemented() {
            !t
        } else {
            t
        }
    };
    for &n in cone {
        let (x, y) = g.fanins(n).unwrap();
        val[n as usize] = get(val, x) & get(val, y);
    }
    val[*cone.last().unwrap() as usize]
}

/// Nodes at or above `since` in the cone of `l`.
fn count_new(b: &Builder, l: Lit, since: usize) -> usize {
    let mut seen: Vec<u32> = Vec::new();
    let mut stack = vec![l.node()];
    while let Some(n) = stack.pop() {
        if (n as usize) < since || seen.contains(&n) {
            continue;
        }
        seen.push(n);
        if let Some((x, y)) = b.aig.fanins(n) {
            stack.push(x.node());
            stack.push(y.node());
        }
    }
    seen.len()
}

struct Synth<'a> {
    leaves: &'a [Lit],
    memo: FxHashMap<Tt, Lit>,
}

impl<'a> Synth<'a> {
    fn new(leaves: &'a [Lit]) -> Synth<'a> {
        Synth {
            leaves,
            memo: FxHashMap::default(),
        }
    }

    fn build(&mut self, b: &mut Builder, f: Tt) -> Lit {
        if f == Tt::ZERO {
            return Lit::FALSE;
        }
        if f == Tt::ONES {
            return Lit::TRUE;
        }
        // Synthesize the phase that is false on the all-zero row, so a
        // function and its complement share one structure.
        if f.0[0] & 1 == 1 {
            return !self.build(b, !f);
        }
        if let Some(&l) = self.memo.get(&f) {
            return l;
        }
        let v = pick_split(f, self.leaves.len());
        let x = self.leaves[v];
        let f0 = f.cofactor(v, false);
        let f1 = f.cofactor(v, true);
        let lit = if f0 == Tt::ZERO {
            let h = self.build(b, f1);
            b.and(x, h)
        } else if f1 == Tt::ZERO {
            let h = self.build(b, f0);
            b.and(!x, h)
        } else if f0 == Tt::ONES {
            let h = self.build(b, f1);
            !b.and(x, !h)
        } else if f1 == Tt::ONES {
            let h = self.build(b, f0);
            !b.and(!x, !h)
        } else if f0 == !f1 {
            let h = self.build(b, f0);
            let p = b.and(x, !h);
            let q = b.and(!x, h);
            !b.and(!p, !q)
        } else {
            let h1 = self.build(b, f1);
            let h0 = self.build(b, f0);
            let p = b.and(x, h1);
            let q = b.and(!x, h0);
            !b.and(!p, !q)
        };
        self.memo.insert(f, lit);
        lit
    }
}

fn pick_split(f: Tt, nvars: usize) -> usize {
    let score = |v: usize| {
        let f0 = f.cofactor(v, false);
        let f1 = f.cofactor(v, true);
        let class = if [f0, f1].iter().any(|&c| c == Tt::ZERO || c == Tt::ONES) {
            0
        } else if f0 == !f1 {
            1
        } else {
            2
        };
        (class, f0.count_ones().abs_diff(f1.count_ones()), v)
    };
    (0..nvars)
        .filter(|&v| f.depends_on(v))
        .min_by_key(|&v| score(v))
        .expect("non-constant function has support")
}
