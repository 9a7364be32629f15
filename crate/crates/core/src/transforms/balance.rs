//! AND-tree balancing.
//!
//! A tree is a maximal set of AND nodes connected through regular
//! (non-complemented) edges where every non-root node has a single fanout.
//! Each tree is flattened into its leaf set and rebuilt by repeatedly
//! pairing the two shallowest operands. The rebuild is kept only when it is
//! strictly shallower than copying the original tree.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{initial_map, map_lit, Builder};
use crate::aig::{Aig, Lit};

enum Plan {
    Const(Lit),
    Rebuild,
    Copy,
}

pub(super) fn balance(g: &Aig) -> (Aig, usize) {
    let refs = g.fanout_counts();
    let mut internal = vec![false; g.num_nodes()];
    for id in 0..g.num_nodes() as u32 {
        if let Some((a, b)) = g.fanins(id) {
            for f in [a, b] {
                if !f.is_complemented() && g.is_and(f.node()) && refs[f.index()] == 1 {
                    internal[f.index()] = true;
                }
            }
        }
    }

    let mut b = Builder::new(g);
    let mut map = initial_map(g);
    let mut tnodes = 0;
    let mut stack = Vec::new();
    let mut post = Vec::new();
    let mut leaves = Vec::new();
    // Depth of each tree node if the tree is copied; written before read.
    let mut copy_level = vec![0u32; g.num_nodes()];

    for root in 0..g.num_nodes() as u32 {
        if !g.is_and(root) || internal[root as usize] {
            continue;
        }
        // Post-order of the tree's internal nodes plus its leaf literals.
        post.clear();
        leaves.clear();
        stack.clear();
        stack.push((root, false));
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                post.push(n);
                continue;
            }
            stack.push((n, true));
            let (x, y) = g.fanins(n).expect("tree node is an AND");
            for f in [y, x] {
                if !f.is_complemented() && internal[f.index()] {
                    stack.push((f.node(), false));
                } else {
                    leaves.push(map_lit(&map, f));
                }
            }
        }

        // Level the copied tree would have.
        for &n in &post {
            let (x, y) = g.fanins(n).unwrap();
            let lv = |f: Lit| -> u32 {
                if !f.is_complemented() && internal[f.index()] {
                    copy_level[f.index()]
                } else {
                    b.level(map_lit(&map, f))
                }
            };
            let l = lv(x).max(lv(y)) + 1;
            copy_level[n as usize] = l;
        }
        let copy_depth = copy_level[root as usize];

        let plan = match normalize_leaves(&mut leaves) {
            Some(c) => Plan::Const(c),
            None if huffman_depth(&b, &leaves) < copy_depth => Plan::Rebuild,
            None => Plan::Copy,
        };
        match plan {
            Plan::Const(c) => {
                map[root as usize] = c;
                tnodes += 1;
            }
            Plan::Rebuild => {
                map[root as usize] = build_balanced(&mut b, &leaves);
                tnodes += 1;
            }
            Plan::Copy => {
                for &n in &post {
                    let (x, y) = g.fanins(n).unwrap();
                    map[n as usize] = b.and(map_lit(&map, x), map_lit(&map, y));
                }
            }
        }
    }
    (b.finish(g, &map), tnodes)
}

/// Sort and dedup leaves. Returns a constant when the conjunction collapses.
fn normalize_leaves(leaves: &mut Vec<Lit>) -> Option<Lit> {
    leaves.sort();
    leaves.dedup();
    if leaves.contains(&Lit::FALSE) {
        return Some(Lit::FALSE);
    }
    leaves.retain(|&l| l != Lit::TRUE);
    if leaves.windows(2).any(|w| w[0] == !w[1]) {
        return Some(Lit::FALSE);
    }
    if leaves.is_empty() {
        return Some(Lit::TRUE);
    }
    None
}

fn huffman_depth(b: &Builder, leaves: &[Lit]) -> u32 {
    let mut heap: BinaryHeap<Reverse<u32>> = leaves.iter().map(|&l| Reverse(b.level(l))).collect();
    while heap.len() > 1 {
        let Reverse(x) = heap.pop().unwrap();
        let Reverse(y) = heap.pop().unwrap();
        heap.push(Reverse(x.max(y) + 1));
    }
    heap.pop().map_or(0, |Reverse(d)| d)
}

fn build_balanced(b: &mut Builder, leaves: &[Lit]) -> Lit {
    let mut heap: BinaryHeap<Reverse<(u32, Lit)>> =
        leaves.iter().map(|&l| Reverse((b.level(l), l))).collect();
    while heap.len() > 1 {
        let Reverse((_, x)) = heap.pop().unwrap();
        let Reverse((_, y)) = heap.pop().unwrap();
        let n = b.and(x, y);
        heap.push(Reverse((b.level(n), n)));
    }
    heap.pop().map(|Reverse((_, l))| l).unwrap_or(Lit::TRUE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::{equivalent, EquivMode};
    use crate::transforms::fixtures::chain;

    #[test]
    fn chain_becomes_log_depth() {
        // Two ANDs over three inputs are already as shallow as possible.
        assert_eq!(balance(&chain(2)).1, 0);
        for k in [3usize, 7, 12] {
            let g = chain(k);
            let (h, t) = balance(&g);
            let h = h.gc();
            assert_eq!(t, 1);
            assert_eq!(h.metrics().and_count, k);
            assert_eq!(h.metrics().depth, (k as f64 + 1.0).log2().ceil() as u32);
            assert!(equivalent(&g, &h, EquivMode::Exhaustive).unwrap());
        }
    }

    #[test]
    fn shared_subtree_is_a_separate_tree() {
        // x = a&b&c&d is used twice, so it stays a leaf of both users.
        let mut g = Aig::new();
        let ins: Vec<Lit> = (0..6).map(|_| g.add_input()).collect();
        let mut x = ins[0];
        for &i in &ins[1..4] {
            x = g.and(x, i);
        }
        let p = g.and(x, ins[4]);
        let q = g.and(x, ins[5]);
        g.add_output(p);
        g.add_output(q);
        let (h, t) = balance(&g);
        let h = h.gc();
        assert_eq!(t, 1);
        assert_eq!(h.metrics().depth, 3);
        assert!(equivalent(&g, &h, EquivMode::Exhaustive).unwrap());
    }

    #[test]
    fn contradictory_leaves_fold() {
        // ((a & b) & c) & !a through regular single-fanout edges.
        let mut g = Aig::new();
        let a = g.add_input();
        let b = g.add_input();
        let c = g.add_input();
        let x = g.and(a, b);
        let y = g.and(x, c);
        let z = g.and(y, !a);
        g.add_output(z);
        let (h, t) = balance(&g);
        assert_eq!(t, 1);
        assert_eq!(h.outputs()[0], Lit::FALSE);
    }
}
