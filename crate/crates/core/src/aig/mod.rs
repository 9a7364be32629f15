//! Structurally hashed And-Inverter Graphs.

mod lit;
mod metrics;
pub(crate) mod sim;

use std::fmt;

use rustc_hash::FxHashMap;

pub use lit::Lit;
pub use metrics::{Objective, QoR};
pub use sim::{equivalent, BitPattern, EquivMode, EXHAUSTIVE_LIMIT};

use crate::error::AigError;

/// A node of the graph. Node 0 is always [`Node::Const`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Node {
    Const,
    /// Primary (or pseudo-primary) input, carrying its input position.
    Input(u32),
    /// Two-input AND; fanins are stored in canonical (ascending) order.
    And(Lit, Lit),
}

/// A combinational And-Inverter Graph.
///
/// Nodes are append-only and every AND refers to strictly older nodes, so
/// node ids are a topological order. Latches are cut before they reach this
/// type: their outputs become extra inputs and their next-state functions
/// become extra outputs.
#[derive(Clone, Default)]
pub struct Aig {
    nodes: Vec<Node>,
    inputs: Vec<u32>,
    outputs: Vec<Lit>,
    strash: FxHashMap<(Lit, Lit), u32>,
    input_names: Vec<Option<String>>,
    output_names: Vec<Option<String>>,
}

impl PartialEq for Aig {
    fn eq(&self, other: &Aig) -> bool {
        self.nodes == other.nodes
            && self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.input_names == other.input_names
            && self.output_names == other.output_names
    }
}

impl Eq for Aig {}

impl fmt::Debug for Aig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Aig")
            .field("inputs", &self.inputs.len())
            .field("outputs", &self.outputs)
            .field("nodes", &self.nodes)
            .finish()
    }
}

impl Aig {
    pub fn new() -> Aig {
        Aig {
            nodes: vec![Node::Const],
            ..Default::default()
        }
    }

    /// Empty graph with room for `nodes` nodes.
    pub fn with_capacity(nodes: usize) -> Aig {
        let mut g = Aig::new();
        g.nodes.reserve(nodes);
        g.strash.reserve(nodes);
        g
    }

    pub fn add_input(&mut self) -> Lit {
        self.add_named_input(None)
    }

    pub fn add_named_input(&mut self, name: Option<String>) -> Lit {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node::Input(self.inputs.len() as u32));
        self.inputs.push(id);
        self.input_names.push(name);
        Lit::new(id, false)
    }

    pub fn add_output(&mut self, lit: Lit) -> usize {
        self.add_named_output(lit, None)
    }

    pub fn add_named_output(&mut self, lit: Lit, name: Option<String>) -> usize {
        self.outputs.push(lit);
        self.output_names.push(name);
        self.outputs.len() - 1
    }

    pub fn set_output(&mut self, index: usize, lit: Lit) {
        self.outputs[index] = lit;
    }

    /// AND of two literals with constant propagation, idempotence,
    /// complement annihilation and structural hashing.
    pub fn add_and(&mut self, a: Lit, b: Lit) -> Result<Lit, AigError> {
        self.check_lit(a)?;
        self.check_lit(b)?;
        Ok(self.and(a, b))
    }

    /// Same as [`Aig::add_and`] for literals already known to be valid.
    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        debug_assert!(a.index() < self.nodes.len() && b.index() < self.nodes.len());
        if let Some(l) = trivial_and(a, b) {
            return l;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&id) = self.strash.get(&key) {
            return Lit::new(id, false);
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(Node::And(key.0, key.1));
        self.strash.insert(key, id);
        Lit::new(id, false)
    }

    /// Existing literal for `AND(a, b)`, if no new node would be needed.
    pub fn lookup_and(&self, a: Lit, b: Lit) -> Option<Lit> {
        if let Some(l) = trivial_and(a, b) {
            return Some(l);
        }
        let key = if a < b { (a, b) } else { (b, a) };
        self.strash.get(&key).map(|&id| Lit::new(id, false))
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let p = self.and(a, !b);
        let q = self.and(!a, b);
        self.or(p, q)
    }

    /// `sel ? then : other`
    pub fn mux(&mut self, sel: Lit, then: Lit, other: Lit) -> Lit {
        let p = self.and(sel, then);
        let q = self.and(!sel, other);
        self.or(p, q)
    }

    fn check_lit(&self, l: Lit) -> Result<(), AigError> {
        if l.index() < self.nodes.len() {
            Ok(())
        } else {
            Err(AigError::MalformedLiteral {
                lit: l.raw(),
                num_nodes: self.nodes.len(),
            })
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Allocated AND nodes, dangling ones included.
    pub fn num_ands(&self) -> usize {
        self.nodes.len() - self.inputs.len() - 1
    }

    pub fn node(&self, id: u32) -> Node {
        self.nodes[id as usize]
    }

    pub fn fanins(&self, id: u32) -> Option<(Lit, Lit)> {
        match self.nodes[id as usize] {
            Node::And(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn is_and(&self, id: u32) -> bool {
        matches!(self.nodes[id as usize], Node::And(..))
    }

    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn input_lit(&self, i: usize) -> Lit {
        Lit::new(self.inputs[i], false)
    }

    pub fn outputs(&self) -> &[Lit] {
        &self.outputs
    }

    pub fn input_name(&self, i: usize) -> Option<&str> {
        self.input_names[i].as_deref()
    }

    pub fn output_name(&self, i: usize) -> Option<&str> {
        self.output_names[i].as_deref()
    }

    /// AND level of every node; inputs and the constant sit at level 0.
    pub fn levels(&self) -> Vec<u32> {
        let mut lv = vec![0u32; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Node::And(a, b) = *n {
                lv[i] = lv[a.index()].max(lv[b.index()]) + 1;
            }
        }
        lv
    }

    /// Nodes in the transitive fanin of some output.
    pub fn reachable(&self) -> Vec<bool> {
        let mut mark = vec![false; self.nodes.len()];
        for o in &self.outputs {
            mark[o.index()] = true;
        }
        for i in (0..self.nodes.len()).rev() {
            if mark[i] {
                if let Node::And(a, b) = self.nodes[i] {
                    mark[a.index()] = true;
                    mark[b.index()] = true;
                }
            }
        }
        mark
    }

    /// Fanout count of every node over the reachable part of the graph,
    /// output references included.
    pub fn fanout_counts(&self) -> Vec<u32> {
        let live = self.reachable();
        let mut refs = vec![0u32; self.nodes.len()];
        for o in &self.outputs {
            refs[o.index()] += 1;
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !live[i] {
                continue;
            }
            if let Node::And(a, b) = *n {
                refs[a.index()] += 1;
                refs[b.index()] += 1;
            }
        }
        refs
    }

    /// Copy without dangling nodes, renumbered so that inputs come first
    /// and ANDs follow in their original relative order.
    pub fn gc(&self) -> Aig {
        let live = self.reachable();
        let mut out = Aig::with_capacity(live.iter().filter(|&&l| l).count() + self.inputs.len() + 1);
        let mut map = vec![Lit::FALSE; self.nodes.len()];
        for (i, &id) in self.inputs.iter().enumerate() {
            map[id as usize] = out.add_named_input(self.input_names[i].clone());
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if let Node::And(a, b) = *n {
                if live[i] {
                    let fa = map[a.index()].xor(a.is_complemented());
                    let fb = map[b.index()].xor(b.is_complemented());
                    map[i] = out.and(fa, fb);
                }
            }
        }
        for (i, &o) in self.outputs.iter().enumerate() {
            let l = map[o.index()].xor(o.is_complemented());
            out.add_named_output(l, self.output_names[i].clone());
        }
        out
    }

    /// True when no allocated node is dangling and ids are already in the
    /// order [`Aig::gc`] would produce.
    pub fn is_compact(&self) -> bool {
        if self.inputs.iter().enumerate().any(|(i, &id)| id as usize != i + 1) {
            return false;
        }
        let live = self.reachable();
        (self.inputs.len() + 1..self.nodes.len()).all(|i| live[i])
    }

    /// Empty copy sharing inputs and I/O names; outputs are left unset.
    pub(crate) fn with_same_inputs(&self) -> Aig {
        let mut out = Aig::with_capacity(self.nodes.len());
        for name in &self.input_names {
            out.add_named_input(name.clone());
        }
        out
    }

    pub(crate) fn output_names_vec(&self) -> &[Option<String>] {
        &self.output_names
    }

    pub(crate) fn checkpoint(&self) -> usize {
        self.nodes.len()
    }

    /// Drop every AND created after `mark`. Only valid when no input was
    /// added since the checkpoint.
    pub(crate) fn rollback(&mut self, mark: usize) {
        while self.nodes.len() > mark {
            if let Some(Node::And(a, b)) = self.nodes.pop() {
                self.strash.remove(&(a, b));
            } else {
                unreachable!("rollback past an input");
            }
        }
    }
}

#[inline]
fn trivial_and(a: Lit, b: Lit) -> Option<Lit> {
    if a == Lit::FALSE || b == Lit::FALSE || a == !b {
        Some(Lit::FALSE)
    } else if a == Lit::TRUE || a == b {
        Some(b)
    } else if b == Lit::TRUE {
        Some(a)
    } else {
        None
    }
}
