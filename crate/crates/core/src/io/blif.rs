//! Structural BLIF reader.
//!
//! Supported: `.model`, `.inputs`, `.outputs`, single-output `.names` with
//! cover rows over `0 1 -`, `.latch` (cut into an extra input/output pair)
//! and `.end`. Lines ending in `\` continue on the next line and `#` starts
//! a comment.

use rustc_hash::FxHashMap;

use super::{ParseDiagnostic, ParseErrors};
use crate::aig::{Aig, Lit};

struct Cover {
    line: usize,
    inputs: Vec<String>,
    rows: Vec<(Vec<u8>, bool)>,
}

enum Def {
    Input(Lit),
    Names(usize),
}

/// Logical lines with the physical line number each started on.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut start = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if buf.is_empty() {
            start = i + 1;
        }
        let trimmed = line.trim_end();
        if let Some(head) = trimmed.strip_suffix('\\') {
            buf.push_str(head);
            buf.push(' ');
            continue;
        }
        buf.push_str(trimmed);
        if !buf.trim().is_empty() {
            out.push((start, std::mem::take(&mut buf)));
        }
        buf.clear();
    }
    if !buf.trim().is_empty() {
        out.push((start, buf));
    }
    out
}

pub fn parse_blif(text: &str) -> Result<Aig, ParseErrors> {
    let mut errs = Vec::new();
    let mut inputs: Vec<(usize, String)> = Vec::new();
    let mut outputs: Vec<(usize, String)> = Vec::new();
    let mut latches: Vec<(usize, String, String)> = Vec::new();
    let mut covers: Vec<Cover> = Vec::new();
    let mut seen_model = false;

    let lines = logical_lines(text);
    let mut i = 0;
    while i < lines.len() {
        let (n, ref l) = lines[i];
        i += 1;
        let mut toks = l.split_whitespace();
        let Some(head) = toks.next() else { continue };
        let rest: Vec<&str> = toks.collect();
        match head {
            ".model" => {
                if seen_model {
                    errs.push(ParseDiagnostic::error(n, "multiple .model sections are not supported"));
                    break;
                }
                seen_model = true;
            }
            ".inputs" => inputs.extend(rest.iter().map(|s| (n, s.to_string()))),
            ".outputs" => outputs.extend(rest.iter().map(|s| (n, s.to_string()))),
            ".latch" => {
                if rest.len() < 2 {
                    errs.push(ParseDiagnostic::error(n, ".latch needs an input and an output signal"));
                } else {
                    latches.push((n, rest[0].to_string(), rest[1].to_string()));
                }
            }
            ".names" => {
                if rest.is_empty() {
                    errs.push(ParseDiagnostic::error(n, ".names needs at least an output signal"));
                }
                let ins: Vec<String> = rest.iter().map(|s| s.to_string()).collect();
                let mut rows = Vec::new();
                while i < lines.len() && !lines[i].1.trim_start().starts_with('.') {
                    let (rn, ref row) = lines[i];
                    i += 1;
                    let parts: Vec<&str> = row.split_whitespace().collect();
                    let width = ins.len().saturating_sub(1);
                    let (cube, out) = match (width, parts.as_slice()) {
                        (0, [o]) => ("", *o),
                        (_, [c, o]) => (*c, *o),
                        _ => {
                            errs.push(ParseDiagnostic::error(
                                rn,
                                format!("cover row `{}` must be `<cube> <output>`; multi-output .names is unsupported", row.trim()),
                            ));
                            continue;
                        }
                    };
                    if cube.len() != width || !cube.bytes().all(|c| matches!(c, b'0' | b'1' | b'-')) {
                        errs.push(ParseDiagnostic::error(
                            rn,
                            format!("cube `{cube}` must have {width} characters from 0, 1, -"),
                        ));
                        continue;
                    }
                    let val = match out {
                        "1" => true,
                        "0" => false,
                        _ => {
                            errs.push(ParseDiagnostic::error(rn, format!("cover output `{out}` must be 0 or 1")));
                            continue;
                        }
                    };
                    rows.push((cube.as_bytes().to_vec(), val));
                }
                if let (Some(first), true) = (rows.first(), !ins.is_empty()) {
                    if rows.iter().any(|r| r.1 != first.1) {
                        errs.push(ParseDiagnostic::error(n, "cover mixes on-set and off-set rows"));
                    }
                }
                if !ins.is_empty() {
                    covers.push(Cover { line: n, inputs: ins, rows });
                }
            }
            ".end" => break,
            d if d.starts_with('.') => {
                errs.push(ParseDiagnostic::error(n, format!("unsupported directive {d}")));
            }
            _ => errs.push(ParseDiagnostic::error(n, format!("unexpected line `{}`", l.trim()))),
        }
    }
    if !errs.is_empty() {
        return Err(ParseErrors(errs));
    }

    let mut g = Aig::new();
    let mut defs: FxHashMap<&str, (usize, Def)> = FxHashMap::default();
    for (n, name) in &inputs {
        let lit = g.add_named_input(Some(name.clone()));
        if defs.insert(name.as_str(), (*n, Def::Input(lit))).is_some() {
            errs.push(ParseDiagnostic::error(*n, format!("signal `{name}` defined twice")));
        }
    }
    for (n, _, q) in &latches {
        let lit = g.add_named_input(Some(q.clone()));
        if defs.insert(q.as_str(), (*n, Def::Input(lit))).is_some() {
            errs.push(ParseDiagnostic::error(*n, format!("signal `{q}` defined twice")));
        }
    }
    for (ci, c) in covers.iter().enumerate() {
        let out = c.inputs.last().unwrap().as_str();
        if defs.insert(out, (c.line, Def::Names(ci))).is_some() {
            errs.push(ParseDiagnostic::error(c.line, format!("signal `{out}` defined twice")));
        }
    }
    if !errs.is_empty() {
        return Err(ParseErrors(errs));
    }

    let mut resolver = Resolver {
        defs: &defs,
        covers: &covers,
        value: vec![None; covers.len()],
        state: vec![0; covers.len()],
    };
    let mut out_lits = Vec::new();
    for (n, name) in &outputs {
        out_lits.push(resolver.resolve(&mut g, name, *n, &mut errs));
    }
    let mut next_lits = Vec::new();
    for (n, d, _) in &latches {
        next_lits.push(resolver.resolve(&mut g, d, *n, &mut errs));
    }
    if !errs.is_empty() {
        return Err(ParseErrors(errs));
    }
    for ((_, name), l) in outputs.iter().zip(out_lits) {
        g.add_named_output(l, Some(name.clone()));
    }
    for ((_, _, q), l) in latches.iter().zip(next_lits) {
        g.add_named_output(l, Some(format!("{q}$next")));
    }
    Ok(g)
}

struct Resolver<'a> {
    defs: &'a FxHashMap<&'a str, (usize, Def)>,
    covers: &'a [Cover],
    value: Vec<Option<Lit>>,
    /// 0 unvisited, 1 on the DFS stack, 2 done.
    state: Vec<u8>,
}

impl Resolver<'_> {
    fn lookup(&self, name: &str) -> Option<Result<Lit, usize>> {
        match self.defs.get(name)? {
            (_, Def::Input(l)) => Some(Ok(*l)),
            (_, Def::Names(ci)) => Some(self.value[*ci].ok_or(*ci)),
        }
    }

    fn resolve(&mut self, g: &mut Aig, name: &str, line: usize, errs: &mut Vec<ParseDiagnostic>) -> Lit {
        let root = match self.lookup(name) {
            None => {
                errs.push(ParseDiagnostic::error(line, format!("undefined signal `{name}`")));
                return Lit::FALSE;
            }
            Some(Ok(l)) => return l,
            Some(Err(ci)) => ci,
        };
        let mut stack = vec![root];
        while let Some(&ci) = stack.last() {
            if self.state[ci] == 2 {
                stack.pop();
                continue;
            }
            self.state[ci] = 1;
            let c = &self.covers[ci];
            let mut pending = None;
            for s in &c.inputs[..c.inputs.len() - 1] {
                match self.lookup(s) {
                    None => {
                        errs.push(ParseDiagnostic::error(c.line, format!("undefined signal `{s}`")));
                        return Lit::FALSE;
                    }
                    Some(Err(dep)) if self.state[dep] == 1 => {
                        errs.push(ParseDiagnostic::error(c.line, format!("combinational cycle through `{s}`")));
                        return Lit::FALSE;
                    }
                    Some(Err(dep)) => {
                        pending = Some(dep);
                        break;
                    }
                    Some(Ok(_)) => {}
                }
            }
            if let Some(dep) = pending {
                stack.push(dep);
                continue;
            }
            let fanins: Vec<Lit> = c.inputs[..c.inputs.len() - 1]
                .iter()
                .map(|s| self.lookup(s).unwrap().unwrap())
                .collect();
            self.value[ci] = Some(build_cover(g, &fanins, &c.rows));
            self.state[ci] = 2;
            stack.pop();
        }
        self.value[root].unwrap_or(Lit::FALSE)
    }
}

/// Sum of products for on-set covers, complemented for off-set covers.
fn build_cover(g: &mut Aig, fanins: &[Lit], rows: &[(Vec<u8>, bool)]) -> Lit {
    let Some(&(_, onset)) = rows.first() else {
        return Lit::FALSE;
    };
    let mut sum = Lit::FALSE;
    for (cube, _) in rows {
        let mut prod = Lit::TRUE;
        for (&c, &x) in cube.iter().zip(fanins) {
            prod = match c {
                b'1' => g.and(prod, x),
                b'0' => g.and(prod, !x),
                _ => prod,
            };
        }
        sum = g.or(sum, prod);
    }
    if onset {
        sum
    } else {
        !sum
    }
}
