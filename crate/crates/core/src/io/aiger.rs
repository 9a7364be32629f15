//! ASCII AIGER (`aag`) reader and writer.
//!
//! Literal `2v` is variable `v`, `2v + 1` its complement, `0`/`1` the
//! constants. Latches are cut: each latch output becomes an extra input
//! after the real ones and each next-state literal an extra output after the
//! real ones. Gate definitions may only reference variables defined above
//! them.

use std::fmt::Write as _;

use rustc_hash::FxHashMap;

use super::{ParseDiagnostic, ParseErrors};
use crate::aig::{Aig, Lit};

struct Header {
    max_var: u64,
    inputs: u64,
    latches: u64,
    outputs: u64,
    ands: u64,
}

pub fn parse_aiger(text: &str) -> Result<Aig, ParseErrors> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let mut errs = Vec::new();

    let Some((_, header_line)) = lines.next() else {
        return Err(ParseErrors::single(1, "empty file: missing `aag` header"));
    };
    let header = parse_header(header_line)?;
    let last_line = text.lines().count();

    let mut take = |what: &str, idx: u64, total: u64| -> Result<(usize, Vec<u64>), ParseErrors> {
        match lines.next() {
            Some((n, l)) => {
                let nums = l
                    .split_whitespace()
                    .map(|t| t.parse::<u64>().map_err(|_| ParseDiagnostic::error(n, format!("invalid number `{t}`"))))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|d| ParseErrors(vec![d]))?;
                Ok((n, nums))
            }
            None => Err(ParseErrors::single(
                last_line + 1,
                format!("header declares {total} {what}, but only {idx} are defined"),
            )),
        }
    };

    let max_lit = header.max_var.checked_mul(2).and_then(|v| v.checked_add(1)).unwrap_or(u64::MAX);
    let check_lit = |line: usize, l: u64, errs: &mut Vec<ParseDiagnostic>| {
        if l > max_lit {
            errs.push(ParseDiagnostic::error(
                line,
                format!("literal {l} exceeds maximum variable index {}", header.max_var),
            ));
        }
    };

    let mut input_vars = Vec::new();
    for i in 0..header.inputs {
        let (n, nums) = take("inputs", i, header.inputs)?;
        match nums.as_slice() {
            [l] if l % 2 == 0 && *l >= 2 => {
                check_lit(n, *l, &mut errs);
                input_vars.push((n, l / 2));
            }
            _ => errs.push(ParseDiagnostic::error(n, "input line must hold one even literal >= 2")),
        }
    }
    let mut latches = Vec::new();
    for i in 0..header.latches {
        let (n, nums) = take("latches", i, header.latches)?;
        match nums.as_slice() {
            [l, next] | [l, next, _] if l % 2 == 0 && *l >= 2 => {
                check_lit(n, *l, &mut errs);
                check_lit(n, *next, &mut errs);
                if let [_, _, init] = nums.as_slice() {
                    if *init > 1 && *init != *l {
                        errs.push(ParseDiagnostic::error(n, format!("invalid latch reset value {init}")));
                    }
                }
                latches.push((n, l / 2, *next));
            }
            _ => errs.push(ParseDiagnostic::error(n, "latch line must be `lit next [init]` with even lit >= 2")),
        }
    }
    let mut outputs = Vec::new();
    for i in 0..header.outputs {
        let (n, nums) = take("outputs", i, header.outputs)?;
        match nums.as_slice() {
            [l] => {
                check_lit(n, *l, &mut errs);
                outputs.push((n, *l));
            }
            _ => errs.push(ParseDiagnostic::error(n, "output line must hold one literal")),
        }
    }
    let mut gates = Vec::new();
    for i in 0..header.ands {
        let (n, nums) = take("and gates", i, header.ands)?;
        match nums.as_slice() {
            [l, a, b] if l % 2 == 0 && *l >= 2 => {
                check_lit(n, *l, &mut errs);
                check_lit(n, *a, &mut errs);
                check_lit(n, *b, &mut errs);
                gates.push((n, *l, *a, *b));
            }
            _ => errs.push(ParseDiagnostic::error(n, "and line must be `lhs rhs0 rhs1` with even lhs >= 2")),
        }
    }

    // Symbol table and comment section.
    let mut in_names: FxHashMap<u64, String> = FxHashMap::default();
    let mut latch_names: FxHashMap<u64, String> = FxHashMap::default();
    let mut out_names: FxHashMap<u64, String> = FxHashMap::default();
    for (n, l) in lines.by_ref() {
        if l == "c" || l.starts_with("c ") {
            break;
        }
        if l.trim().is_empty() {
            continue;
        }
        let (kind, rest) = l.split_at(l.char_indices().nth(1).map_or(l.len(), |(i, _)| i));
        let table = match kind {
            "i" => &mut in_names,
            "l" => &mut latch_names,
            "o" => &mut out_names,
            _ => {
                errs.push(ParseDiagnostic::error(n, format!("unexpected line `{l}`")));
                continue;
            }
        };
        match rest.split_once(' ') {
            Some((pos, name)) if !name.is_empty() => match pos.parse::<u64>() {
                Ok(p) => {
                    table.insert(p, name.to_string());
                }
                Err(_) => errs.push(ParseDiagnostic::error(n, format!("invalid symbol position `{pos}`"))),
            },
            _ => errs.push(ParseDiagnostic::error(n, format!("malformed symbol line `{l}`"))),
        }
    }
    if !errs.is_empty() {
        return Err(ParseErrors(errs));
    }

    let mut g = Aig::new();
    let mut vars: FxHashMap<u64, Lit> = FxHashMap::default();
    vars.insert(0, Lit::FALSE);
    let define = |vars: &mut FxHashMap<u64, Lit>, line: usize, var: u64, lit: Lit, errs: &mut Vec<ParseDiagnostic>| {
        if vars.insert(var, lit).is_some() {
            errs.push(ParseDiagnostic::error(line, format!("variable {var} defined twice")));
        }
    };
    for (i, &(n, v)) in input_vars.iter().enumerate() {
        let lit = g.add_named_input(in_names.remove(&(i as u64)));
        define(&mut vars, n, v, lit, &mut errs);
    }
    for (i, &(n, v, _)) in latches.iter().enumerate() {
        let lit = g.add_named_input(latch_names.get(&(i as u64)).cloned());
        define(&mut vars, n, v, lit, &mut errs);
    }
    for &(n, l, a, b) in &gates {
        let resolve = |x: u64| vars.get(&(x / 2)).map(|&v| v.xor(x % 2 == 1));
        let (ra, rb) = (resolve(a), resolve(b));
        match (ra, rb) {
            (Some(x), Some(y)) => {
                let lit = g.and(x, y);
                define(&mut vars, n, l / 2, lit, &mut errs);
            }
            _ => {
                let missing = if ra.is_none() { a } else { b };
                errs.push(ParseDiagnostic::error(
                    n,
                    format!("literal {missing} references a variable not defined above"),
                ));
                // Keep going so later lines report their own problems.
                vars.entry(l / 2).or_insert(Lit::FALSE);
            }
        }
    }
    let resolve = |line: usize, x: u64, errs: &mut Vec<ParseDiagnostic>| match vars.get(&(x / 2)) {
        Some(&v) => v.xor(x % 2 == 1),
        None => {
            errs.push(ParseDiagnostic::error(line, format!("literal {x} is undefined")));
            Lit::FALSE
        }
    };
    for (i, &(n, l)) in outputs.iter().enumerate() {
        let lit = resolve(n, l, &mut errs);
        g.add_named_output(lit, out_names.remove(&(i as u64)));
    }
    for (i, &(n, _, next)) in latches.iter().enumerate() {
        let lit = resolve(n, next, &mut errs);
        let name = latch_names.get(&(i as u64)).map(|s| format!("{s}$next"));
        g.add_named_output(lit, name);
    }
    if errs.is_empty() {
        Ok(g)
    } else {
        Err(ParseErrors(errs))
    }
}

fn parse_header(line: &str) -> Result<Header, ParseErrors> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    match toks.first() {
        Some(&"aag") => {}
        Some(&"aig") => return Err(ParseErrors::single(1, "binary AIGER (`aig`) is not supported; use `aag`")),
        Some(t) => return Err(ParseErrors::single(1, format!("wrong magic `{t}`, expected `aag`"))),
        None => return Err(ParseErrors::single(1, "missing `aag` header")),
    }
    if toks.len() < 6 {
        return Err(ParseErrors::single(1, "header must be `aag M I L O A`"));
    }
    let mut nums = Vec::new();
    for t in &toks[1..] {
        match t.parse::<u64>() {
            Ok(v) => nums.push(v),
            Err(_) => return Err(ParseErrors::single(1, format!("invalid header count `{t}`"))),
        }
    }
    if nums[5..].iter().any(|&v| v != 0) {
        return Err(ParseErrors::single(1, "bad-state, constraint, justice and fairness sections are not supported"));
    }
    let h = Header {
        max_var: nums[0],
        inputs: nums[1],
        latches: nums[2],
        outputs: nums[3],
        ands: nums[4],
    };
    let defined = h.inputs.checked_add(h.latches).and_then(|v| v.checked_add(h.ands));
    if defined.is_none_or(|d| d > h.max_var) {
        return Err(ParseErrors::single(
            1,
            format!(
                "inconsistent header: I + L + A = {} + {} + {} exceeds M = {}",
                h.inputs, h.latches, h.ands, h.max_var
            ),
        ));
    }
    Ok(h)
}

/// Serialize as combinational `aag`, after garbage collection. Inputs are
/// literals `2, 4, ...` and gates follow in topological order.
pub fn write_aiger(aig: &Aig) -> String {
    let g = aig.gc();
    let ni = g.num_inputs();
    let na = g.num_ands();
    let mut s = String::new();
    let _ = writeln!(s, "aag {} {} 0 {} {}", ni + na, ni, g.num_outputs(), na);
    for i in 0..ni {
        let _ = writeln!(s, "{}", 2 * (i + 1));
    }
    for o in g.outputs() {
        let _ = writeln!(s, "{}", o.raw());
    }
    for id in (ni + 1) as u32..g.num_nodes() as u32 {
        let (a, b) = g.fanins(id).expect("gc puts ANDs after inputs");
        let _ = writeln!(s, "{} {} {}", 2 * id, b.raw(), a.raw());
    }
    for i in 0..ni {
        if let Some(n) = g.input_name(i) {
            let _ = writeln!(s, "i{i} {n}");
        }
    }
    for i in 0..g.num_outputs() {
        if let Some(n) = g.output_name(i) {
            let _ = writeln!(s, "o{i} {n}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::{equivalent, BitPattern, EquivMode};

    #[test]
    fn empty_header() {
        let g = parse_aiger("aag 0 0 0 0 0").unwrap();
        assert_eq!(g.num_inputs(), 0);
        assert_eq!(g.num_outputs(), 0);
        assert_eq!(write_aiger(&g).trim_end(), "aag 0 0 0 0 0");
    }

    #[test]
    fn single_and_truth_table() {
        let g = parse_aiger("aag 3 2 0 1 1\n2\n4\n6\n6 2 4").unwrap();
        let a: BitPattern = "0101".parse().unwrap();
        let b: BitPattern = "0011".parse().unwrap();
        // Rows (a, b) = 00, 10, 01, 11: only the last is true.
        assert_eq!(g.simulate(&[a, b]).unwrap()[0].to_string(), "0001");
    }

    #[test]
    fn missing_and_line() {
        let err = parse_aiger("aag 4 2 0 1 2\n2\n4\n8\n6 2 4\n").unwrap_err();
        let d = err.first_error().unwrap();
        assert_eq!(d.line, 6);
        assert!(d.message.contains("2 and gates"), "{}", d.message);
    }

    #[test]
    fn wrong_magic_and_binary() {
        assert_eq!(parse_aiger("abc 0 0 0 0 0").unwrap_err().0[0].line, 1);
        assert!(parse_aiger("aig 0 0 0 0 0").unwrap_err().0[0].message.contains("binary"));
        assert!(parse_aiger("").is_err());
        assert!(parse_aiger("aag 1 1 0 0 1\n2\n2 2 2").is_err());
    }

    #[test]
    fn forward_reference_rejected() {
        let err = parse_aiger("aag 4 2 0 1 2\n2\n4\n8\n6 2 8\n8 2 4\n").unwrap_err();
        let d = err.first_error().unwrap();
        assert_eq!(d.line, 5);
        assert!(d.message.contains("not defined above"));
    }

    #[test]
    fn latch_is_cut() {
        // One latch toggling on input: next = !q & x.
        let g = parse_aiger("aag 3 1 1 1 1\n2\n4 6\n6\n6 5 2\nl0 q\n").unwrap();
        assert_eq!(g.num_inputs(), 2);
        assert_eq!(g.num_outputs(), 2);
        assert_eq!(g.input_name(1), Some("q"));
        assert_eq!(g.output_name(1), Some("q$next"));
    }

    #[test]
    fn symbols_round_trip() {
        let text = "aag 3 2 0 1 1\n2\n4\n7\n6 4 2\ni0 a\ni1 b\no0 nand\nc\nanything\n";
        let g = parse_aiger(text).unwrap();
        assert_eq!(g.input_name(0), Some("a"));
        assert_eq!(g.output_name(0), Some("nand"));
        let back = write_aiger(&g);
        assert_eq!(back, "aag 3 2 0 1 1\n2\n4\n7\n6 4 2\ni0 a\ni1 b\no0 nand\n");
        let h = parse_aiger(&back).unwrap();
        assert_eq!(h, g);
        assert!(equivalent(&g, &h, EquivMode::Exhaustive).unwrap());
    }
}
