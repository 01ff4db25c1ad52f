//! Line-oriented graph files.
//!
//! ```text
//! dag <n> <indeg_bound>
//! 1:
//! 2: 1
//! ```
//!
//! Dynamic specs use `dyn <n> <k> <static_prefix_len> [indeg_bound]`, an
//! optional `resolver uniform <hex-seed>` / `resolver used-array` line, static
//! node lines as above and `<v> ? r1 ... rk` lines for dynamic nodes. Blank
//! lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::{Dag, DynamicGraphSpec, GraphError, NodeId, Resolver};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphFile {
    Static(Dag),
    Dynamic(DynamicGraphSpec),
}

impl GraphFile {
    pub fn to_text(&self) -> String {
        match self {
            GraphFile::Static(g) => g.to_text(),
            GraphFile::Dynamic(s) => s.to_text(),
        }
    }

    /// Treats a static graph as a spec without dynamic nodes.
    pub fn into_spec(self) -> DynamicGraphSpec {
        match self {
            GraphFile::Static(g) => DynamicGraphSpec::from_static(g),
            GraphFile::Dynamic(s) => s,
        }
    }
}

fn node_line(out: &mut String, v: NodeId, ps: &[NodeId]) {
    let _ = write!(out, "{v}:");
    for p in ps {
        let _ = write!(out, " {p}");
    }
    out.push('\n');
}

impl Dag {
    pub fn to_text(&self) -> String {
        let mut out = format!("dag {} {}\n", self.n(), self.indeg_bound());
        for v in 1..=self.n() {
            node_line(&mut out, v, self.parents_of(v));
        }
        out
    }
}

impl DynamicGraphSpec {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "dyn {} {} {} {}\n",
            self.n(),
            self.k(),
            self.static_len(),
            self.indeg_bound()
        );
        match self.resolver() {
            Resolver::Uniform { seed } => {
                let _ = writeln!(out, "resolver uniform {}", seed.to_hex());
            }
            Resolver::UsedArray => out.push_str("resolver used-array\n"),
            Resolver::Unspecified => {}
        }
        for v in 1..=self.static_len() {
            node_line(&mut out, v, self.base().parents_of(v));
        }
        for v in self.dynamic_range() {
            let _ = write!(out, "{v} ?");
            for r in self.potential_parents(v).unwrap() {
                let _ = write!(out, " {r}");
            }
            out.push('\n');
        }
        out
    }
}

/// SHA-256 over the canonical text form, hex encoded.
pub fn graph_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn perr(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn num(tok: &str, line: usize, what: &str) -> Result<usize, GraphError> {
    tok.parse::<usize>().map_err(|_| perr(line, format!("bad {what} {tok:?}")))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Some((i + 1, t));
        }
        None
    }
}

pub fn parse(text: &str) -> Result<GraphFile, GraphError> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    match toks.first().copied() {
        Some("dag") => {
            if toks.len() != 3 {
                return Err(perr(hl, "expected `dag <n> <indeg_bound>`"));
            }
            let n = num(toks[1], hl, "node count")?;
            let bound = num(toks[2], hl, "indegree bound")?;
            let parents = static_lines(&mut lines, 1, n)?;
            extra(&mut lines)?;
            Ok(GraphFile::Static(build(bound, parents, hl)?))
        }
        Some("dyn") => {
            if toks.len() != 4 && toks.len() != 5 {
                return Err(perr(hl, "expected `dyn <n> <k> <static_prefix_len> [indeg_bound]`"));
            }
            let n = num(toks[1], hl, "node count")?;
            let k = num(toks[2], hl, "k")?;
            let b = num(toks[3], hl, "static prefix length")?;
            let bound = toks.get(4).map(|t| num(t, hl, "indegree bound")).transpose()?;
            if b > n {
                return Err(perr(hl, "static prefix longer than graph"));
            }
            let mut resolver = Resolver::Unspecified;
            let mut pending = None;
            if let Some((l, t)) = lines.next() {
                if let Some(rest) = t.strip_prefix("resolver") {
                    let r: Vec<&str> = rest.split_whitespace().collect();
                    resolver = match r.as_slice() {
                        ["uniform", hex] => Resolver::Uniform {
                            seed: hex.parse().map_err(|e| perr(l, format!("{e}")))?,
                        },
                        ["used-array"] => Resolver::UsedArray,
                        _ => return Err(perr(l, format!("unknown resolver {rest:?}"))),
                    };
                } else {
                    pending = Some((l, t));
                }
            }
            let mut all = PeekLines { lines, pending };
            let mut parents = Vec::with_capacity(b);
            for v in 1..=b {
                let (l, t) = all.next().ok_or_else(|| perr(all.lines.last + 1, format!("missing node {v}")))?;
                parents.push(parse_static_line(t, v, l)?);
            }
            let mut potential = Vec::with_capacity(n - b);
            for v in b + 1..=n {
                let (l, t) = all.next().ok_or_else(|| perr(all.lines.last + 1, format!("missing node {v}")))?;
                let (head, rest) =
                    t.split_once('?').ok_or_else(|| perr(l, format!("node {v} should be dynamic (`{v} ? ...`)")))?;
                if num(head.trim(), l, "node id")? != v {
                    return Err(perr(l, format!("expected node {v}")));
                }
                let r = rest
                    .split_whitespace()
                    .map(|x| num(x, l, "node id"))
                    .collect::<Result<Vec<_>, _>>()?;
                if r.len() > k {
                    return Err(perr(l, format!("|R_{v}| = {} exceeds k = {k}", r.len())));
                }
                potential.push(r);
            }
            if let Some((l, _)) = all.next() {
                return Err(perr(l, "trailing content"));
            }
            let base = Dag::with_tight_bound(parents).map_err(|e| perr(hl, e.to_string()))?;
            let spec = DynamicGraphSpec::new(base, potential, resolver, bound).map_err(|e| perr(hl, e.to_string()))?;
            if spec.k() != k && n > b {
                return Err(perr(hl, format!("header k = {k} but largest R set has {}", spec.k())));
            }
            Ok(GraphFile::Dynamic(spec))
        }
        _ => Err(perr(hl, "expected `dag` or `dyn` header")),
    }
}

struct PeekLines<'a> {
    lines: Lines<'a>,
    pending: Option<(usize, &'a str)>,
}

impl<'a> PeekLines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.pending.take().or_else(|| self.lines.next())
    }
}

fn build(bound: usize, parents: Vec<Vec<NodeId>>, hl: usize) -> Result<Dag, GraphError> {
    Dag::new(bound, parents).map_err(|e| perr(hl, e.to_string()))
}

fn extra(lines: &mut Lines<'_>) -> Result<(), GraphError> {
    match lines.next() {
        Some((l, _)) => Err(perr(l, "trailing content")),
        None => Ok(()),
    }
}

fn static_lines(lines: &mut Lines<'_>, from: usize, to: usize) -> Result<Vec<Vec<NodeId>>, GraphError> {
    let mut out = Vec::with_capacity(to + 1 - from);
    for v in from..=to {
        let (l, t) = lines.next().ok_or_else(|| perr(lines.last + 1, format!("missing node {v}")))?;
        out.push(parse_static_line(t, v, l)?);
    }
    Ok(out)
}

fn parse_static_line(t: &str, v: NodeId, l: usize) -> Result<Vec<NodeId>, GraphError> {
    let (head, rest) = t.split_once(':').ok_or_else(|| perr(l, format!("expected `{v}: ...`")))?;
    if num(head.trim(), l, "node id")? != v {
        return Err(perr(l, format!("expected node {v}")));
    }
    let ps = rest
        .split_whitespace()
        .map(|x| num(x, l, "node id"))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(&p) = ps.iter().find(|&&p| p == 0 || p >= v) {
        return Err(perr(l, format!("parent {p} of node {v} is not earlier")));
    }
    Ok(ps)
}

pub fn parse_dag(text: &str) -> Result<Dag, GraphError> {
    match parse(text)? {
        GraphFile::Static(g) => Ok(g),
        GraphFile::Dynamic(_) => Err(perr(1, "expected a static `dag` file")),
    }
}

pub fn parse_spec(text: &str) -> Result<DynamicGraphSpec, GraphError> {
    Ok(parse(text)?.into_spec())
}
