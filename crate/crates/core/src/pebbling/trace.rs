use serde::{Deserialize, Serialize};

use crate::graph::{Dag, DynamicGraphSpec, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Parallel,
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Light,
    Balloon,
    Repebble,
    Other,
}

/// Pebble configurations `P_1, ..., P_t` stored as per-round deltas from
/// `P_0 = ∅`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PebblingTrace {
    pub n: usize,
    pub mode: Mode,
    adds: Vec<NodeId>,
    add_off: Vec<usize>,
    dels: Vec<NodeId>,
    del_off: Vec<usize>,
    phases: Vec<Phase>,
    sizes: Vec<usize>,
    /// `(i, round)`: `r(i)` became visible at the end of `round` (1-based)
    pub reveals: Vec<(NodeId, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CostReport {
    pub cc: u64,
    pub rounds: usize,
    pub light: u64,
    pub balloon: u64,
    pub repebble: u64,
    pub other: u64,
    pub max_pebbles: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("round {round}, node {node}: {reason}")]
pub struct Illegal {
    pub round: usize,
    pub node: NodeId,
    pub reason: String,
}

impl PebblingTrace {
    pub fn empty(n: usize, mode: Mode) -> PebblingTrace {
        PebblingTrace {
            n,
            mode,
            adds: Vec::new(),
            add_off: vec![0],
            dels: Vec::new(),
            del_off: vec![0],
            phases: Vec::new(),
            sizes: Vec::new(),
            reveals: Vec::new(),
        }
    }

    /// Builds a trace from explicit configurations.
    pub fn from_sets(n: usize, mode: Mode, sets: &[Vec<NodeId>]) -> PebblingTrace {
        let mut b = TraceBuilder::new(n, mode);
        for s in sets {
            b.set_round(s, Phase::Other);
        }
        b.finish()
    }

    pub fn rounds(&self) -> usize {
        self.phases.len()
    }

    pub fn added(&self, t: usize) -> &[NodeId] {
        &self.adds[self.add_off[t - 1]..self.add_off[t]]
    }

    pub fn removed(&self, t: usize) -> &[NodeId] {
        &self.dels[self.del_off[t - 1]..self.del_off[t]]
    }

    pub fn phase(&self, t: usize) -> Phase {
        self.phases[t - 1]
    }

    pub fn size(&self, t: usize) -> usize {
        self.sizes[t - 1]
    }

    /// Materialised configurations; only for small traces.
    pub fn sets(&self) -> Vec<Vec<NodeId>> {
        let mut cur = vec![false; self.n + 1];
        (1..=self.rounds())
            .map(|t| {
                for &v in self.removed(t) {
                    cur[v] = false;
                }
                for &v in self.added(t) {
                    cur[v] = true;
                }
                (1..=self.n).filter(|&v| cur[v]).collect()
            })
            .collect()
    }

    pub fn final_set(&self) -> Vec<NodeId> {
        let mut cur = vec![false; self.n + 1];
        for t in 1..=self.rounds() {
            for &v in self.removed(t) {
                cur[v] = false;
            }
            for &v in self.added(t) {
                cur[v] = true;
            }
        }
        (1..=self.n).filter(|&v| cur[v]).collect()
    }

    pub fn cost(&self) -> CostReport {
        let mut r = CostReport { rounds: self.rounds(), ..CostReport::default() };
        for (t, &s) in self.sizes.iter().enumerate() {
            let s64 = s as u64;
            r.cc += s64;
            r.max_pebbles = r.max_pebbles.max(s);
            match self.phases[t] {
                Phase::Light => r.light += s64,
                Phase::Balloon => r.balloon += s64,
                Phase::Repebble => r.repebble += s64,
                Phase::Other => r.other += s64,
            }
        }
        r
    }

    /// `pebbling v1 <n> <mode> <rounds>` then one line per round:
    /// `<t> <phase> + <added..> - <removed..>`.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mode = match self.mode {
            Mode::Parallel => "parallel",
            Mode::Sequential => "sequential",
        };
        let mut out = format!("pebbling v1 {} {mode} {}\n", self.n, self.rounds());
        for t in 1..=self.rounds() {
            let phase = match self.phase(t) {
                Phase::Light => "light",
                Phase::Balloon => "balloon",
                Phase::Repebble => "repebble",
                Phase::Other => "other",
            };
            let _ = write!(out, "{t} {phase} +");
            for v in self.added(t) {
                let _ = write!(out, " {v}");
            }
            out.push_str(" -");
            for v in self.removed(t) {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    /// Rounds of `self` followed by rounds of `other` (whose `P_0` is ∅).
    pub fn concat(&self, other: &PebblingTrace) -> PebblingTrace {
        assert_eq!(self.n, other.n, "traces over different graphs");
        let mut b = TraceBuilder::new(self.n, self.mode);
        for s in self.sets().iter().chain(other.sets().iter()) {
            b.set_round(s, Phase::Other);
        }
        let mut out = b.finish();
        out.phases = self.phases.iter().chain(other.phases.iter()).copied().collect();
        out
    }
}

/// Incremental trace construction with the current configuration at hand.
pub struct TraceBuilder {
    trace: PebblingTrace,
    cur: Vec<bool>,
    count: usize,
    first_round: Vec<usize>,
    open: Option<Phase>,
}

impl TraceBuilder {
    pub fn new(n: usize, mode: Mode) -> TraceBuilder {
        TraceBuilder {
            trace: PebblingTrace::empty(n, mode),
            cur: vec![false; n + 1],
            count: 0,
            first_round: vec![0; n + 1],
            open: None,
        }
    }

    pub fn has(&self, v: NodeId) -> bool {
        self.cur[v]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn current(&self) -> &[bool] {
        &self.cur
    }

    pub fn rounds(&self) -> usize {
        self.trace.phases.len()
    }

    /// Round in which `v` was first pebbled (0 = never).
    pub fn first_pebbled(&self, v: NodeId) -> usize {
        self.first_round[v]
    }

    pub fn begin(&mut self, phase: Phase) {
        assert!(self.open.is_none(), "round already open");
        self.open = Some(phase);
    }

    pub fn add(&mut self, v: NodeId) {
        assert!(self.open.is_some(), "no open round");
        if !self.cur[v] {
            self.cur[v] = true;
            self.count += 1;
            self.trace.adds.push(v);
            if self.first_round[v] == 0 {
                self.first_round[v] = self.trace.phases.len() + 1;
            }
        }
    }

    pub fn remove(&mut self, v: NodeId) {
        assert!(self.open.is_some(), "no open round");
        if self.cur[v] {
            self.cur[v] = false;
            self.count -= 1;
            self.trace.dels.push(v);
        }
    }

    /// Closes the round; returns the nodes first pebbled in it.
    pub fn end(&mut self) -> Vec<NodeId> {
        let phase = self.open.take().expect("no open round");
        let t = self.trace.phases.len() + 1;
        let from = *self.trace.add_off.last().unwrap();
        let fresh = self.trace.adds[from..].iter().copied().filter(|&v| self.first_round[v] == t).collect();
        self.trace.add_off.push(self.trace.adds.len());
        self.trace.del_off.push(self.trace.dels.len());
        self.trace.phases.push(phase);
        self.trace.sizes.push(self.count);
        fresh
    }

    /// Replaces the configuration with `set` in one round.
    pub fn set_round(&mut self, set: &[NodeId], phase: Phase) -> Vec<NodeId> {
        let mut want = vec![false; self.cur.len()];
        for &v in set {
            want[v] = true;
        }
        self.begin(phase);
        for v in 1..self.cur.len() {
            if self.cur[v] && !want[v] {
                self.remove(v);
            }
        }
        for &v in set {
            self.add(v);
        }
        self.end()
    }

    pub fn reveal(&mut self, i: NodeId, round: usize) {
        self.trace.reveals.push((i, round));
    }

    pub fn finish(self) -> PebblingTrace {
        assert!(self.open.is_none(), "unfinished round");
        self.trace
    }
}

/// Drives a [`TraceBuilder`] over a resolved dynamic graph, revealing `r(i)`
/// the first time `i - 1` is pebbled and refusing to hand out parents that
/// are still hidden.
pub(crate) struct Runner<'a> {
    pub spec: &'a DynamicGraphSpec,
    pub dag: &'a Dag,
    pub b: TraceBuilder,
    revealed: Vec<bool>,
}

impl<'a> Runner<'a> {
    pub fn new(spec: &'a DynamicGraphSpec, dag: &'a Dag, mode: Mode) -> Runner<'a> {
        assert_eq!(spec.n(), dag.n(), "resolution does not match spec");
        Runner { spec, dag, b: TraceBuilder::new(dag.n(), mode), revealed: vec![false; dag.n() + 2] }
    }

    pub fn close(&mut self) {
        for v in self.b.end() {
            let i = v + 1;
            if self.spec.is_dynamic(i) && !self.revealed[i] {
                self.revealed[i] = true;
                let t = self.b.rounds();
                self.b.reveal(i, t);
            }
        }
    }

    pub fn parents(&self, v: NodeId) -> &'a [NodeId] {
        assert!(
            !self.spec.is_dynamic(v) || self.revealed[v],
            "strategy read the hidden parent of node {v}"
        );
        self.dag.parents_of(v)
    }

    pub fn assert_revealed_through(&self, i: NodeId) {
        for v in self.spec.dynamic_range().take_while(|&v| v <= i) {
            assert!(self.revealed[v], "node {v} used before its parent was revealed");
        }
    }

    pub fn finish(self) -> PebblingTrace {
        self.b.finish()
    }
}

/// Checks every placement against the resolved graph. With a spec, also
/// checks that `r(i)` was revealed no earlier than the first round holding
/// `i - 1`.
pub fn legality(trace: &PebblingTrace, g: &Dag, spec: Option<&DynamicGraphSpec>) -> Result<(), Illegal> {
    if g.n() != trace.n {
        return Err(Illegal { round: 0, node: 0, reason: "trace and graph sizes differ".into() });
    }
    let mut prev = vec![false; g.n() + 1];
    let mut first = vec![0usize; g.n() + 1];
    for t in 1..=trace.rounds() {
        let mut cur = prev.clone();
        for &v in trace.removed(t) {
            if v == 0 || v > g.n() || !prev[v] {
                return Err(Illegal { round: t, node: v, reason: "removed an absent pebble".into() });
            }
            cur[v] = false;
        }
        let added = trace.added(t);
        if trace.mode == Mode::Sequential && added.len() > 1 {
            return Err(Illegal { round: t, node: added[1], reason: "more than one new pebble".into() });
        }
        for &v in added {
            if v == 0 || v > g.n() || prev[v] {
                return Err(Illegal { round: t, node: v, reason: "added a present or invalid pebble".into() });
            }
            cur[v] = true;
        }
        for &v in added {
            for &p in g.parents_of(v) {
                if !prev[p] {
                    return Err(Illegal { round: t, node: v, reason: format!("parent {p} not pebbled before") });
                }
                if !cur[p] {
                    return Err(Illegal { round: t, node: v, reason: format!("parent {p} dropped while placing") });
                }
            }
            if first[v] == 0 {
                first[v] = t;
            }
        }
        if trace.size(t) != cur.iter().filter(|&&b| b).count() {
            return Err(Illegal { round: t, node: 0, reason: "recorded size disagrees".into() });
        }
        prev = cur;
    }
    if let Some(spec) = spec {
        let mut seen = vec![false; g.n() + 1];
        for &(i, round) in &trace.reveals {
            if !spec.is_dynamic(i) {
                return Err(Illegal { round, node: i, reason: "revealed a static node".into() });
            }
            if first[i - 1] == 0 || round < first[i - 1] {
                return Err(Illegal { round, node: i, reason: format!("r({i}) revealed before {} was pebbled", i - 1) });
            }
            seen[i] = true;
        }
        for i in spec.dynamic_range() {
            if first[i] != 0 && !seen[i] {
                return Err(Illegal { round: first[i], node: i, reason: "placed without a recorded reveal".into() });
            }
        }
    }
    Ok(())
}

pub fn check_legal(trace: &PebblingTrace, g: &Dag) -> bool {
    legality(trace, g, None).is_ok()
}
