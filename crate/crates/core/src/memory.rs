//! Two-tier memory: a bounded write-back cache in front of RAM, recording
//! the RAM-visible request/store events.
//!
//! One label is one cache line. A miss on load emits a request; a dirty line
//! emits a store when it is evicted or flushed. Hits emit nothing.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Lru,
    Fifo,
}

impl std::str::FromStr for Policy {
    type Err = MemError;

    fn from_str(s: &str) -> Result<Policy, MemError> {
        match s.to_ascii_lowercase().as_str() {
            "lru" => Ok(Policy::Lru),
            "fifo" => Ok(Policy::Fifo),
            _ => Err(MemError::Config(format!("unknown policy {s:?}"))),
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Policy::Lru => "lru",
            Policy::Fifo => "fifo",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Request,
    Store,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AccessEvent {
    pub kind: EventKind,
    pub address: u64,
    pub size: u32,
    pub round: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MemError {
    #[error("read of unwritten address {0}")]
    Fault(u64),
    #[error("label of {got} bytes, memory width is {want}")]
    Width { got: usize, want: usize },
    #[error("configuration: {0}")]
    Config(String),
    #[error("trace line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Address/size events only; label bytes never enter this type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LeakagePattern {
    pub label_width: u32,
    pub cache_capacity: usize,
    pub policy: Policy,
    pub events: Vec<AccessEvent>,
}

impl LeakagePattern {
    pub fn requests(&self) -> impl Iterator<Item = &AccessEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Request)
    }

    pub fn stores(&self) -> impl Iterator<Item = &AccessEvent> {
        self.events.iter().filter(|e| e.kind == EventKind::Store)
    }

    /// `(kind, address)` sequence, i.e. the pattern without round numbers.
    pub fn without_rounds(&self) -> Vec<(EventKind, u64)> {
        self.events.iter().map(|e| (e.kind, e.address)).collect()
    }

    pub fn in_rounds(&self, rounds: RangeInclusive<u64>) -> Vec<AccessEvent> {
        self.events.iter().filter(|e| rounds.contains(&e.round)).copied().collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("trace v1 {} {} {}\n", self.label_width, self.cache_capacity, self.policy);
        for e in &self.events {
            let k = match e.kind {
                EventKind::Request => 'R',
                EventKind::Store => 'S',
            };
            let _ = writeln!(out, "{k} {} {} {}", e.address, e.size, e.round);
        }
        out
    }

    pub fn parse(text: &str) -> Result<LeakagePattern, MemError> {
        let perr = |line: usize, msg: &str| MemError::Parse { line, msg: msg.to_string() };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| perr(1, "empty trace"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "trace" || h[1] != "v1" {
            return Err(perr(1, "expected `trace v1 <label_width> <cache_capacity> <policy>`"));
        }
        let label_width = h[2].parse().map_err(|_| perr(1, "bad label width"))?;
        let cache_capacity = h[3].parse().map_err(|_| perr(1, "bad cache capacity"))?;
        let policy = h[4].parse().map_err(|_| perr(1, "bad policy"))?;
        let mut events = Vec::new();
        for (i, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            let t: Vec<&str> = l.split_whitespace().collect();
            let kind = match t.first() {
                Some(&"R") => EventKind::Request,
                Some(&"S") => EventKind::Store,
                _ => return Err(perr(i + 1, "expected R or S")),
            };
            if t.len() != 4 {
                return Err(perr(i + 1, "expected `<R|S> <addr> <size> <round>`"));
            }
            events.push(AccessEvent {
                kind,
                address: t[1].parse().map_err(|_| perr(i + 1, "bad address"))?,
                size: t[2].parse().map_err(|_| perr(i + 1, "bad size"))?,
                round: t[3].parse().map_err(|_| perr(i + 1, "bad round"))?,
            });
        }
        Ok(LeakagePattern { label_width, cache_capacity, policy, events })
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

struct Line {
    data: Vec<u8>,
    dirty: bool,
    stamp: u64,
}

pub struct TieredMemory {
    capacity: usize,
    policy: Policy,
    width: usize,
    ram: HashMap<u64, Vec<u8>>,
    lines: HashMap<u64, Line>,
    order: BTreeMap<u64, u64>,
    clock: u64,
    round: u64,
    events: Vec<AccessEvent>,
}

impl TieredMemory {
    pub fn new(capacity: usize, policy: Policy, width: usize) -> Result<TieredMemory, MemError> {
        if capacity == 0 {
            return Err(MemError::Config("cache capacity must be at least one line".into()));
        }
        Ok(TieredMemory {
            capacity,
            policy,
            width,
            ram: HashMap::new(),
            lines: HashMap::new(),
            order: BTreeMap::new(),
            clock: 0,
            round: 0,
            events: Vec::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Starts a new evaluator round; later events carry the new number.
    pub fn next_round(&mut self) -> u64 {
        self.round += 1;
        self.round
    }

    pub fn cached(&self, addr: u64) -> bool {
        self.lines.contains_key(&addr)
    }

    pub fn cache_len(&self) -> usize {
        self.lines.len()
    }

    fn emit(&mut self, kind: EventKind, address: u64) {
        self.events.push(AccessEvent { kind, address, size: self.width as u32, round: self.round });
    }

    fn touch(&mut self, addr: u64) {
        if self.policy == Policy::Lru {
            let line = self.lines.get_mut(&addr).expect("cached");
            self.order.remove(&line.stamp);
            self.clock += 1;
            line.stamp = self.clock;
            self.order.insert(self.clock, addr);
        }
    }

    fn install(&mut self, addr: u64, data: Vec<u8>, dirty: bool) {
        while self.lines.len() >= self.capacity {
            let (&stamp, &victim) = self.order.iter().next().expect("non-empty cache");
            self.order.remove(&stamp);
            let line = self.lines.remove(&victim).expect("ordered line exists");
            if line.dirty {
                self.ram.insert(victim, line.data);
                self.emit(EventKind::Store, victim);
            }
        }
        self.clock += 1;
        self.order.insert(self.clock, addr);
        self.lines.insert(addr, Line { data, dirty, stamp: self.clock });
        debug_assert!(self.lines.len() <= self.capacity);
    }

    pub fn load(&mut self, addr: u64) -> Result<Vec<u8>, MemError> {
        if self.lines.contains_key(&addr) {
            self.touch(addr);
            return Ok(self.lines[&addr].data.clone());
        }
        let data = self.ram.get(&addr).cloned().ok_or(MemError::Fault(addr))?;
        self.emit(EventKind::Request, addr);
        self.install(addr, data.clone(), false);
        Ok(data)
    }

    /// Writes into the cache; RAM sees it only on eviction or flush.
    pub fn store(&mut self, addr: u64, label: &[u8]) -> Result<(), MemError> {
        if label.len() != self.width {
            return Err(MemError::Width { got: label.len(), want: self.width });
        }
        if let Some(line) = self.lines.get_mut(&addr) {
            line.data.copy_from_slice(label);
            line.dirty = true;
            self.touch(addr);
        } else {
            self.install(addr, label.to_vec(), true);
        }
        Ok(())
    }

    /// Writes back every dirty cached line in `range`, lowest address first.
    /// Lines stay cached (clean).
    pub fn flush_block_ascending(&mut self, range: RangeInclusive<u64>) {
        let mut dirty: Vec<u64> =
            self.lines.iter().filter(|(a, l)| l.dirty && range.contains(a)).map(|(&a, _)| a).collect();
        dirty.sort_unstable();
        for a in dirty {
            let line = self.lines.get_mut(&a).unwrap();
            line.dirty = false;
            let data = line.data.clone();
            self.ram.insert(a, data);
            self.emit(EventKind::Store, a);
        }
    }

    pub fn flush_all(&mut self) {
        self.flush_block_ascending(0..=u64::MAX);
    }

    /// Flushes everything ascending, then empties the cache.
    pub fn drain(&mut self) {
        self.flush_all();
        self.lines.clear();
        self.order.clear();
    }

    /// Direct RAM write with no cache involvement and no event; for
    /// initialising inputs that are public anyway.
    pub fn preload(&mut self, addr: u64, label: &[u8]) {
        self.ram.insert(addr, label.to_vec());
    }

    pub fn leakage(&self) -> LeakagePattern {
        LeakagePattern {
            label_width: self.width as u32,
            cache_capacity: self.capacity,
            policy: self.policy,
            events: self.events.clone(),
        }
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn events_since(&self, from: usize) -> &[AccessEvent] {
        &self.events[from..]
    }

    pub fn into_leakage(self) -> LeakagePattern {
        LeakagePattern { label_width: self.width as u32, cache_capacity: self.capacity, policy: self.policy, events: self.events }
    }
}
