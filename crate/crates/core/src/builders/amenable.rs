//! Structural check for specs that can be evaluated with per-block shuffling.

use serde::{Deserialize, Serialize};

use crate::graph::{DynamicGraphSpec, Resolver};

pub const CLAUSES: [&str; 7] = [
    "Uniform Size of Groups",
    "Large Number of Potential Parents",
    "Potential Parents not in L",
    "Same Potential Parents for Each Group",
    "Different Potential Parents for Different Groups",
    "No Collision for Parents",
    "Data-Independency",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmenabilityReport {
    pub groups: usize,
    pub group_size: usize,
    pub clauses: Vec<ClauseResult>,
    pub pass: bool,
}

impl AmenabilityReport {
    pub fn clause(&self, name: &str) -> Option<&ClauseResult> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

/// Checks all seven clauses with `L` = the dynamic nodes. Dynamic step `t`
/// belongs to group `((t - 1) mod groups) + 1`; `groups` defaults to the
/// number of distinct `R` sets. Collisions are checked by certifying the
/// resolver and by `trials` pseudo-random resolutions.
pub fn check_amenable(spec: &DynamicGraphSpec, groups: Option<usize>, trials: usize) -> AmenabilityReport {
    let n = spec.dynamic_len();
    let b = spec.static_len();
    let g = groups.unwrap_or(spec.groups().len()).max(1);
    let members: Vec<Vec<usize>> =
        (0..g).map(|j| (1..=n).filter(|t| (t - 1) % g == j).map(|t| b + t).collect()).collect();
    let group_size = if n % g == 0 { n / g } else { 0 };
    let mut clauses = Vec::with_capacity(7);
    let mut push = |i: usize, pass: bool, detail: String| {
        clauses.push(ClauseResult { name: CLAUSES[i].to_string(), pass, detail })
    };

    let sizes_ok = n > 0 && n % g == 0;
    push(0, sizes_ok, format!("{n} nodes in {g} round-robin groups"));

    let smallest = spec.potential_lists().iter().map(Vec::len).min().unwrap_or(0);
    push(
        1,
        sizes_ok && smallest >= group_size,
        format!("smallest |R_v| = {smallest}, group size = {group_size}"),
    );

    let outside = spec.potential_lists().iter().flatten().filter(|&&v| v > b).count();
    push(2, n > 0 && outside == 0, format!("{outside} potential parents inside L"));

    let same = members.iter().all(|m| {
        m.windows(2).all(|w| spec.potential_parents(w[0]) == spec.potential_parents(w[1]))
    });
    push(3, n > 0 && same, String::new());

    let mut disjoint = true;
    let sets: Vec<std::collections::BTreeSet<usize>> = members
        .iter()
        .filter_map(|m| m.first())
        .map(|&v| spec.potential_parents(v).unwrap().iter().copied().collect())
        .collect();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if !sets[i].is_disjoint(&sets[j]) {
                disjoint = false;
            }
        }
    }
    push(4, n > 0 && disjoint, String::new());

    // collision: certified resolver plus sampled resolutions
    let max_group = members.iter().map(Vec::len).max().unwrap_or(0);
    let certified = max_group <= 1
        || (*spec.resolver() == Resolver::UsedArray && same && smallest >= max_group);
    let mut collisions = 0usize;
    let mut ran = 0usize;
    for trial in 0..trials {
        let Ok(res) = spec.resolve_pseudo(&(trial as u64).to_be_bytes()) else { break };
        ran += 1;
        for m in &members {
            let mut seen: Vec<usize> = m.iter().map(|&v| res.r(v)).collect();
            seen.sort_unstable();
            let len = seen.len();
            seen.dedup();
            if seen.len() != len {
                collisions += 1;
            }
        }
    }
    push(
        5,
        n > 0 && certified && collisions == 0 && (ran == trials || trials == 0),
        format!(
            "resolver {}certified; {collisions} colliding groups over {ran} trials",
            if certified { "" } else { "not " }
        ),
    );

    // the static prefix is a plain Dag, so only the placement of L matters
    push(6, b > 0, format!("static prefix of {b} nodes"));

    let pass = clauses.iter().all(|c| c.pass);
    AmenabilityReport { groups: g, group_size, clauses, pass }
}
