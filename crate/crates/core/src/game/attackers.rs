//! Built-in attackers. All of them compare what they see against leakage
//! they simulate themselves with the identity permutation.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use super::{Attacker, RoundView};
use crate::memory::{LeakagePattern, Policy};
use crate::mhf::{Evaluator, EvaluatorKind};

/// What an attacker knows besides the transcript: the public graph, the
/// memory configuration, and a memo of its own simulations.
pub struct AttackContext {
    evaluator: Arc<Evaluator>,
    cache: usize,
    policy: Policy,
    sims: Mutex<HashMap<Vec<u8>, Arc<LeakagePattern>>>,
}

impl AttackContext {
    pub fn new(evaluator: Arc<Evaluator>, cache: usize, policy: Policy) -> AttackContext {
        AttackContext { evaluator, cache, policy, sims: Mutex::new(HashMap::new()) }
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    /// Leakage of `x` under the all-identity key.
    pub fn simulate(&self, x: &[u8]) -> Option<Arc<LeakagePattern>> {
        if let Some(lp) = self.sims.lock().unwrap().get(x) {
            return Some(lp.clone());
        }
        let out = self.evaluator.eval(EvaluatorKind::NoShuffle, x, &[], self.cache, self.policy).ok()?;
        let lp = Arc::new(out.leakage);
        self.sims.lock().unwrap().insert(x.to_vec(), lp.clone());
        Some(lp)
    }

    /// For each block, the in-block offset of its first dynamic-phase request.
    pub fn first_access(&self, lp: &LeakagePattern) -> Vec<Option<usize>> {
        let e = &self.evaluator;
        let mut offset: HashMap<u64, (usize, usize)> = HashMap::new();
        for (g, block) in e.blocks().iter().enumerate() {
            let mut sorted = block.clone();
            sorted.sort_unstable();
            for (o, &v) in sorted.iter().enumerate() {
                offset.insert(v as u64, (g, o));
            }
        }
        let mut first = vec![None; e.blocks().len()];
        for (_, addr) in e.dynamic_requests(lp) {
            if let Some(&(g, o)) = offset.get(&addr) {
                first[g].get_or_insert(o);
            }
        }
        first
    }

    /// Dynamic steps whose request repeats an address already requested
    /// earlier in the walk.
    pub fn collision_positions(&self, lp: &LeakagePattern) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut hits = BTreeSet::new();
        for (t, addr) in self.evaluator.dynamic_requests(lp) {
            if !seen.insert(addr) {
                hits.insert(t);
            }
        }
        hits
    }
}

/// `match(first, sim0) + match(second, sim1) - match(first, sim1) - match(second, sim0)`
/// with `dist` a distance (smaller = closer).
fn matching_score<F: Fn(&LeakagePattern, &LeakagePattern) -> f64>(
    ctx: &AttackContext,
    view: &RoundView,
    dist: F,
) -> Option<f64> {
    let s0 = ctx.simulate(&view.x0)?;
    let s1 = ctx.simulate(&view.x1)?;
    let straight = dist(&view.first, &s0) + dist(&view.second, &s1);
    let crossed = dist(&view.first, &s1) + dist(&view.second, &s0);
    Some(crossed - straight)
}

pub struct CoinFlip;

impl Attacker for CoinFlip {
    fn name(&self) -> &str {
        "coin-flip"
    }

    fn score(&self, _: &AttackContext, _: &RoundView) -> Option<f64> {
        Some(0.0)
    }
}

/// Simulate-and-match: exact equality of the whole event sequence.
pub struct ExactSequence;

impl Attacker for ExactSequence {
    fn name(&self) -> &str {
        "exact-sequence"
    }

    fn score(&self, ctx: &AttackContext, view: &RoundView) -> Option<f64> {
        matching_score(ctx, view, |a, b| if a.events == b.events { 0.0 } else { 1.0 })
    }
}

/// Number of blocks whose first dynamic request lands on a different offset.
pub struct FirstAccess;

impl Attacker for FirstAccess {
    fn name(&self) -> &str {
        "first-access"
    }

    fn score(&self, ctx: &AttackContext, view: &RoundView) -> Option<f64> {
        matching_score(ctx, view, |a, b| {
            let (fa, fb) = (ctx.first_access(a), ctx.first_access(b));
            fa.iter().zip(&fb).filter(|(x, y)| x != y).count() as f64
        })
    }
}

/// Symmetric difference of the steps at which addresses repeat.
pub struct CollisionPosition;

impl Attacker for CollisionPosition {
    fn name(&self) -> &str {
        "collision-position"
    }

    fn score(&self, ctx: &AttackContext, view: &RoundView) -> Option<f64> {
        matching_score(ctx, view, |a, b| {
            ctx.collision_positions(a).symmetric_difference(&ctx.collision_positions(b)).count() as f64
        })
    }
}

pub fn builtin_attackers() -> Vec<Box<dyn Attacker>> {
    vec![Box::new(CoinFlip), Box::new(ExactSequence), Box::new(FirstAccess), Box::new(CollisionPosition)]
}

/// Looks up a built-in attacker; `simulate-and-match` names the exact
/// sequence matcher.
pub fn attacker_by_name(name: &str) -> Option<Box<dyn Attacker>> {
    let name = if name == "simulate-and-match" { "exact-sequence" } else { name };
    builtin_attackers().into_iter().find(|a| a.name() == name)
}
