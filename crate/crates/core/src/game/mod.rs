//! The leakage indistinguishability game: a challenger evaluates two inputs
//! on fresh coins, hands over the two leakage patterns in an order fixed by
//! a hidden bit, and the attacker guesses the bit.

mod attackers;

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use attackers::{builtin_attackers, attacker_by_name, AttackContext, CoinFlip, CollisionPosition, ExactSequence, FirstAccess};

use crate::memory::{LeakagePattern, Policy};
use crate::mhf::{EvalError, Evaluator, EvaluatorKind};
use crate::seed::Seed;
use crate::stats::wilson;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Mode {
    Single,
    Adaptive(usize),
}

impl Mode {
    pub fn rounds(self) -> usize {
        match self {
            Mode::Single => 1,
            Mode::Adaptive(r) => r,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        if s == "single" {
            return Ok(Mode::Single);
        }
        match s.strip_prefix("adaptive:").map(str::parse::<usize>) {
            Some(Ok(r)) if r >= 1 => Ok(Mode::Adaptive(r)),
            _ => Err(format!("mode must be `single` or `adaptive:R` with R >= 1 (got {s:?})")),
        }
    }
}

impl From<Mode> for String {
    fn from(m: Mode) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Mode {
    type Error = String;

    fn try_from(s: String) -> Result<Mode, String> {
        s.parse()
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Single => f.write_str("single"),
            Mode::Adaptive(r) => write!(f, "adaptive:{r}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GameConfig {
    pub trials: usize,
    /// coin length in bits
    pub lambda: usize,
    pub mode: Mode,
    pub evaluator: EvaluatorKind,
    /// cache lines; `None` uses the evaluator's minimum
    pub cache: Option<usize>,
    pub policy: Policy,
    pub seed: Seed,
    /// wall-clock budget per attacker decision; overruns count as losses
    pub budget: Option<Duration>,
}

impl GameConfig {
    pub fn new(trials: usize, evaluator: EvaluatorKind, seed: Seed) -> GameConfig {
        GameConfig {
            trials,
            lambda: 128,
            mode: Mode::Single,
            evaluator,
            cache: None,
            policy: Policy::Lru,
            seed,
            budget: None,
        }
    }

    fn validate(&self) -> Result<(), GameError> {
        if self.trials == 0 {
            return Err(GameError::Config("at least one trial".into()));
        }
        if self.mode.rounds() == 0 {
            return Err(GameError::Config("at least one round".into()));
        }
        if self.lambda == 0 || self.lambda % 8 != 0 {
            return Err(GameError::Config("lambda must be a positive multiple of 8".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("challenge inputs must differ")]
    SameInputs,
    #[error("coins reused across trials")]
    CoinReuse,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// What the attacker sees of one round: the inputs and the two patterns in
/// challenger order `(lp_b, lp_{1-b})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundView {
    pub x0: Vec<u8>,
    pub x1: Vec<u8>,
    pub first: LeakagePattern,
    pub second: LeakagePattern,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameTranscript {
    pub rounds: Vec<RoundView>,
    pub b: bool,
    /// `None` when the attacker aborted or ran over budget
    pub guess: Option<bool>,
}

impl GameTranscript {
    pub fn won(&self) -> bool {
        self.guess == Some(self.b)
    }

    /// Digest over inputs and both patterns of every round.
    pub fn hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for r in &self.rounds {
            for part in [&r.x0, &r.x1] {
                h.update((part.len() as u64).to_be_bytes());
                h.update(part);
            }
            h.update(r.first.to_text());
            h.update(r.second.to_text());
        }
        h.update([self.b as u8, self.guess.map_or(2, |g| g as u8)]);
        h.finalize().into()
    }
}

/// A seeded attacker program. `score` > 0 favours `b = 0`.
pub trait Attacker: Send + Sync {
    fn name(&self) -> &str;

    /// Inputs for `round`; the default replays the challenger's suggestion.
    fn choose(&self, _round: usize, _history: &[RoundView], suggested: (Vec<u8>, Vec<u8>), _rng: &mut ChaCha20Rng) -> (Vec<u8>, Vec<u8>) {
        suggested
    }

    fn score(&self, ctx: &AttackContext, view: &RoundView) -> Option<f64>;

    /// Sum of per-round scores, coin toss on a tie. `true` means `b' = 1`.
    fn guess(&self, ctx: &AttackContext, transcript: &[RoundView], rng: &mut ChaCha20Rng) -> Option<bool> {
        let mut total = 0.0;
        for v in transcript {
            total += self.score(ctx, v)?;
        }
        let coin: bool = rng.gen();
        Some(if total > 0.0 {
            false
        } else if total < 0.0 {
            true
        } else {
            coin
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvantageEstimate {
    pub wins: u64,
    pub trials: u64,
    pub advantage: f64,
    /// 95% Wilson interval on the win rate
    pub win_rate_ci: (f64, f64),
    /// the same interval mapped through `|p - 1/2|`
    pub ci: (f64, f64),
}

impl AdvantageEstimate {
    pub fn from_counts(wins: u64, trials: u64) -> AdvantageEstimate {
        let (lo, hi) = wilson(wins, trials, 0.95);
        let (dl, dh) = ((lo - 0.5).abs(), (hi - 0.5).abs());
        let ci = if lo <= 0.5 && 0.5 <= hi { (0.0, dl.max(dh)) } else { (dl.min(dh), dl.max(dh)) };
        AdvantageEstimate {
            wins,
            trials,
            advantage: (wins as f64 / trials as f64 - 0.5).abs(),
            win_rate_ci: (lo, hi),
            ci,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub attacker: String,
    pub evaluator: EvaluatorKind,
    pub mode: Mode,
    pub trials: usize,
    pub lambda: usize,
    pub cache: usize,
    pub policy: Policy,
    pub seed: String,
    pub estimate: AdvantageEstimate,
    pub aborted: u64,
    /// SHA-256 over every trial's transcript digest, in trial order
    pub transcript_hash: String,
    pub coin_log_hash: String,
}

/// Default challenge pairs: all-zero vs all-one, then single-bit flips.
pub fn default_pairs(len: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    let zero = vec![0u8; len];
    let one = vec![0xffu8; len];
    let mut zero_flip = zero.clone();
    zero_flip[len - 1] ^= 1;
    let mut one_flip = one.clone();
    one_flip[0] ^= 0x80;
    vec![(zero.clone(), one.clone()), (zero, zero_flip), (one, one_flip)]
}

struct Trial {
    transcript: GameTranscript,
    coins: Vec<Vec<u8>>,
}

pub struct Challenger {
    evaluator: Arc<Evaluator>,
    ctx: AttackContext,
    cfg: GameConfig,
    cache: usize,
}

impl Challenger {
    pub fn new(evaluator: Arc<Evaluator>, cfg: GameConfig) -> Result<Challenger, GameError> {
        cfg.validate()?;
        let cache = cfg.cache.unwrap_or_else(|| evaluator.required_cache());
        if cache < evaluator.required_cache() {
            return Err(GameError::Eval(EvalError::Config(format!(
                "cache of {cache} lines is below the required {}",
                evaluator.required_cache()
            ))));
        }
        let ctx = AttackContext::new(evaluator.clone(), cache, cfg.policy);
        Ok(Challenger { evaluator, ctx, cfg, cache })
    }

    pub fn context(&self) -> &AttackContext {
        &self.ctx
    }

    fn trial(
        &self,
        attacker: &dyn Attacker,
        index: usize,
        rounds: usize,
        suggest: &(dyn Fn(usize) -> (Vec<u8>, Vec<u8>) + Sync),
    ) -> Result<Trial, GameError> {
        let seed = self.cfg.seed.derive_index("trial", index as u64);
        let mut rng = seed.derive("challenger").rng();
        let mut arng = seed.derive("attacker").rng();
        let b: bool = rng.gen();
        let mut views = Vec::with_capacity(rounds);
        let mut coins = Vec::with_capacity(2 * rounds);
        for round in 0..rounds {
            let (x0, x1) = attacker.choose(round, &views, suggest(round), &mut arng);
            if x0 == x1 {
                return Err(GameError::SameInputs);
            }
            let mut r0 = vec![0u8; self.cfg.lambda / 8];
            let mut r1 = vec![0u8; self.cfg.lambda / 8];
            rng.fill_bytes(&mut r0);
            rng.fill_bytes(&mut r1);
            let lp0 = self.evaluator.eval(self.cfg.evaluator, &x0, &r0, self.cache, self.cfg.policy)?.leakage;
            let lp1 = self.evaluator.eval(self.cfg.evaluator, &x1, &r1, self.cache, self.cfg.policy)?.leakage;
            let (first, second) = if b { (lp1, lp0) } else { (lp0, lp1) };
            views.push(RoundView { x0, x1, first, second });
            coins.push(r0);
            coins.push(r1);
        }
        let start = Instant::now();
        let mut guess = attacker.guess(&self.ctx, &views, &mut arng);
        if self.cfg.budget.is_some_and(|limit| start.elapsed() > limit) {
            guess = None;
        }
        Ok(Trial { transcript: GameTranscript { rounds: views, b, guess }, coins })
    }

    /// Plays one trial and returns its full transcript.
    pub fn transcript(&self, attacker: &dyn Attacker, index: usize, x0: &[u8], x1: &[u8]) -> Result<GameTranscript, GameError> {
        let pair = (x0.to_vec(), x1.to_vec());
        let suggest = move |_| pair.clone();
        Ok(self.trial(attacker, index, self.cfg.mode.rounds(), &suggest)?.transcript)
    }

    fn play(
        &self,
        attacker: &dyn Attacker,
        rounds: usize,
        suggest: &(dyn Fn(usize) -> (Vec<u8>, Vec<u8>) + Sync),
    ) -> Result<GameReport, GameError> {
        let trials: Vec<Result<(bool, bool, [u8; 32], Vec<Vec<u8>>), GameError>> = (0..self.cfg.trials)
            .into_par_iter()
            .map(|i| {
                let t = self.trial(attacker, i, rounds, suggest)?;
                Ok((t.transcript.won(), t.transcript.guess.is_none(), t.transcript.hash(), t.coins))
            })
            .collect();
        let mut wins = 0u64;
        let mut aborted = 0u64;
        let mut th = Sha256::new();
        let mut ch = Sha256::new();
        let mut log = HashSet::new();
        for t in trials {
            let (won, abort, hash, coins) = t?;
            wins += won as u64;
            aborted += abort as u64;
            th.update(hash);
            for c in coins {
                ch.update(&c);
                if !log.insert(c) {
                    return Err(GameError::CoinReuse);
                }
            }
        }
        Ok(GameReport {
            attacker: attacker.name().to_string(),
            evaluator: self.cfg.evaluator,
            mode: self.cfg.mode,
            trials: self.cfg.trials,
            lambda: self.cfg.lambda,
            cache: self.cache,
            policy: self.cfg.policy,
            seed: self.cfg.seed.to_hex(),
            estimate: AdvantageEstimate::from_counts(wins, self.cfg.trials as u64),
            aborted,
            transcript_hash: hex::encode(th.finalize()),
            coin_log_hash: hex::encode(ch.finalize()),
        })
    }

    /// `T` independent single-round games on the fixed pair `(x0, x1)`.
    pub fn run_single(&self, attacker: &dyn Attacker, x0: &[u8], x1: &[u8]) -> Result<GameReport, GameError> {
        if x0 == x1 {
            return Err(GameError::SameInputs);
        }
        let pair = (x0.to_vec(), x1.to_vec());
        let suggest = move |_| pair.clone();
        self.play(attacker, 1, &suggest)
    }

    /// `T` games of `r` rounds each under one hidden bit; the challenger
    /// suggests the default pairs in turn and the attacker may override.
    pub fn run_adaptive(&self, attacker: &dyn Attacker, input_len: usize) -> Result<GameReport, GameError> {
        let pairs = default_pairs(input_len.max(1));
        let suggest = move |round: usize| pairs[round % pairs.len()].clone();
        self.play(attacker, self.cfg.mode.rounds(), &suggest)
    }
}

pub fn run_single(
    evaluator: Arc<Evaluator>,
    config: GameConfig,
    attacker: &dyn Attacker,
    x0: &[u8],
    x1: &[u8],
) -> Result<GameReport, GameError> {
    Challenger::new(evaluator, config)?.run_single(attacker, x0, x1)
}

pub fn run_adaptive(
    evaluator: Arc<Evaluator>,
    config: GameConfig,
    attacker: &dyn Attacker,
    input_len: usize,
) -> Result<GameReport, GameError> {
    Challenger::new(evaluator, config)?.run_adaptive(attacker, input_len)
}
