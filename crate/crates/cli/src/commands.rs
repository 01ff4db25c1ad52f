//! Subcommand implementations. Everything here is computed in memory so
//! `repro` can rerun a command without touching the filesystem.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Parser;
use rayon::prelude::*;
use serde_json::{json, Value};

use pebblemark::builders::{
    check_amenable, depth_robust_stack, line_graph, random_k1, sample_fig4, sample_fig5, superconcentrator, Flavor,
};
use pebblemark::game::{attacker_by_name, default_pairs, run_adaptive, run_single, GameConfig, Mode};
use pebblemark::graph::{graph_hash, parse, DynamicGraphSpec, GraphFile};
use pebblemark::memory::Policy;
use pebblemark::mhf::{Evaluator, EvaluatorKind, Oracle, TestVector};
use pebblemark::pebbling::{
    attack_cost_bound, cc_distribution, run_strategy, strategy_suite, valiant_bounds, valiant_reduce, AttackParams,
    Strategy,
};
use pebblemark::stats::loglog_slope;
use pebblemark::Seed;

use crate::args::*;
use crate::manifest::{sha256_hex, ExperimentManifest, TOOL, VERSION};
use crate::plot::{plot_emit, PlotKind};

#[derive(Debug)]
pub enum CliError {
    /// bad flags or values; exit code 2
    Usage(String),
    /// the inputs violate a precondition; exit code 1
    Contract(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Contract(m) => f.write_str(m),
        }
    }
}

fn contract<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Contract(e.to_string())
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Clone, Debug)]
pub struct Artifact {
    pub role: String,
    /// `None` means stdout
    pub path: Option<PathBuf>,
    pub content: String,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub command: String,
    pub exit: i32,
    pub report: Value,
    pub summary: String,
    pub artifacts: Vec<Artifact>,
    pub inputs: BTreeMap<String, String>,
}

pub fn report_text(report: &Value) -> String {
    serde_json::to_string_pretty(report).expect("report serialises") + "\n"
}

struct Ctx {
    seed: Seed,
    inputs: BTreeMap<String, String>,
    artifacts: Vec<Artifact>,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| contract(format!("{}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    fn graph(&mut self, path: &Path) -> Result<GraphFile, CliError> {
        let text = self.read(path)?;
        parse(&text).map_err(|e| contract(format!("{}: {e}", path.display())))
    }

    fn spec(&mut self, path: &Path) -> Result<DynamicGraphSpec, CliError> {
        Ok(self.graph(path)?.into_spec())
    }

    fn emit(&mut self, role: &str, path: Option<&PathBuf>, content: String) {
        self.artifacts.push(Artifact { role: role.to_string(), path: path.cloned(), content });
    }
}

fn envelope(kind: &str, seed: &Seed, data: Value) -> Value {
    json!({ "tool": TOOL, "version": VERSION, "kind": kind, "seed": seed.to_hex(), "data": data })
}

fn hex_arg(name: &str, s: &str) -> Result<Vec<u8>, CliError> {
    hex::decode(s).map_err(|e| usage(format!("--{name}: {e}")))
}

/// Smallest divisor of `n` that is at least `ceil(sqrt n)`.
pub fn sqrt_divisor(n: usize) -> usize {
    let r = (n as f64).sqrt().ceil() as usize;
    (r.max(1)..=n.max(1)).find(|k| n % k == 0).unwrap_or(n.max(1))
}

fn resolve_k(k: &str, n: usize) -> Result<usize, CliError> {
    if k == "sqrt" {
        return Ok(sqrt_divisor(n));
    }
    k.parse().map_err(|_| usage(format!("--k must be a number or `sqrt` (got {k:?})")))
}

fn policy(p: PolicyArg) -> Policy {
    match p {
        PolicyArg::Lru => Policy::Lru,
        PolicyArg::Fifo => Policy::Fifo,
    }
}

fn evaluator_kind(e: EvaluatorArg) -> EvaluatorKind {
    match e {
        EvaluatorArg::Full => EvaluatorKind::Full,
        EvaluatorArg::Hybrid => EvaluatorKind::Hybrid,
        EvaluatorArg::Noshuffle => EvaluatorKind::NoShuffle,
    }
}

/// Builds a dynamic spec for the suite families.
fn family_spec(family: Family, n: usize, k: &str, epsilon: f64, seed: &Seed) -> Result<(DynamicGraphSpec, usize), CliError> {
    match family {
        Family::Fig4 => {
            let k = resolve_k(k, n)?;
            Ok((sample_fig4(n, epsilon, k, seed).map_err(contract)?.spec, k))
        }
        Family::Fig5 => {
            let k = resolve_k(k, n)?;
            Ok((sample_fig5(n, epsilon, k, seed).map_err(contract)?.spec, k))
        }
        Family::RandomK1 => Ok((random_k1(n, seed).map_err(contract)?, 1)),
        _ => Err(usage("suite families are fig4, fig5 and random-k1")),
    }
}

pub fn execute(cli: &Cli, seed: Seed) -> Result<Outcome, CliError> {
    let mut ctx = Ctx { seed, inputs: BTreeMap::new(), artifacts: Vec::new() };
    let (command, exit, report, summary) = match &cli.command {
        Command::Graph(GraphCmd::Build { family, n, k, epsilon, flavor, out }) => {
            let (c, r, s) = graph_build(&mut ctx, *family, *n, k, *epsilon, flavor, out.as_ref())?;
            ("graph build", c, r, s)
        }
        Command::Graph(GraphCmd::Verify { graph, amenable, groups, trials }) => {
            let (c, r, s) = graph_verify(&mut ctx, graph, *amenable, *groups, *trials)?;
            ("graph verify", c, r, s)
        }
        Command::Pebble(PebbleCmd::Attack { graph, strategy, eta, g, key, trace }) => {
            let (c, r, s) = pebble_attack(&mut ctx, graph, strategy, *eta, *g, key.as_deref(), trace.as_ref())?;
            ("pebble attack", c, r, s)
        }
        Command::Pebble(PebbleCmd::Valiant { graph, eta }) => {
            let (c, r, s) = pebble_valiant(&mut ctx, graph, *eta)?;
            ("pebble valiant", c, r, s)
        }
        Command::Pebble(PebbleCmd::Suite(a)) => {
            let (c, r, s) = pebble_suite(&mut ctx, a)?;
            ("pebble suite", c, r, s)
        }
        Command::Pebble(PebbleCmd::Dist { graph, strategy, trials, delta }) => {
            let spec = ctx.spec(graph)?;
            let s: Strategy = strategy.parse().map_err(usage)?;
            let d = cc_distribution(&spec, &s, *trials, *delta, &ctx.seed.derive("dist")).map_err(contract)?;
            let summary = format!("{}: cc_delta {} over {} trials (min {}, max {})", d.strategy, d.cc_delta, d.trials, d.min, d.max);
            ("pebble dist", 0, envelope("pebble-dist", &ctx.seed, serde_json::to_value(&d).unwrap()), summary)
        }
        Command::Mhf(MhfCmd::Eval { graph, input, coins, cache, policy: p, evaluator, oracle_seed, trace, emit_output, vector }) => {
            let args = EvalArgs {
                graph,
                input,
                coins: coins.as_deref(),
                cache: *cache,
                policy: policy(*p),
                kind: evaluator_kind(*evaluator),
                oracle_seed: oracle_seed.as_deref(),
                trace: trace.as_ref(),
                emit_output: *emit_output,
                vector: vector.as_ref(),
            };
            let (c, r, s) = mhf_eval(&mut ctx, args)?;
            ("mhf eval", c, r, s)
        }
        Command::Mhf(MhfCmd::Check { graph, vectors }) => {
            let (c, r, s) = mhf_check(&mut ctx, graph, vectors)?;
            ("mhf check", c, r, s)
        }
        Command::Game(GameCmd::Run {
            graph,
            attacker,
            trials,
            mode,
            evaluator,
            x0,
            x1,
            cache,
            policy: p,
            lambda,
            plot,
        }) => {
            let args = GameArgs {
                graph,
                attacker,
                trials: *trials,
                mode,
                kind: evaluator_kind(*evaluator),
                x0: x0.as_deref(),
                x1: x1.as_deref(),
                cache: *cache,
                policy: policy(*p),
                lambda: *lambda,
                plot: plot.as_ref(),
            };
            let (c, r, s) = game_run(&mut ctx, args)?;
            ("game run", c, r, s)
        }
        Command::Repro { file } => {
            let (c, r, s) = repro(&mut ctx, file)?;
            ("repro", c, r, s)
        }
    };
    Ok(Outcome { command: command.to_string(), exit, report, summary, artifacts: ctx.artifacts, inputs: ctx.inputs })
}

type Done = (i32, Value, String);

fn graph_build(
    ctx: &mut Ctx,
    family: Family,
    n: usize,
    k: &str,
    epsilon: f64,
    flavor: &str,
    out: Option<&PathBuf>,
) -> Result<Done, CliError> {
    let seed = ctx.seed;
    let mut data = json!({ "family": format!("{family:?}").to_lowercase(), "n": n });
    let text = match family {
        Family::Line => line_graph(n).map_err(contract)?.to_text(),
        Family::Stack => {
            let (g, profile) = depth_robust_stack(n, epsilon, &seed).map_err(contract)?;
            data["epsilon"] = json!(epsilon);
            data["profile"] = serde_json::to_value(&profile).unwrap();
            g.dag.to_text()
        }
        Family::Superconc => {
            let fl: Flavor = flavor.parse().map_err(usage)?;
            data["flavor"] = json!(flavor);
            superconcentrator(n, fl).map_err(contract)?.dag.to_text()
        }
        Family::Fig4 | Family::Fig5 | Family::RandomK1 => {
            let (spec, k) = family_spec(family, n, k, epsilon, &seed)?;
            data["k"] = json!(k);
            if family != Family::RandomK1 {
                data["epsilon"] = json!(epsilon);
            }
            spec.to_text()
        }
    };
    let hash = graph_hash(&text);
    let nodes = text.lines().next().and_then(|h| h.split_whitespace().nth(1)).and_then(|v| v.parse::<usize>().ok());
    data["nodes"] = json!(nodes);
    data["graph_hash"] = json!(hash);
    let summary = format!("{} graph, {} nodes, hash {hash}", data["family"].as_str().unwrap(), nodes.unwrap_or(0));
    ctx.emit("graph", out, text);
    Ok((0, envelope("graph-build", &seed, data), summary))
}

fn graph_verify(ctx: &mut Ctx, path: &Path, amenable: bool, groups: Option<usize>, trials: usize) -> Result<Done, CliError> {
    let file = ctx.graph(path)?;
    let hash = graph_hash(&file.to_text());
    let mut data = match &file {
        GraphFile::Static(g) => json!({
            "type": "dag", "n": g.n(), "indeg_bound": g.indeg_bound(), "max_indegree": g.max_indegree(),
            "edges": g.edge_count(), "depth": g.depth(), "graph_hash": hash,
        }),
        GraphFile::Dynamic(s) => json!({
            "type": "dynamic", "n": s.n(), "indeg_bound": s.indeg_bound(), "static_len": s.static_len(),
            "dynamic_len": s.dynamic_len(), "k": s.k(), "groups": s.groups().len(), "graph_hash": hash,
        }),
    };
    let mut exit = 0;
    let mut summary = format!("{} nodes, hash {hash}", data["n"]);
    if amenable {
        let spec = file.into_spec();
        let rep = check_amenable(&spec, groups, trials);
        if !rep.pass {
            exit = 1;
            let failed: Vec<&str> = rep.clauses.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            summary += &format!("; not amenable: {}", failed.join(", "));
        } else {
            summary += "; amenable";
        }
        data["amenability"] = serde_json::to_value(&rep).unwrap();
    }
    Ok((exit, envelope("graph-verify", &ctx.seed, data), summary))
}

fn resolution_key(ctx: &Ctx, key: Option<&str>) -> Result<Vec<u8>, CliError> {
    match key {
        Some(k) => hex_arg("key", k),
        None => Ok(ctx.seed.derive("key").0[..16].to_vec()),
    }
}

fn pebble_attack(
    ctx: &mut Ctx,
    path: &Path,
    strategy: &str,
    eta: Option<usize>,
    g: Option<usize>,
    key: Option<&str>,
    trace_out: Option<&PathBuf>,
) -> Result<Done, CliError> {
    let spec = ctx.spec(path)?;
    let key = resolution_key(ctx, key)?;
    let res = spec.resolve_pseudo(&key).map_err(contract)?;
    let s: Strategy = match strategy {
        "generic" => Strategy::Generic { eta: eta.unwrap_or(2), g },
        other => other.parse().map_err(usage)?,
    };
    let (trace, cost) = run_strategy(&spec, &res, &s).map_err(contract)?;
    let mut data = json!({
        "strategy": s.to_string(), "key": hex::encode(&key), "n": spec.n(), "k": spec.k(),
        "cost": serde_json::to_value(&cost).unwrap(), "legal": true,
    });
    if let Strategy::Generic { eta, g } = s {
        let p = AttackParams::for_spec(&spec, eta, g).map_err(contract)?;
        let bound = attack_cost_bound(p.n, spec.k().max(1), spec.indeg_bound(), eta, p.g).map_err(contract)?;
        data["params"] = json!({ "eta": eta, "g": p.g, "e": p.e, "d": p.d, "delta": p.delta });
        data["bound"] = json!(bound.to_string());
        data["within_bound"] = json!((cost.cc as u128) <= bound);
    }
    let trace_text = trace.to_text();
    data["trace_sha256"] = json!(sha256_hex(trace_text.as_bytes()));
    if trace_out.is_some() {
        ctx.emit("trace", trace_out, trace_text);
    }
    let summary = format!("{}: cc {} over {} rounds", s, cost.cc, cost.rounds);
    Ok((0, envelope("pebble-attack", &ctx.seed, data), summary))
}

fn pebble_valiant(ctx: &mut Ctx, path: &Path, eta: usize) -> Result<Done, CliError> {
    let dag = match ctx.graph(path)? {
        GraphFile::Static(g) => g,
        GraphFile::Dynamic(s) => {
            let key = resolution_key(ctx, None)?;
            s.resolve_pseudo(&key).map_err(contract)?.dag
        }
    };
    let s = valiant_reduce(&dag, eta).map_err(contract)?;
    let (e, d) = valiant_bounds(dag.n(), dag.indeg_bound(), eta);
    let mask = dag.mask(&s).map_err(contract)?;
    let depth = dag.depth_masked(dag.n(), Some(&mask));
    let ok = s.len() <= e && depth <= d;
    let data = json!({
        "n": dag.n(), "eta": eta, "delta": dag.indeg_bound(), "set_size": s.len(), "depth_after": depth,
        "e_bound": e, "d_bound": d, "within_bounds": ok,
    });
    let summary = format!("|S| = {} (bound {e}), depth(G - S) = {depth} (bound {d})", s.len());
    Ok((if ok { 0 } else { 1 }, envelope("pebble-valiant", &ctx.seed, data), summary))
}

fn pebble_suite(ctx: &mut Ctx, a: &SuiteArgs) -> Result<Done, CliError> {
    let seed = ctx.seed;
    let names: Vec<&str> = a.strategies.iter().map(String::as_str).collect();
    let per_n: Vec<Result<Vec<Value>, CliError>> = a
        .n_grid
        .par_iter()
        .map(|&n| {
            let (spec, k) = family_spec(a.family, n, &a.k, a.epsilon, &seed)?;
            let res = spec.resolve_pseudo(&seed.derive_index("key", n as u64).0).map_err(contract)?;
            let suite = strategy_suite(&spec, &res, &names).map_err(contract)?;
            Ok(suite
                .into_iter()
                .map(|(name, c)| {
                    json!({ "n": n, "k": k, "nodes": spec.n(), "strategy": name, "cc": c.cc,
                            "rounds": c.rounds, "max_pebbles": c.max_pebbles })
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_n {
        rows.extend(r?);
    }
    // fit only strategies present at every grid size
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        series
            .entry(r["strategy"].as_str().unwrap().to_string())
            .or_default()
            .push((r["n"].as_f64().unwrap(), r["cc"].as_f64().unwrap()));
    }
    let mut slopes = BTreeMap::new();
    for (name, pts) in &series {
        if pts.len() == a.n_grid.len() && pts.len() >= 2 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            slopes.insert(name.clone(), loglog_slope(&xs, &ys));
        }
    }
    let data = json!({
        "family": format!("{:?}", a.family).to_lowercase(), "epsilon": a.epsilon, "k_rule": a.k,
        "n_grid": a.n_grid, "strategies": a.strategies, "rows": rows, "slopes": slopes,
    });
    let report = envelope("pebble-suite", &seed, data);
    if a.plot.is_some() {
        ctx.emit("plot", a.plot.as_ref(), plot_emit(&report, PlotKind::Cc).map_err(contract)?);
    }
    let summary = slopes.iter().map(|(k, v)| format!("{k}: slope {v:.3}")).collect::<Vec<_>>().join("\n");
    Ok((0, report, summary))
}

struct EvalArgs<'a> {
    graph: &'a Path,
    input: &'a str,
    coins: Option<&'a str>,
    cache: Option<usize>,
    policy: Policy,
    kind: EvaluatorKind,
    oracle_seed: Option<&'a str>,
    trace: Option<&'a PathBuf>,
    emit_output: bool,
    vector: Option<&'a PathBuf>,
}

fn evaluator_for(spec: &DynamicGraphSpec, oracle_seed: Option<&str>) -> Result<Evaluator, CliError> {
    let oracle = match oracle_seed {
        Some(s) => Oracle::with_seed(&hex_arg("oracle-seed", s)?),
        None => Oracle::default(),
    };
    Evaluator::new(spec, &oracle).map_err(contract)
}

fn mhf_eval(ctx: &mut Ctx, a: EvalArgs<'_>) -> Result<Done, CliError> {
    let spec = ctx.spec(a.graph)?;
    let hash = graph_hash(&spec.to_text());
    let x = hex_arg("input", a.input)?;
    let coins = match a.coins {
        Some(c) => hex_arg("coins", c)?,
        None => ctx.seed.derive("coins").0[..16].to_vec(),
    };
    let e = evaluator_for(&spec, a.oracle_seed)?;
    let cache = a.cache.unwrap_or_else(|| e.required_cache());
    let out = e.eval(a.kind, &x, &coins, cache, a.policy).map_err(contract)?;
    let trace = out.leakage.to_text();
    let mut data = json!({
        "graph_hash": hash, "input": hex::encode(&x), "coins": hex::encode(&coins), "evaluator": a.kind.to_string(),
        "cache": cache, "policy": a.policy.to_string(), "events": out.leakage.events.len(),
        "requests": out.leakage.requests().count(), "stores": out.leakage.stores().count(),
        "trace_sha256": sha256_hex(trace.as_bytes()),
    });
    let mut summary = format!("{} events, trace {}", out.leakage.events.len(), &data["trace_sha256"].as_str().unwrap()[..16]);
    if a.emit_output {
        data["output"] = json!(hex::encode(&out.output));
        summary = format!("{}\n{summary}", hex::encode(&out.output));
    }
    if a.trace.is_some() {
        ctx.emit("trace", a.trace, trace);
    }
    if a.vector.is_some() {
        let v = TestVector { graph_hash: hash, x, coins, output: out.output };
        ctx.emit("vector", a.vector, v.to_line() + "\n");
    }
    Ok((0, envelope("mhf-eval", &ctx.seed, data), summary))
}

fn mhf_check(ctx: &mut Ctx, graph: &Path, vectors: &Path) -> Result<Done, CliError> {
    let spec = ctx.spec(graph)?;
    let hash = graph_hash(&spec.to_text());
    let text = ctx.read(vectors)?;
    let e = evaluator_for(&spec, None)?;
    let mut results = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = TestVector::parse(line).map_err(|m| contract(format!("{}:{}: {m}", vectors.display(), i + 1)))?;
        let ok = v.graph_hash == hash && v.verify(&e).map_err(contract)?;
        results.push(json!({ "line": i + 1, "pass": ok }));
    }
    let failed = results.iter().filter(|r| r["pass"] == json!(false)).count();
    let data = json!({ "graph_hash": hash, "vectors": results.len(), "failed": failed, "results": results });
    let summary = format!("{} vectors, {failed} failed", results.len());
    Ok((if failed == 0 { 0 } else { 1 }, envelope("mhf-check", &ctx.seed, data), summary))
}

struct GameArgs<'a> {
    graph: &'a Path,
    attacker: &'a str,
    trials: usize,
    mode: &'a str,
    kind: EvaluatorKind,
    x0: Option<&'a str>,
    x1: Option<&'a str>,
    cache: Option<usize>,
    policy: Policy,
    lambda: usize,
    plot: Option<&'a PathBuf>,
}

fn game_run(ctx: &mut Ctx, a: GameArgs<'_>) -> Result<Done, CliError> {
    let spec = ctx.spec(a.graph)?;
    let hash = graph_hash(&spec.to_text());
    let mode: Mode = a.mode.parse().map_err(usage)?;
    let attacker = attacker_by_name(a.attacker)
        .ok_or_else(|| usage(format!("unknown attacker {:?} (coin-flip, exact-sequence, first-access, collision-position)", a.attacker)))?;
    let e = Arc::new(evaluator_for(&spec, None)?);
    let cfg = GameConfig {
        trials: a.trials,
        lambda: a.lambda,
        mode,
        evaluator: a.kind,
        cache: a.cache,
        policy: a.policy,
        seed: ctx.seed.derive("game"),
        budget: None,
    };
    let defaults = default_pairs(16).swap_remove(0);
    let x0 = a.x0.map(|s| hex_arg("x0", s)).transpose()?.unwrap_or(defaults.0);
    let x1 = a.x1.map(|s| hex_arg("x1", s)).transpose()?.unwrap_or(defaults.1);
    let rep = match mode {
        Mode::Single => run_single(e, cfg, attacker.as_ref(), &x0, &x1),
        Mode::Adaptive(_) => run_adaptive(e, cfg, attacker.as_ref(), x0.len()),
    }
    .map_err(contract)?;
    let mut data = serde_json::to_value(&rep).unwrap();
    data["graph_hash"] = json!(hash);
    data["x0"] = json!(hex::encode(&x0));
    data["x1"] = json!(hex::encode(&x1));
    let report = envelope("game-run", &ctx.seed, data);
    if a.plot.is_some() {
        ctx.emit("plot", a.plot, plot_emit(&report, PlotKind::Advantage).map_err(contract)?);
    }
    let est = rep.estimate;
    let summary = format!(
        "{} vs {}: {}/{} wins, advantage {:.4}, 95% CI [{:.4}, {:.4}]",
        rep.attacker, rep.evaluator, est.wins, est.trials, est.advantage, est.ci.0, est.ci.1
    );
    Ok((0, report, summary))
}

fn repro(ctx: &mut Ctx, file: &Path) -> Result<Done, CliError> {
    let text = ctx.read(file)?;
    let m = ExperimentManifest::from_json(&text).map_err(|e| contract(format!("{}: {e}", file.display())))?;
    let mut changed = Vec::new();
    for (path, want) in &m.inputs {
        let now = std::fs::read(path).map(|b| sha256_hex(&b)).unwrap_or_default();
        if &now != want {
            changed.push(path.clone());
        }
    }
    let mut argv = vec![TOOL.to_string()];
    argv.extend(m.argv.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| contract(format!("manifest argv: {e}")))?;
    if matches!(cli.command, Command::Repro { .. }) {
        return Err(contract("a manifest cannot replay another manifest"));
    }
    let seed: Seed = m.seed.parse().map_err(contract)?;
    let again = execute(&cli, seed)?;
    let actual_report = sha256_hex(report_text(&again.report).as_bytes());
    let mut artifacts = Vec::new();
    let mut same = actual_report == m.report_sha256 && changed.is_empty();
    let produced: BTreeMap<&str, String> =
        again.artifacts.iter().map(|a| (a.role.as_str(), sha256_hex(a.content.as_bytes()))).collect();
    for (role, want) in &m.artifacts {
        let got = produced.get(role.as_str()).cloned().unwrap_or_default();
        same &= &got == want;
        artifacts.push(json!({ "role": role, "expected": want, "actual": got }));
    }
    let data = json!({
        "manifest": file.display().to_string(), "command": m.command, "inputs_changed": changed,
        "report_sha256": { "expected": m.report_sha256, "actual": actual_report },
        "artifacts": artifacts, "identical": same,
    });
    let summary = if same { "identical".to_string() } else { "MISMATCH".to_string() };
    Ok((if same { 0 } else { 1 }, envelope("repro", &ctx.seed, data), summary))
}
