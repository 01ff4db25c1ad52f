use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug, Clone)]
#[command(name = "pebblemark", version, about = "Dynamic pebbling graphs, memory-hard evaluation and leakage games")]
pub struct Cli {
    /// Seed (64 hex chars or a short decimal); defaults to $PEBBLEMARK_SEED,
    /// otherwise one is generated and printed
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Worker threads for independent trials and builds
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Print the JSON report on stdout instead of a summary
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the JSON report to this file
    #[arg(long, global = true, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Write a manifest that `repro` can replay
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Build and check graph files
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Pebbling attacks and cost experiments
    #[command(subcommand)]
    Pebble(PebbleCmd),
    /// Evaluate the memory-hard function through the cache model
    #[command(subcommand)]
    Mhf(MhfCmd),
    /// Leakage indistinguishability game
    #[command(subcommand)]
    Game(GameCmd),
    /// Replay a manifest and compare report and artifact hashes
    Repro {
        #[arg(value_name = "MANIFEST")]
        file: PathBuf,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Line,
    Stack,
    Superconc,
    Fig4,
    Fig5,
    #[value(name = "random-k1")]
    RandomK1,
}

#[derive(Subcommand, Debug, Clone)]
pub enum GraphCmd {
    Build {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// block parameter: a number or `sqrt` (smallest divisor of N >= ceil(sqrt N))
        #[arg(long, default_value = "sqrt")]
        k: String,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// superconcentrator flavor: butterfly or recursive
        #[arg(long, default_value = "butterfly")]
        flavor: String,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    Verify {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        /// check the shuffling clauses; failing them exits with 1
        #[arg(long)]
        amenable: bool,
        #[arg(long)]
        groups: Option<usize>,
        #[arg(long, default_value_t = 16)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum PebbleCmd {
    /// Run one strategy (default: the generic attack) on one resolution
    Attack {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        #[arg(long, default_value = "generic")]
        strategy: String,
        #[arg(long)]
        eta: Option<usize>,
        #[arg(long)]
        g: Option<usize>,
        /// resolution key in hex; derived from the seed when absent
        #[arg(long)]
        key: Option<String>,
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Depth-reducing set by edge-class removal
    Valiant {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        #[arg(long, default_value_t = 2)]
        eta: usize,
    },
    /// Strategy costs over a grid of sizes
    Suite(SuiteArgs),
    /// Cost distribution over random resolutions
    Dist {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        #[arg(long, default_value = "generic")]
        strategy: String,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SuiteArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value = "sqrt")]
    pub k: String,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, value_delimiter = ',', default_value = "keep-all,greedy-discard,generic-grid")]
    pub strategies: Vec<String>,
    /// columnar cc data for plotting
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyArg {
    Lru,
    Fifo,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluatorArg {
    Full,
    Hybrid,
    Noshuffle,
}

#[derive(Subcommand, Debug, Clone)]
pub enum MhfCmd {
    Eval {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        /// input x in hex
        #[arg(long)]
        input: String,
        /// coins R in hex; derived from the seed when absent
        #[arg(long)]
        coins: Option<String>,
        /// cache lines; defaults to the evaluator's minimum
        #[arg(long)]
        cache: Option<usize>,
        #[arg(long, value_enum, default_value = "lru")]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value = "full")]
        evaluator: EvaluatorArg,
        #[arg(long, value_name = "HEX")]
        oracle_seed: Option<String>,
        /// leakage trace output
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// include the function output in the report
        #[arg(long)]
        emit_output: bool,
        /// write a `vector v1` line
        #[arg(long, value_name = "FILE")]
        vector: Option<PathBuf>,
    },
    /// Re-evaluate every `vector v1` line of a file
    Check {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        #[arg(long, value_name = "FILE")]
        vectors: PathBuf,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum GameCmd {
    Run {
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
        #[arg(long, default_value = "exact-sequence")]
        attacker: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// `single` or `adaptive:R`
        #[arg(long, default_value = "single")]
        mode: String,
        #[arg(long, value_enum, default_value = "full")]
        evaluator: EvaluatorArg,
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        x1: Option<String>,
        #[arg(long)]
        cache: Option<usize>,
        #[arg(long, value_enum, default_value = "lru")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 128)]
        lambda: usize,
        /// columnar advantage data for plotting
        #[arg(long, value_name = "FILE")]
        plot: Option<PathBuf>,
    },
}
