//! `flowtune`: explore synthesis flows with a multi-stage bandit.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use flowtune_core::harness::{self, ExploreConfig, HarnessError};
use flowtune_core::io::{gen_random, GenSpec};
use flowtune_core::multistage::{StageSchedule, DEFAULT_TOP_K, STAGE_REPS};
use flowtune_core::{Aig, Multiset, Objective, TransformKind};

#[derive(Parser)]
#[command(name = "flowtune", version, about = "Bandit-driven exploration of AIG synthesis flows")]
struct Cli {
    /// Worker threads for parallel sections. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the multi-stage bandit and write log, summary and optimized circuit.
    Explore(ExploreArgs),
    /// Transformed nodes per flow position over random single-use flows.
    Profile(ProfileArgs),
    /// Exact flow-space sizes.
    Space(SpaceArgs),
    /// Best of uniformly sampled flows, each run from the original circuit.
    RandomBaseline(BaselineArgs),
    /// UCB1 against uniform random on Bernoulli arms.
    BanditSynthetic(SyntheticArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Circuit file (.aag or .blif).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generated circuit as INPUTS:ANDS:OUTPUTS.
    #[arg(long, value_parser = parse_gen)]
    generate: Option<(usize, usize, usize)>,
    /// Member of the built-in benchmark suite, 0 to 19.
    #[arg(long)]
    suite: Option<usize>,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    source: Source,
    /// Seed of the generated circuit; defaults to --seed. Ignored with --suite.
    #[arg(long)]
    gen_seed: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: u64,
    /// Comma-separated transform kinds.
    #[arg(long, value_delimiter = ',', default_values_t = TransformKind::ALL.to_vec())]
    kinds: Vec<TransformKind>,
}

#[derive(Args)]
struct ExploreArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = Objective::NodeCount)]
    objective: Objective,
    /// Schedule as STAGES:ITERS.
    #[arg(long, value_parser = parse_preset, default_value = "2:30")]
    preset: (usize, usize),
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top_k: usize,
    /// Directory for explore.csv, summary.json and optimized.aag.
    #[arg(long)]
    out_dir: PathBuf,
    /// Record wall-clock milliseconds per pull.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100)]
    flows: usize,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpaceArgs {
    /// Number of transform kinds.
    #[arg(long, requires = "m", conflicts_with = "mvec")]
    n: Option<u64>,
    /// Repetitions of each kind.
    #[arg(long, requires = "n")]
    m: Option<u64>,
    /// Explicit repetition counts, e.g. 2,1,1.
    #[arg(long, value_delimiter = ',', required_unless_present = "n")]
    mvec: Option<Vec<u64>>,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    common: Common,
    /// Repetitions of each kind per flow.
    #[arg(long, default_value_t = STAGE_REPS)]
    reps: u32,
    #[arg(long, default_value_t = 60)]
    budget: usize,
    #[arg(long, default_value_t = Objective::NodeCount)]
    objective: Objective,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SyntheticArgs {
    /// Comma-separated Bernoulli means in [0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    means: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_gen(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [i, a, o] = parts.as_slice() else {
        return Err("expected INPUTS:ANDS:OUTPUTS".into());
    };
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((num(i)?, num(a)?, num(o)?))
}

fn parse_preset(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected STAGES:ITERS")?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((num(a)?, num(b)?))
}

fn load(c: &Common) -> Result<Aig, HarnessError> {
    if let Some(path) = &c.source.input {
        return harness::load_circuit(path);
    }
    let spec = match (c.source.generate, c.source.suite) {
        (Some((i, a, o)), _) => {
            GenSpec::new(i, a, o, c.gen_seed.unwrap_or(c.seed)).map_err(|e| HarnessError::Invalid(e.to_string()))?
        }
        (None, Some(k)) => harness::suite_spec(k)
            .ok_or_else(|| HarnessError::Invalid(format!("suite index {k} out of range 0..{}", harness::SUITE_SIZE)))?,
        (None, None) => unreachable!("clap enforces one source"),
    };
    Ok(gen_random(&spec))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn explore(a: &ExploreArgs) -> Result<(), HarnessError> {
    let aig = load(&a.common)?;
    let (s, m) = a.preset;
    let schedule = StageSchedule::new(s, m, &a.common.kinds)?.with_top_k(a.top_k);
    schedule.validate()?;
    let cfg = ExploreConfig {
        schedule,
        objective: a.objective,
        seed: a.common.seed,
        timing: a.timing,
    };
    let out = harness::explore(&aig, &cfg)?;
    fs::create_dir_all(&a.out_dir)?;
    fs::write(a.out_dir.join("explore.csv"), harness::csv_string(&out.rows)?)?;
    fs::write(a.out_dir.join("summary.json"), out.summary.to_json()?)?;
    fs::write(a.out_dir.join("optimized.aag"), &out.aiger)?;
    println!(
        "{} -> {} ands, depth {} -> {}; best flow: {}",
        out.summary.initial.and_count,
        out.summary.final_qor.and_count,
        out.summary.initial.depth,
        out.summary.final_qor.depth,
        if out.summary.best_flow.is_empty() { "(empty)" } else { &out.summary.best_flow }
    );
    Ok(())
}

fn profile(a: &ProfileArgs) -> Result<(), HarnessError> {
    let aig = load(&a.common)?;
    let rows = harness::profile(&aig, &a.common.kinds, a.flows, a.common.seed)?;
    emit(&a.out, &harness::csv_string(&rows)?)
}

fn space(a: &SpaceArgs) -> Result<(), HarnessError> {
    let text = match (&a.mvec, a.n, a.m) {
        (Some(v), _, _) => harness::space_counts(v),
        (None, Some(n), Some(m)) => harness::space_uniform(n, m),
        _ => return Err(HarnessError::Invalid("give --n and --m, or --mvec".into())),
    };
    print!("{text}");
    Ok(())
}

fn random_baseline(a: &BaselineArgs) -> Result<(), HarnessError> {
    let aig = load(&a.common)?;
    let ms = Multiset::uniform(&a.common.kinds, a.reps).map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let b = harness::random_baseline(&aig, &ms, a.budget, a.common.seed, a.objective, a.timing)?;
    emit(&a.out, &harness::csv_string(&b.rows)?)?;
    eprintln!(
        "best: iteration {} value {} ({} ands, depth {}) flow {}",
        b.best, b.rows[b.best].value, b.best_qor.and_count, b.best_qor.depth, b.best_flow
    );
    Ok(())
}

fn bandit_synthetic(a: &SyntheticArgs) -> Result<(), HarnessError> {
    let (runs, rows) = harness::bandit_synthetic(&a.means, a.steps, a.seed)?;
    emit(&a.out, &harness::csv_string(&rows)?)?;
    for r in &runs {
        eprintln!(
            "{}: best-arm share {:.4}, cumulative regret {:.2}",
            r.policy.name(),
            r.best_share,
            r.cumulative_regret
        );
    }
    Ok(())
}

fn report(e: &HarnessError) {
    match e {
        HarnessError::Parse { path, errors } => {
            for d in errors.diagnostics() {
                eprintln!("{path}: {d}");
            }
        }
        _ => eprintln!("error: {e}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FLOWTUNE_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build_global() {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    info!("using {} worker threads", cli.jobs.max(1));
    let res = match &cli.cmd {
        Cmd::Explore(a) => explore(a),
        Cmd::Profile(a) => profile(a),
        Cmd::Space(a) => space(a),
        Cmd::RandomBaseline(a) => random_baseline(a),
        Cmd::BanditSynthetic(a) => bandit_synthetic(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::FAILURE
        }
    }
}
