//! Experiment drivers behind the command-line tool.
//!
//! Every driver is deterministic for a fixed seed. Wall-clock columns are
//! zero unless timing is requested.

use std::io;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{equivalent, Aig, EquivMode, Objective, QoR, EXHAUSTIVE_LIMIT};
use crate::bandit::{gain, run_synthetic, Policy, SyntheticRun};
use crate::error::ExploreError;
use crate::flowspace::{count_m_repetition, count_multiset, count_none_repetition, flow_length, sample_permutation};
use crate::flowspace::{Flow, Multiset};
use crate::io::{parse_aiger, parse_blif, write_aiger, GenSpec, ParseErrors};
use crate::multistage::{run_observed, ExplorationResult, PullRecord, StageSchedule};
use crate::transforms::{apply_flow, FlowCache, TransformKind};

/// Random patterns used to check equivalence above the exhaustive limit.
pub const RANDOM_EQUIV_PATTERNS: usize = 4096;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {errors}")]
    Parse { path: String, errors: ParseErrors },
    #[error("{0}: unknown circuit format (expected .aag or .blif)")]
    Format(String),
    #[error("optimized circuit is not equivalent to the input")]
    NotEquivalent,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Circuits in the benchmark suite.
pub const SUITE_SIZE: usize = 20;

/// Member `i` of the benchmark suite: 32 inputs, 16 outputs, AND counts
/// spaced evenly from 1,000 to 5,000.
pub fn suite_spec(i: usize) -> Option<GenSpec> {
    if i >= SUITE_SIZE {
        return None;
    }
    let ands = 1000 + 4000 * i / (SUITE_SIZE - 1);
    GenSpec::new(32, ands, 16, 1000 + i as u64).ok()
}

/// Read an `.aag` or `.blif` file.
pub fn load_circuit(path: &Path) -> Result<Aig, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let shown = path.display().to_string();
    let parsed = match path.extension().and_then(|e| e.to_str()) {
        Some("aag") => parse_aiger(&text),
        Some("blif") => parse_blif(&text),
        _ => return Err(HarnessError::Format(shown)),
    };
    parsed.map_err(|errors| HarnessError::Parse { path: shown, errors })
}

/// One exploration log line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub stage: usize,
    pub iteration: usize,
    pub arm_id: usize,
    pub first_transform: String,
    /// Semicolon-joined kinds.
    pub flow: String,
    pub value: f64,
    pub reward_delta: f64,
    pub q_mean: f64,
    pub ucb_bonus: f64,
    pub cumulative_regret: f64,
    pub nodes: usize,
    pub depth: u32,
    pub elapsed_ms: u64,
}

impl LogRow {
    pub fn from_record(r: &PullRecord<f64>, elapsed_ms: u64) -> LogRow {
        LogRow {
            stage: r.stage,
            iteration: r.iteration,
            arm_id: r.arm_id,
            first_transform: r.first_transform.to_string(),
            flow: r.flow.to_string(),
            value: r.value,
            reward_delta: r.reward_delta,
            q_mean: r.q_mean,
            ucb_bonus: r.ucb_bonus,
            cumulative_regret: r.cumulative_regret,
            nodes: r.qor.and_count,
            depth: r.qor.depth,
            elapsed_ms,
        }
    }
}

/// Write `rows` as CSV with a header line.
pub fn write_csv<S: Serialize, W: io::Write>(rows: &[S], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<S: Serialize>(rows: &[S]) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

/// Parse CSV written by [`write_csv`].
pub fn read_csv<S: for<'de> Deserialize<'de>, R: io::Read>(input: R) -> Result<Vec<S>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<Result<Vec<S>, _>>()?;
    Ok(rows)
}

/// Check `after` against `before`: exhaustively up to the exhaustive input
/// limit, otherwise on seeded random patterns. Returns the mode used.
pub fn verify_equivalent(before: &Aig, after: &Aig, seed: u64) -> Result<EquivMode, HarnessError> {
    let mode = if before.num_inputs() <= EXHAUSTIVE_LIMIT {
        EquivMode::Exhaustive
    } else {
        EquivMode::Random {
            count: RANDOM_EQUIV_PATTERNS,
            seed,
        }
    };
    match equivalent(before, after, mode) {
        Ok(true) => Ok(mode),
        Ok(false) => Err(HarnessError::NotEquivalent),
        Err(e) => Err(ExploreError::from(e).into()),
    }
}

#[derive(Clone, Debug)]
pub struct ExploreConfig {
    pub schedule: StageSchedule,
    pub objective: Objective,
    pub seed: u64,
    /// Fill `elapsed_ms` with wall-clock time per pull.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub objective: Objective,
    pub stages: usize,
    pub iters_per_stage: usize,
    pub top_k: usize,
    pub kinds: Vec<TransformKind>,
    pub pulls: usize,
    pub best_flow: String,
    pub committed: Vec<String>,
    pub initial: QoR,
    #[serde(rename = "final")]
    pub final_qor: QoR,
    /// `exhaustive` or `random-4096`.
    pub equivalence: String,
}

impl Summary {
    pub fn to_json(&self) -> Result<String, HarnessError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub struct ExploreOutput {
    pub result: ExplorationResult<f64>,
    pub rows: Vec<LogRow>,
    pub summary: Summary,
    /// The optimized circuit, already checked against the input.
    pub aiger: String,
}

/// Run the multi-stage bandit on `aig` and check the result.
pub fn explore(aig: &Aig, cfg: &ExploreConfig) -> Result<ExploreOutput, HarnessError> {
    let mut elapsed = Vec::with_capacity(cfg.schedule.total_pulls());
    let mut last = Instant::now();
    let result = run_observed::<f64, _>(aig, &cfg.schedule, cfg.objective, cfg.seed, |_| {
        let now = Instant::now();
        elapsed.push(if cfg.timing { (now - last).as_millis() as u64 } else { 0 });
        last = now;
    })?;
    let mode = verify_equivalent(aig, &result.final_aig, cfg.seed)?;
    let rows = result
        .log
        .iter()
        .zip(&elapsed)
        .map(|(r, &ms)| LogRow::from_record(r, ms))
        .collect();
    let mut kinds: Vec<TransformKind> = cfg.schedule.per_stage_multisets.iter().flat_map(|m| m.kinds()).collect();
    kinds.sort();
    kinds.dedup();
    let summary = Summary {
        seed: cfg.seed,
        objective: cfg.objective,
        stages: cfg.schedule.stages,
        iters_per_stage: cfg.schedule.iters_per_stage,
        top_k: cfg.schedule.top_k,
        kinds,
        pulls: result.log.len(),
        best_flow: result.best_flow_overall.to_string(),
        committed: result.per_stage.iter().map(|s| s.committed.to_string()).collect(),
        initial: result.initial_qor,
        final_qor: result.final_qor,
        equivalence: match mode {
            EquivMode::Exhaustive => "exhaustive".to_string(),
            EquivMode::Random { count, .. } => format!("random-{count}"),
        },
    };
    let aiger = write_aiger(&result.final_aig);
    Ok(ExploreOutput {
        result,
        rows,
        summary,
        aiger,
    })
}

/// Transformed-node statistics for one flow position, relative to the
/// mean at position 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub position: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub raw_mean: f64,
}

/// Run `num_flows` random arrangements of `kinds` (each once) and profile
/// transformed nodes by position. Flows are evaluated in parallel.
pub fn profile(aig: &Aig, kinds: &[TransformKind], num_flows: usize, seed: u64) -> Result<Vec<ProfileRow>, HarnessError> {
    let ms = Multiset::uniform(kinds, 1).map_err(ExploreError::from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flows: Vec<Flow> = (0..num_flows).map(|_| sample_permutation(&ms, &mut rng)).collect();
    let start = aig.gc();
    let counts: Vec<Vec<usize>> = flows
        .par_iter()
        .map(|f| apply_flow(&start, f).1.iter().map(|r| r.tnodes).collect())
        .collect();
    Ok(profile_rows(&counts, ms.len()))
}

/// Per-position summary of `counts[flow][position]`.
pub fn profile_rows(counts: &[Vec<usize>], positions: usize) -> Vec<ProfileRow> {
    if counts.is_empty() {
        return Vec::new();
    }
    let n = counts.len() as f64;
    let mean_at = |p: usize| counts.iter().map(|c| c[p] as f64).sum::<f64>() / n;
    let base = mean_at(0);
    let norm = |x: f64| if base == 0.0 { 0.0 } else { x / base };
    (0..positions)
        .map(|p| {
            let col = counts.iter().map(|c| c[p]);
            ProfileRow {
                position: p + 1,
                mean: norm(mean_at(p)),
                min: norm(col.clone().min().unwrap_or(0) as f64),
                max: norm(col.max().unwrap_or(0) as f64),
                raw_mean: mean_at(p),
            }
        })
        .collect()
}

/// Flow-space sizes for `n` kinds repeated `m` times each.
pub fn space_uniform(n: u64, m: u64) -> String {
    let mut s = format!("n = {n}, m = {m}\n");
    s += &format!("none-repetition flows: {}\n", count_none_repetition(n));
    s += &format!("m-repetition flows: {}\n", count_m_repetition(n, m));
    s += &format!("L = {}\n", n * m);
    s
}

/// Flow-space size for an explicit repetition vector.
pub fn space_counts(counts: &[u64]) -> String {
    let joined: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
    format!(
        "m = ({})\nflows: {}\nL = {}\n",
        joined.join(", "),
        count_multiset(counts),
        flow_length(counts)
    )
}

/// One random-baseline evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub iteration: usize,
    pub flow: String,
    pub value: f64,
    pub nodes: usize,
    pub depth: u32,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug)]
pub struct Baseline {
    pub rows: Vec<BaselineRow>,
    /// Row with the highest value (the earliest on ties).
    pub best: usize,
    pub best_flow: Flow,
    pub best_qor: QoR,
}

/// Evaluate `budget` uniformly sampled arrangements of `multiset`, each
/// from the original circuit.
pub fn random_baseline(
    aig: &Aig,
    multiset: &Multiset,
    budget: usize,
    seed: u64,
    objective: Objective,
    timing: bool,
) -> Result<Baseline, HarnessError> {
    if budget == 0 {
        return Err(HarnessError::Invalid("budget must be at least 1".into()));
    }
    if multiset.is_empty() {
        return Err(ExploreError::NoKindsEnabled.into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = FlowCache::new(aig, 2);
    let base = cache.start().metrics();
    let mut rows = Vec::with_capacity(budget);
    let mut best: Option<(usize, Flow, QoR)> = None;
    for it in 0..budget {
        let t = Instant::now();
        let flow = sample_permutation(multiset, &mut rng);
        let qor = cache.run(&flow).metrics();
        let value: f64 = gain(objective, base, qor);
        rows.push(BaselineRow {
            iteration: it,
            flow: flow.to_string(),
            value,
            nodes: qor.and_count,
            depth: qor.depth,
            elapsed_ms: if timing { t.elapsed().as_millis() as u64 } else { 0 },
        });
        if best.as_ref().is_none_or(|b| value > rows[b.0].value) {
            best = Some((it, flow, qor));
        }
    }
    let (best, best_flow, best_qor) = best.expect("budget >= 1");
    Ok(Baseline {
        rows,
        best,
        best_flow,
        best_qor,
    })
}

/// One step of a synthetic bandit run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRow {
    pub policy: String,
    pub step: u64,
    pub arm: usize,
    pub reward: f64,
    pub best_arm_share: f64,
    pub cumulative_regret: f64,
}

/// UCB1 and uniform random on Bernoulli arms with the given means.
pub fn bandit_synthetic(means: &[f64], steps: u64, seed: u64) -> Result<(Vec<SyntheticRun>, Vec<SyntheticRow>), HarnessError> {
    if means.len() < 2 {
        return Err(HarnessError::Invalid("need at least two arms".into()));
    }
    if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(HarnessError::Invalid(format!("arm mean {m} is outside [0, 1]")));
    }
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for policy in [Policy::Ucb1, Policy::UniformRandom] {
        let run = run_synthetic::<f64>(means, steps, seed, policy)?;
        let mut best_pulls = 0u64;
        for s in &run.steps {
            best_pulls += u64::from(s.arm == run.best_arm);
            rows.push(SyntheticRow {
                policy: policy.name().to_string(),
                step: s.step,
                arm: s.arm,
                reward: s.reward,
                best_arm_share: best_pulls as f64 / s.step as f64,
                cumulative_regret: s.cumulative_regret,
            });
        }
        runs.push(run);
    }
    Ok((runs, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{gen_random, GenSpec};
    use crate::transforms::fixtures::chain;

    fn cfg(kinds: &[TransformKind], s: usize, m: usize, objective: Objective) -> ExploreConfig {
        ExploreConfig {
            schedule: StageSchedule::new(s, m, kinds).unwrap(),
            objective,
            seed: 3,
            timing: false,
        }
    }

    #[test]
    fn chain_depth_with_balance() {
        let out = explore(&chain(7), &cfg(&[TransformKind::Balance], 1, 4, Objective::Depth)).unwrap();
        assert_eq!(out.summary.final_qor.depth, 3);
        assert!(out.summary.best_flow.starts_with("balance"));
        assert_eq!(out.summary.equivalence, "exhaustive");
    }

    #[test]
    fn log_round_trips_and_is_deterministic() {
        let g = gen_random(&GenSpec::new(10, 200, 4, 5).unwrap());
        let c = cfg(&TransformKind::ALL, 4, 15, Objective::NodeCount);
        let a = explore(&g, &c).unwrap();
        assert_eq!(a.rows.len(), 60);
        let text = csv_string(&a.rows).unwrap();
        assert!(text.starts_with(
            "stage,iteration,arm_id,first_transform,flow,value,reward_delta,q_mean,ucb_bonus,cumulative_regret,nodes,depth,elapsed_ms\n"
        ));
        let back: Vec<LogRow> = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, a.rows);
        let b = explore(&g, &c).unwrap();
        assert_eq!(csv_string(&b.rows).unwrap(), text);
        assert_eq!(a.aiger, b.aiger);
    }

    #[test]
    fn profile_normalizes_to_first_position() {
        let g = gen_random(&GenSpec::new(10, 300, 4, 8).unwrap());
        let rows = profile(&g, &TransformKind::ALL, 10, 1).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].mean, 1.0);
        assert!(rows.iter().all(|r| r.min <= r.mean && r.mean <= r.max));
    }

    #[test]
    fn profile_of_irredundant_circuit_is_zero() {
        let mut g = Aig::new();
        let a = g.add_input();
        let b = g.add_input();
        let x = g.and(a, b);
        g.add_output(x);
        let rows = profile(&g, &TransformKind::ALL, 5, 1).unwrap();
        assert!(rows.iter().all(|r| r.mean == 0.0 && r.max == 0.0));
    }

    #[test]
    fn space_texts() {
        assert!(space_uniform(3, 1).contains("m-repetition flows: 6\n"));
        assert!(space_uniform(6, 4).contains("3246670537110000"));
        let t = space_counts(&[2, 1, 1]);
        assert!(t.contains("flows: 12\n") && t.contains("L = 4\n"));
    }

    #[test]
    fn baseline_best_dominates() {
        let g = gen_random(&GenSpec::new(10, 300, 4, 9).unwrap());
        let ms = Multiset::uniform(&TransformKind::ALL, 1).unwrap();
        let one = random_baseline(&g, &ms, 1, 4, Objective::NodeCount, false).unwrap();
        assert_eq!(one.rows.len(), 1);
        let b = random_baseline(&g, &ms, 12, 4, Objective::NodeCount, false).unwrap();
        assert!(b.rows.iter().all(|r| r.value <= b.rows[b.best].value));
        let again = random_baseline(&g, &ms, 12, 4, Objective::NodeCount, false).unwrap();
        assert_eq!(b.rows, again.rows);
        assert_eq!(apply_flow(&g, &b.best_flow).0.metrics(), b.best_qor);
    }

    #[test]
    fn synthetic_checks_means() {
        assert!(bandit_synthetic(&[0.5], 10, 1).is_err());
        assert!(bandit_synthetic(&[0.5, 1.5], 10, 1).is_err());
        let (runs, rows) = bandit_synthetic(&[1.0, 0.0], 1000, 1).unwrap();
        assert_eq!(rows.len(), 2000);
        assert!(runs[0].best_share > 0.95);
    }
}
