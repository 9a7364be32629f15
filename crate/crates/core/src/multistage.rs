//! Multi-stage bandit exploration.
//!
//! The pull budget is split into `s` stages of `m` pulls. Each stage runs
//! UCB1 over its own arm set on a fixed input circuit, then commits its best
//! flow; the committed circuit is the next stage's input. The top-k arms of
//! a stage hand their best flows to the next stage as candidate prefixes,
//! and the mean of their Q values seeds every next-stage arm.

use log::{debug, warn};
use rand::Rng;
use serde::Serialize;

use crate::aig::{Aig, Objective, QoR};
use crate::bandit::{self, optimistic_init, pull_prefixed, select_arm, stream_rng, update, Arm, ArmStats, RegretLog};
use crate::error::ExploreError;
use crate::flowspace::{Flow, Multiset};
use crate::scalar::Scalar;
use crate::transforms::{apply_flow, FlowCache, TransformKind};

/// The `(s, m)` splits of a 60-pull budget.
pub const PRESETS: [(usize, usize); 5] = [(1, 60), (2, 30), (3, 20), (4, 15), (6, 10)];

/// Default split for node-count exploration.
pub const DEFAULT_PRESET: (usize, usize) = (2, 30);

pub const DEFAULT_TOP_K: usize = 2;
/// Leading steps of stage flows whose results are shared between pulls.
const PREFIX_MEMO: usize = 2;

/// Copies of each kind in a stage flow.
pub const STAGE_REPS: u32 = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageSchedule {
    pub stages: usize,
    pub iters_per_stage: usize,
    pub top_k: usize,
    pub per_stage_multisets: Vec<Multiset>,
}

impl StageSchedule {
    /// `s` stages of `m` pulls. Every stage explores the same space: each
    /// kind in `kinds` appears [`STAGE_REPS`] times per flow.
    pub fn new(stages: usize, iters_per_stage: usize, kinds: &[TransformKind]) -> Result<StageSchedule, ExploreError> {
        if kinds.is_empty() {
            return Err(ExploreError::NoKindsEnabled);
        }
        let ms = Multiset::uniform(kinds, STAGE_REPS)?;
        let s = StageSchedule {
            stages,
            iters_per_stage,
            top_k: DEFAULT_TOP_K,
            per_stage_multisets: vec![ms; stages],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_top_k(mut self, top_k: usize) -> StageSchedule {
        self.top_k = top_k;
        self
    }

    pub fn total_pulls(&self) -> usize {
        self.stages * self.iters_per_stage
    }

    pub fn validate(&self) -> Result<(), ExploreError> {
        if self.stages == 0 {
            return Err(ExploreError::ZeroStages);
        }
        if self.iters_per_stage == 0 {
            return Err(ExploreError::ZeroIterations);
        }
        if self.top_k == 0 {
            return Err(ExploreError::ZeroTopK);
        }
        if self.per_stage_multisets.len() != self.stages {
            return Err(ExploreError::MultisetCount {
                stages: self.stages,
                got: self.per_stage_multisets.len(),
            });
        }
        Ok(())
    }
}

/// One logged pull.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PullRecord<T> {
    pub stage: usize,
    pub iteration: usize,
    pub arm_id: usize,
    pub first_transform: TransformKind,
    pub flow: Flow,
    pub value: T,
    pub reward_delta: T,
    pub q_mean: T,
    /// Bonus at selection time; infinite for a must-pull arm.
    pub ucb_bonus: T,
    pub cumulative_regret: T,
    pub qor: QoR,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageResult<T> {
    pub stats: Vec<ArmStats<T>>,
    pub arms: Vec<TransformKind>,
    pub best_flow: Flow,
    pub best_value: T,
    /// What was applied to the stage input; empty when no pull improved it.
    pub committed: Flow,
    pub input_qor: QoR,
    pub output_qor: QoR,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExplorationResult<T> {
    pub best_flow_overall: Flow,
    pub initial_qor: QoR,
    pub final_qor: QoR,
    pub per_stage: Vec<StageResult<T>>,
    pub log: Vec<PullRecord<T>>,
    #[serde(skip)]
    pub final_aig: Aig,
}

/// Where a stage starts from.
pub struct StageInit<T> {
    pub stats: Vec<ArmStats<T>>,
    pub prefixes: Vec<Flow>,
}

pub struct StageOutcome<T> {
    pub stats: Vec<ArmStats<T>>,
    pub best_flow: Flow,
    pub best_value: T,
    pub best_aig: Aig,
    pub log: Vec<PullRecord<T>>,
}

/// `m` select/pull/update rounds on a fixed stage input.
pub fn run_stage<T: Scalar>(
    aig: &Aig,
    arms: &[Arm],
    m: usize,
    init: StageInit<T>,
    objective: Objective,
    stage: usize,
    seed: u64,
) -> Result<StageOutcome<T>, ExploreError> {
    run_stage_with(aig, arms, m, init, objective, stage, seed, &mut |_| {})
}

#[allow(clippy::too_many_arguments)]
fn run_stage_with<T: Scalar>(
    aig: &Aig,
    arms: &[Arm],
    m: usize,
    init: StageInit<T>,
    objective: Objective,
    stage: usize,
    seed: u64,
    on_pull: &mut dyn FnMut(&PullRecord<T>),
) -> Result<StageOutcome<T>, ExploreError> {
    if m == 0 {
        return Err(ExploreError::ZeroIterations);
    }
    if arms.is_empty() {
        return Err(ExploreError::NoArms);
    }
    let mut stats = init.stats;
    let mut regret = RegretLog::default();
    let mut log = Vec::with_capacity(m);
    let mut best: Option<(T, Flow, Aig)> = None;
    let base = aig.metrics();
    let mut starts: Vec<(Flow, FlowCache)> = if init.prefixes.is_empty() {
        vec![(Flow::default(), FlowCache::new(aig, PREFIX_MEMO))]
    } else {
        init.prefixes
            .iter()
            .map(|p| (p.clone(), FlowCache::new(&apply_flow(aig, p).0, PREFIX_MEMO)))
            .collect()
    };
    for it in 0..m {
        let t = stats.iter().map(|s| s.pulls).sum::<u64>().max(1);
        let a = select_arm(&stats, t)?;
        let bonus = if stats[a].must_pull() {
            T::infinity()
        } else {
            bandit::ucb_bonus(t, stats[a].pulls)
        };
        let mut rng = stream_rng(seed, &[stage as u64, it as u64, a as u64]);
        let which = if init.prefixes.is_empty() { 0 } else { rng.gen_range(0..starts.len()) };
        let (prefix, start) = &mut starts[which];
        let out = pull_prefixed::<T, _>(&arms[a], prefix, start, base, objective, &mut rng)?;
        update(&mut stats, a, out.value, Some(&out.flow), &mut regret);
        let step = regret.steps.last().expect("just pushed");
        debug!("stage {stage} it {it}: arm {} value {} flow {}", arms[a].first, out.value, out.flow);
        log.push(PullRecord {
            stage,
            iteration: it,
            arm_id: a,
            first_transform: arms[a].first,
            flow: out.flow.clone(),
            value: out.value,
            reward_delta: step.reward_delta,
            q_mean: stats[a].mean_value,
            ucb_bonus: bonus,
            cumulative_regret: step.cumulative,
            qor: out.qor,
        });
        on_pull(log.last().expect("just pushed"));
        if best.as_ref().is_none_or(|b| out.value > b.0) {
            best = Some((out.value, out.flow, out.aig));
        }
    }
    let (best_value, best_flow, best_aig) = best.expect("m >= 1");
    Ok(StageOutcome {
        stats,
        best_flow,
        best_value,
        best_aig,
        log,
    })
}

/// Prefixes and initial Q for the stage after `stats`.
///
/// The `top_k` arms by Q (ties to the lower id) contribute their best
/// flows; a flow equal to `committed` has already been applied and becomes
/// the empty prefix. Every next-stage arm starts from the mean of those
/// arms' Q with one virtual pull.
pub fn carryover<T: Scalar>(stats: &[ArmStats<T>], top_k: usize, committed: &Flow, next_arms: usize) -> StageInit<T> {
    let mut k = top_k.max(1);
    if k > stats.len() {
        warn!("top_k {k} exceeds {} arms; clamped", stats.len());
        k = stats.len();
    }
    let mut order: Vec<usize> = (0..stats.len()).collect();
    order.sort_by(|&a, &b| {
        stats[b]
            .mean_value
            .partial_cmp(&stats[a].mean_value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let top = &order[..k];
    let q = top.iter().map(|&i| stats[i].mean_value).fold(T::zero(), |a, b| a + b) / T::of_count(k as u64);
    let prefixes = top
        .iter()
        .map(|&i| match &stats[i].best_flow {
            Some(f) if f != committed => f.clone(),
            _ => Flow::default(),
        })
        .collect();
    StageInit {
        stats: vec![ArmStats::seeded(q); next_arms],
        prefixes,
    }
}

/// Full multi-stage exploration of `aig`.
pub fn run<T: Scalar>(
    aig: &Aig,
    schedule: &StageSchedule,
    objective: Objective,
    seed: u64,
) -> Result<ExplorationResult<T>, ExploreError> {
    run_observed(aig, schedule, objective, seed, |_| {})
}

/// [`run`], calling `on_pull` right after every pull is logged.
pub fn run_observed<T: Scalar, F: FnMut(&PullRecord<T>)>(
    aig: &Aig,
    schedule: &StageSchedule,
    objective: Objective,
    seed: u64,
    mut on_pull: F,
) -> Result<ExplorationResult<T>, ExploreError> {
    schedule.validate()?;
    let original = aig.gc();
    let initial_qor = original.metrics();
    let mut current = original.clone();
    let mut overall = Flow::default();
    let mut per_stage = Vec::with_capacity(schedule.stages);
    let mut log = Vec::with_capacity(schedule.total_pulls());
    let mut init: Option<StageInit<T>> = None;

    for (stage, ms) in schedule.per_stage_multisets.iter().enumerate() {
        let arms = Arm::for_multiset(ms);
        if arms.is_empty() {
            return Err(ExploreError::NoKindsEnabled);
        }
        let start = match init.take() {
            Some(i) => i,
            None => StageInit {
                stats: optimistic_init(&current, &arms, bandit::stream_seed(seed, &[u64::MAX, stage as u64]))?,
                prefixes: Vec::new(),
            },
        };
        let input_qor = current.metrics();
        let out = run_stage_with(&current, &arms, schedule.iters_per_stage, start, objective, stage, seed, &mut on_pull)?;
        let committed = if out.best_value < T::zero() {
            Flow::default()
        } else {
            out.best_flow.clone()
        };
        if !committed.is_empty() {
            current = out.best_aig;
        }
        overall = overall.concat(&committed);
        if stage + 1 < schedule.stages {
            let next = Arm::for_multiset(&schedule.per_stage_multisets[stage + 1]).len();
            init = Some(carryover(&out.stats, schedule.top_k, &committed, next));
        }
        log.extend(out.log);
        per_stage.push(StageResult {
            stats: out.stats,
            arms: arms.iter().map(|a| a.first).collect(),
            best_flow: out.best_flow,
            best_value: out.best_value,
            committed,
            input_qor,
            output_qor: current.metrics(),
        });
    }
    Ok(ExplorationResult {
        best_flow_overall: overall,
        initial_qor,
        final_qor: current.metrics(),
        per_stage,
        log,
        final_aig: current,
    })
}

/// Apply `flow` to `aig` from scratch.
pub fn replay(aig: &Aig, flow: &Flow) -> Aig {
    if flow.is_empty() {
        aig.gc()
    } else {
        apply_flow(aig, flow).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{gen_random, GenSpec};
    use crate::transforms::fixtures;
    use TransformKind::*;

    #[test]
    fn presets_log_exact_pull_counts() {
        let g = gen_random(&GenSpec::new(10, 200, 4, 3).unwrap());
        for (s, m) in PRESETS {
            let sched = StageSchedule::new(s, m, &TransformKind::ALL).unwrap();
            let r = run::<f64>(&g, &sched, Objective::NodeCount, 9).unwrap();
            assert_eq!(r.log.len(), 60);
            assert_eq!(r.per_stage.len(), s);
            let h = replay(&g, &r.best_flow_overall);
            assert_eq!(h.metrics(), r.final_qor);
            assert_eq!(h, r.final_aig);
            assert!(r.final_qor.and_count <= r.initial_qor.and_count);
        }
    }

    #[test]
    fn single_kind_uses_one_arm() {
        let g = fixtures::chain(7);
        let sched = StageSchedule::new(1, 5, &[Balance]).unwrap();
        let r = run::<f64>(&g, &sched, Objective::Depth, 1).unwrap();
        assert!(r.log.iter().all(|p| p.arm_id == 0));
        assert_eq!(r.best_flow_overall.steps, vec![Balance; 4]);
        assert_eq!(r.final_qor.depth, 3);
    }

    #[test]
    fn one_iteration_is_one_pull() {
        let g = fixtures::absorption();
        let sched = StageSchedule::new(1, 1, &[Rewrite, Balance]).unwrap();
        let r = run::<f64>(&g, &sched, Objective::NodeCount, 4).unwrap();
        assert_eq!(r.log.len(), 1);
        assert_eq!(r.per_stage[0].best_flow, r.log[0].flow);
    }

    #[test]
    fn carryover_merges_top_arms() {
        let mut s: Vec<ArmStats<f64>> = [10.0, 8.0, 1.0]
            .iter()
            .map(|&q| ArmStats {
                pulls: 2,
                mean_value: q,
                ..ArmStats::default()
            })
            .collect();
        s[0].best_flow = Some(Flow::new(vec![Rewrite]));
        s[1].best_flow = Some(Flow::new(vec![Balance]));
        let c = carryover(&s, 2, &Flow::new(vec![Rewrite]), 4);
        assert_eq!(c.stats.len(), 4);
        assert!(c.stats.iter().all(|a| a.mean_value == 9.0 && a.pulls == 1));
        assert_eq!(c.prefixes, vec![Flow::default(), Flow::new(vec![Balance])]);
        let c = carryover(&s, 1, &Flow::default(), 2);
        assert_eq!(c.prefixes, vec![Flow::new(vec![Rewrite])]);
        assert_eq!(carryover(&s, 9, &Flow::default(), 1).prefixes.len(), 3);
    }

    #[test]
    fn zero_sizes_are_rejected() {
        assert_eq!(StageSchedule::new(0, 5, &[Balance]).unwrap_err(), ExploreError::ZeroStages);
        assert_eq!(StageSchedule::new(1, 0, &[Balance]).unwrap_err(), ExploreError::ZeroIterations);
        assert_eq!(StageSchedule::new(1, 1, &[]).unwrap_err(), ExploreError::NoKindsEnabled);
        let s = StageSchedule::new(1, 1, &[Balance]).unwrap().with_top_k(0);
        assert!(run::<f64>(&fixtures::chain(3), &s, Objective::Depth, 0).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let g = gen_random(&GenSpec::new(12, 300, 4, 8).unwrap());
        let sched = StageSchedule::new(3, 4, &TransformKind::ALL).unwrap();
        let a = run::<f64>(&g, &sched, Objective::NodeCount, 77).unwrap();
        let b = run::<f64>(&g, &sched, Objective::NodeCount, 77).unwrap();
        assert_eq!(a, b);
        let c = run::<f32>(&g, &sched, Objective::NodeCount, 77).unwrap();
        assert_eq!(c.log.len(), 12);
    }
}
