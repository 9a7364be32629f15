//! UCB1 over first-transform-conditioned flow distributions.
//!
//! Each arm fixes the first transform of a flow; pulling it samples a random
//! arrangement of the remaining multiset, runs the flow on the stage input
//! and observes the objective gain. Selection maximizes the normalized mean
//! gain plus `sqrt(ln t / 2N)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::aig::{Aig, Objective, QoR};
use crate::error::ExploreError;
use crate::flowspace::{sample_conditioned, Flow, Multiset};
use crate::scalar::Scalar;
use crate::transforms::{apply_flow, count_transformable, FlowCache, TransformKind};

/// Exploration bonus `sqrt(ln t / (2 n))`.
///
/// # Panics
/// If `t == 0` or `n == 0`.
pub fn ucb_bonus<T: Scalar>(t: u64, n: u64) -> T {
    assert!(t >= 1 && n >= 1, "ucb_bonus needs t >= 1 and n >= 1");
    (T::of_count(t).ln() / (T::of(2.0) * T::of_count(n))).sqrt()
}

/// Independent stream seed for one (stage, iteration, arm) slot.
pub fn stream_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix(master ^ 0x6a09_e667_f3bc_c908);
    for &p in parts {
        h = splitmix(h ^ p.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_rng(master: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, parts))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Arm {
    pub id: usize,
    pub first: TransformKind,
    pub multiset: Multiset,
}

impl Arm {
    /// One arm per kind of `multiset`, in kind order.
    pub fn for_multiset(multiset: &Multiset) -> Vec<Arm> {
        multiset
            .kinds()
            .enumerate()
            .map(|(id, first)| Arm {
                id,
                first,
                multiset: multiset.clone(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArmStats<T> {
    pub pulls: u64,
    pub mean_value: T,
    pub best_value: Option<T>,
    pub best_flow: Option<Flow>,
    pub last_value: Option<T>,
    /// Set when the mean was seeded without a real pull.
    pub initialized: bool,
    /// Largest |value| this arm has seen, initial value included.
    pub max_abs: T,
    /// Real pulls and the sum of their values, without the seeded prior.
    pub observed: u64,
    pub observed_sum: T,
}

impl<T: Scalar> Default for ArmStats<T> {
    fn default() -> Self {
        ArmStats {
            pulls: 0,
            mean_value: T::zero(),
            best_value: None,
            best_flow: None,
            last_value: None,
            initialized: false,
            max_abs: T::zero(),
            observed: 0,
            observed_sum: T::zero(),
        }
    }
}

impl<T: Scalar> ArmStats<T> {
    /// Stats seeded with `q` as if observed once.
    pub fn seeded(q: T) -> Self {
        ArmStats {
            pulls: 1,
            mean_value: q,
            initialized: true,
            max_abs: q.abs(),
            ..ArmStats::default()
        }
    }

    pub fn must_pull(&self) -> bool {
        self.pulls == 0 && !self.initialized
    }

    fn observe(&mut self, value: T, flow: Option<&Flow>) {
        self.pulls += 1;
        self.mean_value = self.mean_value + (value - self.mean_value) / T::of_count(self.pulls);
        if self.best_value.is_none_or(|b| value > b) {
            self.best_value = Some(value);
            self.best_flow = flow.cloned();
        }
        self.last_value = Some(value);
        self.max_abs = self.max_abs.max(value.abs());
        self.observed += 1;
        self.observed_sum = self.observed_sum + value;
    }

    /// Mean of real pulls only; `None` before the first one.
    pub fn observed_mean(&self) -> Option<T> {
        (self.observed > 0).then(|| self.observed_sum / T::of_count(self.observed))
    }
}

/// Running max |value| over all arms; the normalizer for Q.
pub fn value_scale<T: Scalar>(stats: &[ArmStats<T>]) -> T {
    stats.iter().map(|s| s.max_abs).fold(T::zero(), T::max)
}

/// Q(a) divided by the running max |value|; 0 while nothing nonzero was seen.
pub fn normalized_q<T: Scalar>(s: &ArmStats<T>, scale: T) -> T {
    if scale > T::zero() {
        s.mean_value / scale
    } else {
        T::zero()
    }
}

/// UCB1 choice: the lowest-id must-pull arm if any, else the argmax of
/// normalized Q plus bonus with ties to the lowest id.
pub fn select_arm<T: Scalar>(stats: &[ArmStats<T>], t: u64) -> Result<usize, ExploreError> {
    if stats.is_empty() {
        return Err(ExploreError::NoArms);
    }
    if let Some(i) = stats.iter().position(ArmStats::must_pull) {
        return Ok(i);
    }
    let scale = value_scale(stats);
    let t = t.max(1);
    let mut best = 0;
    let mut best_score = T::neg_infinity();
    for (i, s) in stats.iter().enumerate() {
        let score = normalized_q(s, scale) + ucb_bonus::<T>(t, s.pulls.max(1));
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegretStep<T> {
    pub arm: usize,
    pub value: T,
    /// value(t) - value(t-1) across arms.
    pub reward_delta: T,
    pub regret: T,
    pub cumulative: T,
}

/// Per-step record of a bandit run. Regret is measured against the best
/// empirical arm mean and clamped at zero, so the cumulative sum never
/// decreases.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RegretLog<T> {
    pub steps: Vec<RegretStep<T>>,
}

impl<T: Scalar> RegretLog<T> {
    pub fn cumulative(&self) -> T {
        self.steps.last().map_or(T::zero(), |s| s.cumulative)
    }

    pub fn last_value(&self) -> Option<T> {
        self.steps.last().map(|s| s.value)
    }
}

/// Gap of every arm's mean to the best mean.
pub fn gaps<T: Scalar>(stats: &[ArmStats<T>]) -> Vec<T> {
    let best = stats.iter().map(|s| s.mean_value).fold(T::neg_infinity(), T::max);
    stats.iter().map(|s| best - s.mean_value).collect()
}

/// Record `value` for `arm` and append the step to `log`.
pub fn update<T: Scalar>(stats: &mut [ArmStats<T>], arm: usize, value: T, flow: Option<&Flow>, log: &mut RegretLog<T>) {
    let delta = value - log.last_value().unwrap_or(T::zero());
    stats[arm].observe(value, flow);
    // Against observed means: a seeded prior is not an outcome.
    let best_mean = stats
        .iter()
        .filter_map(|s| s.observed_mean())
        .fold(T::neg_infinity(), T::max);
    let regret = (best_mean - value).max(T::zero());
    let cumulative = log.cumulative() + regret;
    log.steps.push(RegretStep {
        arm,
        value,
        reward_delta: delta,
        regret,
        cumulative,
    });
}

/// Objective gain of going from `before` to `after` (positive is better).
pub fn gain<T: Scalar>(objective: Objective, before: QoR, after: QoR) -> T {
    T::of_count(before.objective_value(objective)) - T::of_count(after.objective_value(objective))
}

pub struct PullOutcome<T> {
    pub flow: Flow,
    pub value: T,
    pub aig: Aig,
    pub qor: QoR,
}

/// Sample `prefix ++ conditioned arrangement` for `arm` and run it on `aig`.
pub fn pull<T: Scalar, R: Rng + ?Sized>(
    arm: &Arm,
    prefix: &Flow,
    aig: &Aig,
    objective: Objective,
    rng: &mut R,
) -> Result<PullOutcome<T>, ExploreError> {
    let (start, _) = apply_flow(aig, prefix);
    let mut cache = FlowCache::new(&start, 0);
    pull_prefixed(arm, prefix, &mut cache, aig.metrics(), objective, rng)
}

/// [`pull`] with the prefix already applied: `start` runs flows from
/// `prefix` applied to a graph whose metrics are `base`. Gives the same
/// outcome as `pull`.
pub fn pull_prefixed<T: Scalar, R: Rng + ?Sized>(
    arm: &Arm,
    prefix: &Flow,
    start: &mut FlowCache,
    base: QoR,
    objective: Objective,
    rng: &mut R,
) -> Result<PullOutcome<T>, ExploreError> {
    let tail = sample_conditioned(arm.first, &arm.multiset, rng)?;
    let out = start.run(&tail);
    let qor = out.metrics();
    Ok(PullOutcome {
        value: gain(objective, base, qor),
        flow: prefix.concat(&tail),
        aig: out,
        qor,
    })
}

/// Transformable-node counts of every kind on `aig`, computed in parallel.
pub fn transformable_counts(aig: &Aig, kinds: &[TransformKind]) -> Vec<(TransformKind, usize)> {
    kinds.par_iter().map(|&k| (k, count_transformable(aig, k))).collect()
}

/// Initial Q of every arm from one sampled arrangement per arm, scored on
/// the unmodified graph. Step `i` of the sample contributes the
/// transformable count of its kind weighted by `1 / (i + 1)`: every sample
/// holds the same kinds, so only the order can tell arms apart, and early
/// steps do most of the work.
pub fn optimistic_init<T: Scalar>(aig: &Aig, arms: &[Arm], seed: u64) -> Result<Vec<ArmStats<T>>, ExploreError> {
    let mut kinds: Vec<TransformKind> = arms.iter().flat_map(|a| a.multiset.kinds()).collect();
    kinds.sort();
    kinds.dedup();
    let counts = transformable_counts(aig, &kinds);
    let count_of = |k: TransformKind| counts.iter().find(|c| c.0 == k).map_or(0, |c| c.1);
    arms.par_iter()
        .map(|arm| {
            let mut rng = stream_rng(seed, &[arm.id as u64]);
            let flow = sample_conditioned(arm.first, &arm.multiset, &mut rng)?;
            let q = flow
                .steps
                .iter()
                .enumerate()
                .map(|(i, &k)| T::of_count(count_of(k) as u64) / T::of_count(i as u64 + 1))
                .fold(T::zero(), |a, b| a + b);
            Ok(ArmStats::seeded(q))
        })
        .collect()
}

/// Policy for the synthetic Bernoulli bandit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Policy {
    Ucb1,
    UniformRandom,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Ucb1 => "ucb1",
            Policy::UniformRandom => "random",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyntheticStep {
    pub step: u64,
    pub arm: usize,
    pub reward: f64,
    /// Expected regret sum, from the true arm means.
    pub cumulative_regret: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyntheticRun {
    pub policy: Policy,
    pub pulls: Vec<u64>,
    pub best_arm: usize,
    pub best_share: f64,
    pub cumulative_regret: f64,
    pub steps: Vec<SyntheticStep>,
}

/// Run `policy` for `steps` rounds on Bernoulli arms with the given means.
pub fn run_synthetic<T: Scalar>(means: &[f64], steps: u64, seed: u64, policy: Policy) -> Result<SyntheticRun, ExploreError> {
    if means.is_empty() {
        return Err(ExploreError::NoArms);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let best_mean = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best_arm = means.iter().position(|&m| m == best_mean).unwrap_or(0);
    let mut stats = vec![ArmStats::<T>::default(); means.len()];
    let mut log = RegretLog::default();
    let mut out = Vec::with_capacity(steps as usize);
    let mut regret = 0.0;
    for t in 1..=steps {
        let arm = match policy {
            Policy::Ucb1 => select_arm(&stats, t)?,
            Policy::UniformRandom => rng.gen_range(0..means.len()),
        };
        let reward = if rng.gen_bool(means[arm].clamp(0.0, 1.0)) { 1.0 } else { 0.0 };
        update(&mut stats, arm, T::of(reward), None, &mut log);
        regret += best_mean - means[arm];
        out.push(SyntheticStep {
            step: t,
            arm,
            reward,
            cumulative_regret: regret,
        });
    }
    let pulls: Vec<u64> = stats.iter().map(|s| s.pulls).collect();
    Ok(SyntheticRun {
        policy,
        best_arm,
        best_share: if steps == 0 { 0.0 } else { pulls[best_arm] as f64 / steps as f64 },
        pulls,
        cumulative_regret: regret,
        steps: out,
    })
}
