//! Acceptance suite. Each test prints one PASS/FAIL line for its criterion
//! and then asserts it. Tests share a lock so the timing limits are measured
//! without contention.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flowtune_core::aig::BitPattern;
use flowtune_core::bandit::{run_synthetic, Policy};
use flowtune_core::flowspace::{count_m_repetition, count_multiset, count_none_repetition, sample_permutation};
use flowtune_core::harness::{self, suite_spec, SUITE_SIZE};
use flowtune_core::io::{gen_random, parse_aiger, parse_blif, write_aiger, GenSpec};
use flowtune_core::multistage::{self, replay, StageSchedule, PRESETS, STAGE_REPS};
use flowtune_core::transforms::{apply, FlowCache};
use flowtune_core::{equivalent, Aig, EquivMode, ExplorationResult, Multiset, Objective, TransformKind};

static SERIAL: Mutex<()> = Mutex::new(());

const LIMIT_COMBINATORICS: Duration = Duration::from_secs(1);
const LIMIT_PRESERVATION: Duration = Duration::from_secs(300);
const LIMIT_PROFILE: Duration = Duration::from_secs(120);
const LIMIT_REGRET: Duration = Duration::from_secs(30);
const LIMIT_VS_RANDOM: Duration = Duration::from_secs(600);
const LIMIT_FORMATS: Duration = Duration::from_secs(60);

/// Position-3 mean transformed nodes must stay below this share of position 1.
const PROFILE_RATIO: f64 = 0.5;
const MIN_BEST_ARM_SHARE: f64 = 0.8;
/// UCB1 regret must stay below this share of uniform random's.
const REGRET_RATIO: f64 = 1.0 / 3.0;

fn report(n: u32, name: &str, pass: bool, detail: &str, elapsed: Duration) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    // Straight to the handle so the line shows even when output is captured.
    let _ = writeln!(
        std::io::stderr().lock(),
        "acceptance {n} {name}: {verdict} ({detail}; {:.1}s)",
        elapsed.as_secs_f64()
    );
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn suite(i: usize) -> Aig {
    gen_random(&suite_spec(i).unwrap())
}

/// Step to the next lexicographic arrangement; false after the last one.
fn next_permutation(v: &mut [u8]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn enumerate_arrangements(counts: &[u64]) -> u64 {
    let mut v: Vec<u8> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, &m)| std::iter::repeat_n(i as u8, m as usize))
        .collect();
    let mut n = 1;
    while next_permutation(&mut v) {
        n += 1;
    }
    n
}

fn product_of_binomials(counts: &[u64]) -> u128 {
    let mut left: u128 = counts.iter().map(|&c| c as u128).sum();
    let mut acc = 1u128;
    for &m in counts {
        let mut c = 1u128;
        for i in 0..m as u128 {
            c = c * (left - i) / (i + 1);
        }
        acc *= c;
        left -= m as u128;
    }
    acc
}

fn compositions(total: u64) -> Vec<Vec<u64>> {
    if total == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=total {
        for mut rest in compositions(total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[test]
fn criterion_1_combinatorics() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut failures = Vec::new();
    if count_none_repetition(3).to_string() != "6" {
        failures.push("none-repetition n=3".to_string());
    }
    if count_m_repetition(2, 2).to_string() != "6" {
        failures.push("m-repetition n=2 m=2".to_string());
    }
    let oracle = product_of_binomials(&[4; 6]);
    if oracle != 3_246_670_537_110_000 || count_m_repetition(6, 4).to_string() != oracle.to_string() {
        failures.push(format!("n=6 m=4: {} vs {oracle}", count_m_repetition(6, 4)));
    }
    let mut checked = 0;
    for total in 1..=8 {
        for c in compositions(total) {
            let brute = enumerate_arrangements(&c);
            if count_multiset(&c).to_string() != brute.to_string() {
                failures.push(format!("{c:?}: {} vs {brute}", count_multiset(&c)));
            }
            checked += 1;
        }
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty() && elapsed < LIMIT_COMBINATORICS;
    report(1, "combinatorics", pass, &format!("{checked} multisets enumerated, mismatches {failures:?}"), elapsed);
    assert!(pass);
}

#[test]
fn criterion_2_functional_preservation() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let ms = Multiset::uniform(&TransformKind::ALL, 4).unwrap();
    let mut cases = 0usize;
    let mut failures = Vec::new();
    for i in 0..200usize {
        let spec = GenSpec::new(8 + i % 7, 100 + 700 * i / 199, 2 + i % 5, 5000 + i as u64).unwrap();
        let g = gen_random(&spec);
        for kind in TransformKind::ALL {
            cases += 1;
            if !equivalent(&g, &apply(&g, kind).0, EquivMode::Exhaustive).unwrap() {
                failures.push(format!("circuit {i} {kind}"));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let mut cache = FlowCache::new(&g, 2);
        for f in 0..100 {
            let flow = sample_permutation(&ms, &mut rng);
            cases += 1;
            if !equivalent(&g, &cache.run(&flow), EquivMode::Exhaustive).unwrap() {
                failures.push(format!("circuit {i} flow {f}"));
            }
        }
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty() && elapsed < LIMIT_PRESERVATION;
    report(
        2,
        "functional preservation",
        pass,
        &format!("{} of {cases} cases equivalent, failures {failures:?}", cases - failures.len()),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn criterion_3_profile() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut sums = vec![0.0; TransformKind::ALL.len()];
    for i in 0..SUITE_SIZE {
        let rows = harness::profile(&suite(i), &TransformKind::ALL, 100, 300 + i as u64).unwrap();
        for r in rows {
            sums[r.position - 1] += r.mean;
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / SUITE_SIZE as f64).collect();
    let first_is_max = means.iter().all(|&m| m <= means[0]);
    let ratio = means[2] / means[0];
    let elapsed = t.elapsed();
    let pass = ratio < PROFILE_RATIO && first_is_max && elapsed < LIMIT_PROFILE;
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.3}")).collect();
    report(
        3,
        "early positions dominate",
        pass,
        &format!("normalized means [{}], position 3 / position 1 = {ratio:.3}", shown.join(", ")),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn criterion_4_ucb_regret() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let means = [0.9, 0.5, 0.5, 0.4, 0.1];
    let (mut share, mut ucb, mut random) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..20 {
        let u = run_synthetic::<f64>(&means, 10_000, seed, Policy::Ucb1).unwrap();
        let r = run_synthetic::<f64>(&means, 10_000, seed, Policy::UniformRandom).unwrap();
        share.push(u.best_share);
        ucb.push(u.cumulative_regret);
        random.push(r.cumulative_regret);
    }
    let (share, ucb, random) = (median(share), median(ucb), median(random));
    let elapsed = t.elapsed();
    let pass = share >= MIN_BEST_ARM_SHARE && ucb < REGRET_RATIO * random && elapsed < LIMIT_REGRET;
    report(
        4,
        "ucb1 regret",
        pass,
        &format!("median best-arm share {share:.4}, median regret {ucb:.1} vs uniform {random:.1}"),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn criterion_5_bandit_vs_random() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let kinds = TransformKind::ALL;
    let ms = Multiset::uniform(&kinds, STAGE_REPS).unwrap();
    let default_at = PRESETS.iter().position(|&p| p == (2, 30)).unwrap();
    let mut diffs = Vec::new();
    let mut worst_preset_violations = Vec::new();
    let mut circuits_ahead = 0;
    for i in 0..SUITE_SIZE {
        let g = suite(i);
        let mut per_preset = vec![Vec::new(); PRESETS.len()];
        let mut random = Vec::new();
        for seed in 0..10u64 {
            let b = harness::random_baseline(&g, &ms, 60, seed, Objective::NodeCount, false).unwrap();
            random.push(b.best_qor.and_count as f64);
            for (p, &(s, m)) in PRESETS.iter().enumerate() {
                let schedule = StageSchedule::new(s, m, &kinds).unwrap();
                let r: ExplorationResult = multistage::run(&g, &schedule, Objective::NodeCount, seed).unwrap();
                per_preset[p].push(r.final_qor.and_count as f64);
            }
            diffs.push(per_preset[default_at][seed as usize] - b.best_qor.and_count as f64);
        }
        let medians: Vec<f64> = per_preset.into_iter().map(median).collect();
        let worst = medians.iter().copied().fold(f64::MIN, f64::max);
        if medians[default_at] > worst {
            worst_preset_violations.push(i);
        }
        if medians[default_at] <= median(random) {
            circuits_ahead += 1;
        }
    }
    let median_diff = median(diffs);
    let elapsed = t.elapsed();
    let pass = median_diff <= 0.0 && worst_preset_violations.is_empty() && elapsed < LIMIT_VS_RANDOM;
    report(
        5,
        "bandit vs random at 60 pulls",
        pass,
        &format!(
            "median paired difference (2:30 minus random) {median_diff:+.1} ands, \
             2:30 median at or below random on {circuits_ahead}/{SUITE_SIZE} circuits, \
             worse than every other preset on {worst_preset_violations:?}"
        ),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn criterion_6_accounting() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut runs = 0;
    for i in (0..SUITE_SIZE).step_by(4) {
        let g = suite(i);
        for &(s, m) in &PRESETS {
            let schedule = StageSchedule::new(s, m, &TransformKind::ALL).unwrap();
            for seed in [11, 12] {
                runs += 1;
                let r: ExplorationResult = multistage::run(&g, &schedule, Objective::NodeCount, seed).unwrap();
                let per_stage_ok = (0..s).all(|st| r.log.iter().filter(|p| p.stage == st).count() == m);
                if r.log.len() != s * m || !per_stage_ok {
                    failures.push(format!("circuit {i} {s}:{m} seed {seed}: {} pulls", r.log.len()));
                }
                let again = replay(&g, &r.best_flow_overall);
                if again.metrics() != r.final_qor || write_aiger(&again) != write_aiger(&r.final_aig) {
                    failures.push(format!("circuit {i} {s}:{m} seed {seed}: replay differs"));
                }
            }
        }
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty();
    report(6, "exploration accounting", pass, &format!("{runs} runs, failures {failures:?}"), elapsed);
    assert!(pass);
}

/// Cover rows: cube and output bit.
type Cover<'a> = Vec<(&'a str, char)>;

/// Output of a single-output cover, straight from its rows.
fn cover_value(rows: &[(&str, char)], inputs: &[bool]) -> bool {
    let onset = rows.first().is_none_or(|r| r.1 == '1');
    let hit = rows.iter().any(|(cube, _)| {
        cube.chars().zip(inputs).all(|(c, &v)| match c {
            '1' => v,
            '0' => !v,
            _ => true,
        })
    });
    if rows.is_empty() {
        false
    } else {
        hit == onset
    }
}

/// Blif text for one cover over inputs `a0..`, and whether the parsed
/// circuit matches the cover on every assignment.
fn check_cover(n: usize, rows: &[(&str, char)]) -> bool {
    let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let mut text = format!(".model t\n.inputs {}\n.outputs y\n.names {} y\n", names.join(" "), names.join(" "));
    for (cube, out) in rows {
        if n == 0 {
            text.push_str(&format!("{out}\n"));
        } else {
            text.push_str(&format!("{cube} {out}\n"));
        }
    }
    text.push_str(".end\n");
    let g = match parse_blif(&text) {
        Ok(g) => g,
        Err(_) => return false,
    };
    let width = 1usize << n;
    let pats: Vec<BitPattern> = (0..n)
        .map(|i| BitPattern::from_bools(&(0..width).map(|k| k >> i & 1 == 1).collect::<Vec<_>>()))
        .collect();
    if n == 0 {
        return g.outputs()[0] == if cover_value(rows, &[]) { flowtune_core::Lit::TRUE } else { flowtune_core::Lit::FALSE };
    }
    let out = &g.simulate(&pats).unwrap()[0];
    (0..width).all(|k| {
        let v: Vec<bool> = (0..n).map(|i| k >> i & 1 == 1).collect();
        out.get(k) == cover_value(rows, &v)
    })
}

#[test]
fn criterion_7_formats() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let mut failures = Vec::new();

    for i in 0..100u64 {
        let g = gen_random(&GenSpec::new(4 + i as usize % 20, 50 + 20 * i as usize, 1 + i as usize % 8, 9000 + i).unwrap());
        let text = write_aiger(&g);
        match parse_aiger(&text) {
            Ok(h) if write_aiger(&h) == text => {}
            _ => failures.push(format!("round trip {i}")),
        }
    }

    let fixtures: [(&str, usize, Cover); 6] = [
        ("and", 2, vec![("11", '1')]),
        ("nand", 2, vec![("0-", '1'), ("-0", '1')]),
        ("nand offset", 2, vec![("11", '0')]),
        ("or with don't-cares", 3, vec![("1--", '1'), ("-1-", '1'), ("--1", '1')]),
        ("overlapping cubes", 4, vec![("1-0-", '1'), ("11--", '1'), ("0011", '1')]),
        ("constant one", 0, vec![("", '1')]),
    ];
    for (name, n, rows) in &fixtures {
        if !check_cover(*n, rows) {
            failures.push(format!("blif {name}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for k in 0..50 {
        let n = rng.gen_range(1..=5);
        let out = if rng.gen_bool(0.5) { '1' } else { '0' };
        let cubes: Vec<String> = (0..rng.gen_range(1..=4))
            .map(|_| (0..n).map(|_| ['0', '1', '-'][rng.gen_range(0..3)]).collect())
            .collect();
        let rows: Vec<(&str, char)> = cubes.iter().map(|c| (c.as_str(), out)).collect();
        if !check_cover(n, &rows) {
            failures.push(format!("random cover {k}: {rows:?}"));
        }
    }

    let seeds: Vec<String> = (0..5)
        .map(|i| write_aiger(&gen_random(&GenSpec::new(3, 10 + i, 2, i as u64).unwrap())))
        .chain([
            ".model m\n.inputs a b c\n.outputs y\n.names a b t\n11 1\n.names t c y\n1- 1\n-1 1\n.end\n".to_string(),
            ".model l\n.inputs d\n.outputs q\n.latch d q 0\n.end\n".to_string(),
        ])
        .collect();
    let alphabet = b"0123456789 \n-.abcdefghilmnorstuy\\#";
    let mut fuzzed = 0;
    let caught = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        for _ in 0..10_000 {
            let text = if rng.gen_bool(0.3) {
                let len = rng.gen_range(0..120);
                (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())] as char).collect()
            } else {
                let mut b = seeds[rng.gen_range(0..seeds.len())].clone().into_bytes();
                for _ in 0..rng.gen_range(1..6) {
                    let at = rng.gen_range(0..=b.len());
                    match rng.gen_range(0..3) {
                        0 if at < b.len() => {
                            b.remove(at);
                        }
                        1 if at < b.len() => b[at] = alphabet[rng.gen_range(0..alphabet.len())],
                        _ => b.insert(at, alphabet[rng.gen_range(0..alphabet.len())]),
                    }
                }
                String::from_utf8_lossy(&b).into_owned()
            };
            if let Ok(g) = parse_aiger(&text) {
                let _ = write_aiger(&g);
                let _ = g.metrics();
            }
            if let Ok(g) = parse_blif(&text) {
                let _ = g.metrics();
            }
            fuzzed += 1;
        }
    }));
    if caught.is_err() {
        failures.push(format!("parser panicked on fuzz input {fuzzed}"));
    }

    let elapsed = t.elapsed();
    let pass = failures.is_empty() && elapsed < LIMIT_FORMATS;
    report(
        7,
        "format round trip",
        pass,
        &format!("100 round trips, {} cover fixtures, {fuzzed} fuzz inputs, failures {failures:?}", fixtures.len() + 50),
        elapsed,
    );
    assert!(pass);
}

fn explore_outputs(suite_index: usize, jobs: usize, dir: &PathBuf) -> Vec<Vec<u8>> {
    let out = Command::new(env!("CARGO_BIN_EXE_flowtune"))
        .args(["--jobs", &jobs.to_string(), "explore", "--suite", &suite_index.to_string(), "--seed", "21"])
        .arg("--out-dir")
        .arg(dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files = vec![out.stdout];
    for f in ["explore.csv", "summary.json", "optimized.aag"] {
        files.push(std::fs::read(dir.join(f)).unwrap());
    }
    files
}

#[test]
fn criterion_8_parallel_determinism() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let root = std::env::temp_dir().join(format!("flowtune-acceptance-{}", std::process::id()));
    let mut differing = Vec::new();
    let circuits = [0, 5, 10, 15, 19];
    for &i in &circuits {
        let one = explore_outputs(i, 1, &root.join(format!("{i}-j1")));
        let eight = explore_outputs(i, 8, &root.join(format!("{i}-j8")));
        if one != eight {
            differing.push(i);
        }
    }
    let _ = std::fs::remove_dir_all(&root);
    let elapsed = t.elapsed();
    let pass = differing.is_empty();
    report(
        8,
        "determinism under --jobs",
        pass,
        &format!("{} suite circuits, differing {differing:?}", circuits.len()),
        elapsed,
    );
    assert!(pass);
}
