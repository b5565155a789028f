//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectrum_match::detection::{detect, log_posterior_ratio, Hypothesis};
use spectrum_match::fuzz::{random_game, synthetic_game};
use spectrum_match::harness::{
    rows_to_csv, run_cell, run_sweep, summarize_cell, CellSummary, Metric, SweepConfig, SweepSummary,
};
use spectrum_match::matching::oracle::{brute_force_stable_matchings, su_optimal};
use spectrum_match::matching::{is_stable, run_algorithm1, run_deferred_acceptance, run_random_allocation};
use spectrum_match::matrix::Matrix;
use spectrum_match::metrics::{improvement_pct, random_allocation_sinr_rates};
use spectrum_match::preferences::{ProposalTable, PuUtilityFn};
use spectrum_match::scenario::{achievable_rate, sample_instance, ScenarioConfig};
use spectrum_match::Algorithm;

type Outcome = Result<String, String>;

const SWEEP_SEED: u64 = 1;
const SWEEP_TRIALS: u64 = 10_000;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed <= Duration::from_secs(limit_secs), || format!("took {elapsed:?}, limit {limit_secs} s"))
}

fn stability() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let u = PuUtilityFn::SaturatingExp;
    let (mut with_active, mut with_filtering) = (0, 0);
    for i in 0..10_000 {
        let m = rng.random_range(1..=10);
        let n = rng.random_range(1..=6);
        let game = random_game(&mut rng, m, n);
        with_active += usize::from(game.pu_active.iter().any(|a| *a));
        with_filtering += usize::from(game.filtered != game.full);
        let out = run_algorithm1(&game.filtered, &u, &game.pu_active);
        let report = is_stable(&out, &game.filtered, &u, &game.pu_active).map_err(|e| e.to_string())?;
        ensure(report.is_stable(), || format!("instance {i} (M={m}, N={n}) has blocking pairs {:?}", report.blocking_pairs))?;
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "10000/10000 stable ({with_active} with active PUs, {with_filtering} with filtered proposals) in {:.1?}",
        start.elapsed()
    ))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let u = PuUtilityFn::SaturatingExp;
    let mut multiple = 0;
    for i in 0..1_000 {
        let m = rng.random_range(1..=4);
        let n = rng.random_range(1..=4);
        let game = random_game(&mut rng, m, n);
        let proposed = run_algorithm1(&game.filtered, &u, &game.pu_active);
        let stable = brute_force_stable_matchings(&game.filtered, &u, &game.pu_active).map_err(|e| e.to_string())?;
        ensure(stable.iter().any(|s| s.same_pairs(&proposed)), || format!("instance {i}: proposed output not among stable matchings"))?;

        let da = run_deferred_acceptance(&game.full, &u, &game.pu_active);
        let full_stable = brute_force_stable_matchings(&game.full, &u, &game.pu_active).map_err(|e| e.to_string())?;
        multiple += usize::from(full_stable.len() > 1);
        let best = su_optimal(&full_stable, &game.full).ok_or_else(|| format!("instance {i}: no SU-optimal matching"))?;
        ensure(best.same_pairs(&da), || format!("instance {i}: DA {:?} vs SU-optimal {:?}", da.pairs(), best.pairs()))?;
    }
    within(start.elapsed(), 60)?;
    Ok(format!("1000/1000 agree ({multiple} games with several stable matchings) in {:.1?}", start.elapsed()))
}

fn ln_gaussian(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (x - mean).powi(2) / (2.0 * var)
}

fn detection_numerics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for i in 0..100_000 {
        let x: f64 = rng.random_range(-5.0..5.0);
        let h = rng.random_range(0.0..2.0);
        let s = rng.random_range(0.0..3.0);
        let var = rng.random_range(0.05..4.0);
        let prior: f64 = rng.random_range(0.001..0.999);
        let closed = log_posterior_ratio(x, h, s, var, prior).map_err(|e| e.to_string())?;
        let ln_h1 = prior.ln() + ln_gaussian(x, h * s, var);
        let ln_h0 = (1.0f64 - prior).ln() + ln_gaussian(x, 0.0, var);
        worst = worst.max((closed - (ln_h1 - ln_h0)).abs());
        let map = if ln_h1 > ln_h0 { Hypothesis::H1 } else { Hypothesis::H0 };
        ensure(detect(closed) == map, || format!("tuple {i}: decision differs from the MAP rule"))?;
    }
    ensure(worst <= 1e-9, || format!("max |closed - direct| = {worst:e}"))?;
    Ok(format!("max |closed - direct| = {worst:.2e} over 100000 tuples, decisions 100% MAP"))
}

fn argmax_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let exp = PuUtilityFn::SaturatingExp;
    let identity = PuUtilityFn::Identity;
    // Evaluates 1 - e^{-v} literally; only used where v stays small.
    let literal = PuUtilityFn::custom("literal_exp", |v: f64| 1.0 - (-v).exp()).map_err(|e| e.to_string())?;
    for i in 0..1_000 {
        let m = rng.random_range(1..=10);
        let n = rng.random_range(1..=6);
        let game = random_game(&mut rng, m, n);
        let a = run_algorithm1(&game.filtered, &exp, &game.pu_active);
        let b = run_algorithm1(&game.filtered, &identity, &game.pu_active);
        ensure(a == b, || format!("instance {i}: matchings differ"))?;

        let small = synthetic_game(&mut rng, m, n);
        let a = run_algorithm1(&small.filtered, &literal, &small.pu_active);
        let b = run_algorithm1(&small.filtered, &identity, &small.pu_active);
        ensure(a == b, || format!("synthetic instance {i}: literal map disagrees with identity"))?;
    }
    Ok("1000/1000 identical with u = v (plus 1000 synthetic games with a literal 1 - e^-v)".into())
}

fn trend_sweep() -> SweepSummary {
    let sweep = SweepConfig {
        m_values: (2..=10).collect(),
        n_values: vec![3, 4],
        trials: SWEEP_TRIALS,
        ..SweepConfig::default()
    };
    let mut sweep = sweep;
    sweep.scenario.rng_seed = SWEEP_SEED;
    run_sweep(&sweep).expect("default sweep runs")
}

fn cell(s: &SweepSummary, m: usize, n: usize, a: Algorithm) -> &CellSummary {
    s.cell(m, n, a).expect("cell present")
}

fn trend_sum_rate(s: &SweepSummary, elapsed: Duration) -> Outcome {
    let n = 4;
    for m in 2..=10 {
        let p = cell(s, m, n, Algorithm::Proposed).stat(Metric::SumRate).mean;
        let da = cell(s, m, n, Algorithm::DeferredAcceptance).stat(Metric::SumRate).mean;
        let r = cell(s, m, n, Algorithm::Random).stat(Metric::SumRate).mean;
        ensure(p >= da, || format!("M={m}: proposed {p} < DA {da}"))?;
        if m > n {
            ensure(p >= r, || format!("M={m}: proposed {p} < random {r}"))?;
        }
    }
    let p = cell(s, 10, n, Algorithm::Proposed).stat(Metric::SumRate).mean;
    let r = cell(s, 10, n, Algorithm::Random).stat(Metric::SumRate).mean;
    let gain = improvement_pct(p, r).map_err(|e| e.to_string())?;
    ensure(gain >= 20.0, || format!("improvement over random at M=10 is {gain:.2}%"))?;
    within(elapsed, 600)?;
    Ok(format!("proposed >= DA for all M, >= random for M > 4; +{gain:.1}% over random at M=10 (sweep {elapsed:.1?})"))
}

fn trend_min_rate(s: &SweepSummary) -> Outcome {
    let mut notes = Vec::new();
    for n in [3, 4] {
        for m in n..10 {
            let a = cell(s, m, n, Algorithm::Proposed).stat(Metric::MinRate);
            let b = cell(s, m + 1, n, Algorithm::Proposed).stat(Metric::MinRate);
            // The 2-SE error bars of consecutive points must overlap.
            ensure(b.mean + 2.0 * b.stderr >= a.mean - 2.0 * a.stderr, || {
                format!("N={n}: min rate drops from {} (M={m}) to {} (M={})", a.mean, b.mean, m + 1)
            })?;
        }
        for m in n + 1..=10 {
            let p = cell(s, m, n, Algorithm::Proposed).stat(Metric::MinRate).mean;
            let r = cell(s, m, n, Algorithm::Random).stat(Metric::MinRate).mean;
            ensure(p > r, || format!("N={n}, M={m}: proposed min {p} <= random min {r}"))?;
        }
        let lo = cell(s, n, n, Algorithm::Proposed).stat(Metric::MinRate).mean;
        let hi = cell(s, 10, n, Algorithm::Proposed).stat(Metric::MinRate).mean;
        notes.push(format!("N={n}: {lo:.3} -> {hi:.3}"));
    }
    Ok(format!("non-decreasing within 2 SE and above random for M > N ({})", notes.join(", ")))
}

fn trend_iterations(s: &SweepSummary) -> Outcome {
    let n = 4;
    for m in 2..=10 {
        let p = cell(s, m, n, Algorithm::Proposed).stat(Metric::ProposalCount);
        let da = cell(s, m, n, Algorithm::DeferredAcceptance).stat(Metric::ProposalCount);
        let se = (p.stderr.powi(2) + da.stderr.powi(2)).sqrt();
        ensure(p.mean <= da.mean + se, || format!("M={m}: proposed {} vs DA {} proposals", p.mean, da.mean))?;
    }
    let p8 = cell(s, 8, n, Algorithm::Proposed).stat(Metric::ProposalCount).mean;
    let da8 = cell(s, 8, n, Algorithm::DeferredAcceptance).stat(Metric::ProposalCount).mean;
    Ok(format!("proposed <= DA within the combined SE for M = 2..10 (M=8: {p8:.2} vs {da8:.2} proposals)"))
}

fn degenerate_cases() -> Outcome {
    let u = PuUtilityFn::SaturatingExp;

    // Every PU active, through the whole sensing pipeline.
    let mut cfg = ScenarioConfig::<f64>::new(6, 3);
    cfg.pu_active = vec![true; 3];
    let opts = spectrum_match::harness::TrialOptions::default();
    for t in 0..50 {
        let d = spectrum_match::harness::trace_trial(&cfg, &opts, t).map_err(|e| e.to_string())?;
        let (p, _) = d.proposed.as_ref().expect("proposed requested");
        let (da, _) = d.deferred_acceptance.as_ref().expect("DA requested");
        ensure(p.is_empty() && da.is_empty(), || format!("trial {t}: active PUs matched"))?;
    }

    // Every proposal non-positive.
    let utilities = Matrix::from_fn(3, 2, |m, n| -1.0 - (m + n) as f64);
    let full = ProposalTable::from_lists(utilities, vec![vec![0, 1], vec![1, 0], vec![0, 1]]).map_err(|e| e.to_string())?;
    let filtered = full.truncated();
    ensure(run_algorithm1(&filtered, &u, &[false, false]).is_empty(), || "proposed matched a v <= 0 pair".into())?;
    ensure(run_algorithm1(&full, &u, &[false, false]).is_empty(), || "filter skipped on full lists".into())?;
    let da = run_deferred_acceptance(&full, &u, &[false, false]);
    ensure(da.len() == 2, || format!("DA matched {} pairs", da.len()))?;

    // Fewer SUs than bands, all inactive, all positive.
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..200 {
        let m = rng.random_range(1..=5);
        let n = rng.random_range(m + 1..=6);
        let utilities = Matrix::from_fn(m, n, |_, _| rng.random_range(0.1..5.0));
        let lists = (0..m).map(|_| (0..n).collect()).collect();
        let t = ProposalTable::from_lists(utilities, lists).map_err(|e| e.to_string())?;
        let out = run_algorithm1(&t, &u, &vec![false; n]);
        ensure(out.len() == m, || format!("M={m} < N={n} gave {} pairs", out.len()))?;
    }

    // One band: every SU collides.
    let cfg = ScenarioConfig::<f64>::new(5, 1);
    let inst = sample_instance(&cfg, 9);
    let choices = run_random_allocation(&cfg, &inst, 4);
    ensure(choices.iter().all(|c| *c == 0), || format!("choices {choices:?}"))?;
    let rates = random_allocation_sinr_rates(&cfg, &inst, &choices);
    for (m, r) in rates.iter().enumerate() {
        let alone = achievable_rate(2.0 * cfg.su_power_mw(), inst.link_gain(&cfg, m, 0), cfg.noise_mw());
        ensure(*r < alone, || format!("SU {m} saw no interference"))?;
    }
    Ok("all-active empty, v <= 0 empty (DA matches 2), M < N fills M, N = 1 all collide".into())
}

fn determinism() -> Outcome {
    let mut base = SweepConfig { m_values: vec![7], n_values: vec![4], trials: 2_000, ..SweepConfig::default() };
    base.scenario.rng_seed = 99;
    let run = |threads: usize| {
        let cfg = SweepConfig { threads: Some(threads), ..base.clone() };
        let records = run_cell(&cfg, 7, 4).expect("cell runs");
        let summary = SweepSummary { cells: summarize_cell(7, 4, &cfg.algorithms, &records) };
        (records, rows_to_csv(&summary.rows()).expect("csv"))
    };
    let (r1, csv1) = run(1);
    for threads in [2, 4, 8] {
        let (r, csv) = run(threads);
        ensure(r == r1, || format!("{threads} threads changed trial metrics"))?;
        ensure(csv == csv1, || format!("{threads} threads changed the CSV"))?;
    }
    Ok("trial metrics and CSV identical for 1, 2, 4 and 8 threads".into())
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 stability", stability()),
        ("2 oracle equivalence", oracle_equivalence()),
        ("3 detection numerics", detection_numerics()),
        ("4 argmax invariance", argmax_invariance()),
    ];
    let start = Instant::now();
    let summary = trend_sweep();
    let elapsed = start.elapsed();
    results.push(("5 sum-rate trend", trend_sum_rate(&summary, elapsed)));
    results.push(("6 worst-rate trend", trend_min_rate(&summary)));
    results.push(("7 iteration trend", trend_iterations(&summary)));
    results.push(("8 degenerate cases", degenerate_cases()));
    results.push(("9 determinism", determinism()));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
