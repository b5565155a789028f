use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectrum_match::harness::{
    rows_to_csv, rows_to_json, run_sweep, trace_trial, write_results, OutputFormat, SweepConfig,
};
use spectrum_match::matching::oracle::{brute_force_stable_matchings, su_optimal, MAX_SIDE};
use spectrum_match::matching::{is_stable, run_algorithm1, run_deferred_acceptance, ProposalEvent, Response};
use spectrum_match::preferences::PuUtilityFn;
use spectrum_match::{fuzz, Error, Matching, Result};

#[derive(Parser)]
#[command(name = "spectrum-match", version, about = "Detection-driven SU-PU spectrum matching simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep over M and N and write the summary.
    Sweep(CommonArgs),
    /// Run one trial and print every proposal and response.
    Trial {
        #[command(flatten)]
        common: CommonArgs,
        /// Trial index within the base seed's sequence.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Fuzz the matching engine against the exhaustive stability oracle.
    Verify(CommonArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Config file: `key = value` text, or JSON with a `.json` extension.
    #[arg(long)]
    config: Option<PathBuf>,
    /// SU counts, e.g. `10`, `2,4,8` or `2..10`.
    #[arg(long)]
    m: Option<String>,
    /// PU counts, same syntax as --m.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of proposed,deferred_acceptance,random.
    #[arg(long)]
    algorithms: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long)]
    verify_stability: bool,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    link_radius: Option<f64>,
    /// `lo,hi`.
    #[arg(long)]
    beta_range: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_counts(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot parse count list {text:?}"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

impl CommonArgs {
    fn sweep_config(&self) -> Result<SweepConfig> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::from_path(path)?,
            None => SweepConfig::default(),
        };
        if let Some(m) = &self.m {
            cfg.m_values = parse_counts(m)?;
        }
        if let Some(n) = &self.n {
            cfg.n_values = parse_counts(n)?;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.scenario.rng_seed = s;
        }
        if let Some(a) = &self.algorithms {
            cfg.algorithms = a.split(',').map(str::parse).collect::<Result<_>>()?;
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        cfg.verify_stability |= self.verify_stability;
        if let Some(a) = self.alpha {
            cfg.scenario.alpha = vec![a];
        }
        if let Some(r) = self.link_radius {
            cfg.scenario.link_radius = r;
        }
        if let Some(b) = &self.beta_range {
            let parts: Vec<f64> = b
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Config(format!("cannot parse beta range {b:?}")))?;
            let [lo, hi] = parts[..] else {
                return Err(Error::Config(format!("beta range needs two values, got {b:?}")));
            };
            cfg.scenario.beta_range = (lo, hi);
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        Ok(cfg)
    }
}

fn sweep(args: &CommonArgs) -> Result<()> {
    let cfg = args.sweep_config()?;
    let summary = run_sweep(&cfg)?;
    match &cfg.output_path {
        Some(path) => {
            write_results(&summary, path, cfg.format)?;
            eprintln!("wrote {} rows to {}", summary.rows().len(), path.display());
        }
        None => match cfg.format {
            OutputFormat::Csv => print!("{}", rows_to_csv(&summary.rows())?),
            OutputFormat::Json => println!("{}", rows_to_json(&summary.rows())?),
        },
    }
    Ok(())
}

fn describe(event: &ProposalEvent) -> String {
    let what = match event.response {
        Response::Accepted => "accepted".to_string(),
        Response::AcceptedDisplacing { displaced } => format!("accepted, SU {displaced} displaced"),
        Response::RejectedKeptIncumbent { incumbent } => format!("rejected, keeps SU {incumbent}"),
        Response::RejectedActive => "rejected, PU active".to_string(),
    };
    format!("  round {:>2}: SU {:>2} -> PU {}: {what}", event.round, event.su, event.pu)
}

fn print_matching(label: &str, matching: &Matching, events: &[ProposalEvent]) {
    println!("{label}: {} proposals over {} rounds", matching.proposal_count, matching.rounds);
    for e in events {
        println!("{}", describe(e));
    }
    println!("  pairs (su, band): {:?}", matching.pairs());
}

fn trial(args: &CommonArgs, index: u64) -> Result<()> {
    let cfg = args.sweep_config()?;
    let m = cfg.m_values[0];
    let n = cfg.n_values[0];
    let scenario = cfg.scenario.clone().with_size(m, n);
    let d = trace_trial(&scenario, &cfg.trial_options(), index)?;

    println!("trial {index} (base seed {}), M = {m}, N = {n}", scenario.rng_seed);
    println!("PU active: {:?}", d.instance.pu_active);
    for su in 0..m {
        let row = |f: &dyn Fn(usize) -> f64| (0..n).map(|b| format!(" {:>14.4}", f(b))).collect::<String>();
        println!("SU {su:>2} delta {}", row(&|b| d.detection.0[(su, b)]));
        println!("      rate  {}", row(&|b| d.rates[(su, b)]));
        println!("      v     {}", row(&|b| d.full.utility(su, b)));
        println!("      list  {:?} (full {:?})", d.filtered.list(su), d.full.list(su));
    }
    if let Some((matching, events)) = &d.proposed {
        print_matching("proposed", matching, events);
    }
    if let Some((matching, events)) = &d.deferred_acceptance {
        print_matching("deferred acceptance", matching, events);
    }
    if let Some(choices) = &d.random_choices {
        println!("random: bands {choices:?}");
    }
    for t in &d.metrics {
        println!(
            "{:<20} sum_rate {:>10.4}  min_rate {:>10.4}  matched {}",
            t.algorithm.tag(),
            t.sum_rate,
            t.min_rate,
            t.num_matched
        );
    }
    Ok(())
}

fn verify(args: &CommonArgs) -> Result<()> {
    let max_m = args.m.as_deref().map(parse_counts).transpose()?.and_then(|v| v.into_iter().max()).unwrap_or(6);
    let max_n = args.n.as_deref().map(parse_counts).transpose()?.and_then(|v| v.into_iter().max()).unwrap_or(6);
    let games = args.trials.unwrap_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(0));
    let u = PuUtilityFn::SaturatingExp;
    let (mut unstable, mut oracle_mismatch, mut checked_oracle) = (0u64, 0u64, 0u64);

    for _ in 0..games {
        let m = rng.random_range(1..=max_m.max(1));
        let n = rng.random_range(1..=max_n.max(1));
        let game = fuzz::random_game(&mut rng, m, n);
        let proposed = run_algorithm1(&game.filtered, &u, &game.pu_active);
        if !is_stable(&proposed, &game.filtered, &u, &game.pu_active)?.is_stable() {
            unstable += 1;
        }
        if m <= MAX_SIDE && n <= MAX_SIDE {
            checked_oracle += 1;
            let stable = brute_force_stable_matchings(&game.filtered, &u, &game.pu_active)?;
            let contained = stable.iter().any(|s| s.same_pairs(&proposed));
            let da = run_deferred_acceptance(&game.full, &u, &game.pu_active);
            let full_stable = brute_force_stable_matchings(&game.full, &u, &game.pu_active)?;
            let optimal = su_optimal(&full_stable, &game.full).is_some_and(|o| o.same_pairs(&da));
            if !(contained && optimal) {
                oracle_mismatch += 1;
            }
        }
    }
    println!("games {games}, unstable {unstable}, oracle checked {checked_oracle}, oracle mismatches {oracle_mismatch}");
    if unstable + oracle_mismatch > 0 {
        return Err(Error::InconsistentMatching(format!(
            "{unstable} unstable outcomes, {oracle_mismatch} oracle mismatches"
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Trial { common, index } => trial(common, *index),
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
