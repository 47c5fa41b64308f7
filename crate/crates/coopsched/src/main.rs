use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use coopsched::bench::bench_scheduling;
use coopsched::config::parse_config;
use coopsched::harness::run_monte_carlo;
use coopsched::output::{aggregate_json, bench_csv, selection_csv, trace_csv, write_atomic};
use coopsched::replay::{replay, ReplaySettings};
use coopsched::utias::{load_dataset, resample_to_grid, write_fixture, FixtureSpec};
use coopsched::verify::{verify_det_trace, verify_determinant_bound, verify_trace_chain};
use coopsched_core::scheduling::Policy;
use coopsched_core::{run_scenario, RunTrace, ScenarioConfig};

#[derive(Parser)]
#[command(name = "coopsched", version, about = "Cooperative localization with local landmark scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run and write its trace.
    Simulate(RunArgs),
    /// Simulate several seeded runs and write the aggregate.
    Montecarlo {
        #[command(flatten)]
        run: RunArgs,
        /// Number of runs (default: `runs` from the config).
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Filter a window of a UTIAS-format dataset.
    ReplayUtias {
        #[command(flatten)]
        run: RunArgs,
        /// Dataset directory.
        #[arg(long)]
        dataset: PathBuf,
        /// Window start after the first timestamp (s).
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        /// Window length (s).
        #[arg(long, default_value_t = 300.0)]
        duration: f64,
    },
    /// Time the local and joint-covariance selectors.
    BenchSched {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random beliefs per team size.
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Randomized checks of the determinant bound and its lemmas.
    VerifyBounds {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        instances: usize,
    },
    /// Write a synthetic UTIAS-format dataset.
    WriteFixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// alg1, random, logdet-greedy, take-all or brute-force.
    #[arg(long)]
    policy: Option<Policy>,
    /// Measurement budget for every robot.
    #[arg(long)]
    q: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                parse_config(&text).with_context(|| format!("in {}", p.display()))?
            }
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = self.policy {
            cfg.policy = p;
        }
        if let Some(q) = self.q {
            cfg = cfg.with_q(q);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    write_atomic(&path, text.as_bytes())?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn write_trace(dir: &Path, trace: &RunTrace) -> Result<()> {
    write(dir, "trace.csv", &trace_csv(trace))?;
    write(dir, "selections.csv", &selection_csv(trace))
}

fn report(trace: &RunTrace) -> bool {
    let inv = &trace.invariants;
    println!(
        "policy {}  seed {}  ticks {}  final logdet {:.4}  final squared error {:.5}",
        trace.policy,
        trace.seed,
        trace.ticks.len(),
        trace.final_log_det(),
        trace.final_sq_error()
    );
    println!(
        "measurements {}  skipped {}  validity failures {}  logdet increases {}  bound violations {}",
        inv.measurements_processed,
        inv.skipped_updates,
        inv.validity_failures,
        inv.update_increase_violations,
        inv.bound_violations
    );
    inv.is_clean() && trace.is_finite()
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.config()?;
            let trace = run_scenario(&cfg, cfg.seed)?;
            write_trace(&args.out, &trace)?;
            Ok(report(&trace))
        }
        Command::Montecarlo { run, runs } => {
            let mut cfg = run.config()?;
            if let Some(m) = runs {
                cfg.runs = m;
            }
            let mc = run_monte_carlo(&cfg, cfg.runs, cfg.seed)?;
            let json = serde_json::to_string_pretty(&aggregate_json(&mc, &cfg))?;
            write(&run.out, "aggregate.json", &json)?;
            println!(
                "policy {}  runs {}  final log-mean-det {:.4}  final mean squared error {:.5}",
                mc.policy,
                mc.runs.len(),
                mc.final_log_mean_det(),
                mc.final_mean_sq_error()
            );
            Ok(mc.all_clean() && mc.log_mean_det.iter().all(|x| x.is_finite()))
        }
        Command::ReplayUtias { run, dataset, t0, duration } => {
            let cfg = run.config()?;
            let bundle = load_dataset(&dataset)?;
            let (o, m, g) = bundle.counts();
            eprintln!(
                "{} robots: {o} odometry, {m} measurement ({} dropped), {g} groundtruth records",
                bundle.n_robots(),
                bundle.dropped_measurements
            );
            let grid = resample_to_grid(&bundle, t0, duration, cfg.dt)?;
            let settings = ReplaySettings {
                policy: cfg.policy,
                q: cfg.q.first().copied().unwrap_or(1),
                params: cfg.params.first().copied().unwrap_or_default(),
                initial_variance: cfg.initial_variance,
                random_period: if run.config.is_some() { cfg.random_period } else { 30.0 },
                seed: cfg.seed,
                check_invariants: cfg.check_invariants,
            };
            let trace = replay(&grid, &settings)?;
            write_trace(&run.out, &trace)?;
            Ok(report(&trace))
        }
        Command::BenchSched { out, seed, trials } => {
            let rows = bench_scheduling(&[9, 15], &[1, 3, 5], trials, seed);
            println!("{:>3} {:>2} {:>12} {:>16}", "N", "q", "alg1 (us)", "logdet-greedy (us)");
            for r in &rows {
                println!("{:>3} {:>2} {:>12.3} {:>16.3}", r.n_robots, r.q, r.alg1 * 1e6, r.logdet_greedy * 1e6);
            }
            write(&out, "bench.csv", &bench_csv(&rows))?;
            Ok(true)
        }
        Command::VerifyBounds { seed, instances } => {
            let reports = [
                verify_determinant_bound(instances, seed)?,
                verify_det_trace(instances, seed.wrapping_add(1))?,
                verify_trace_chain(instances, seed.wrapping_add(2))?,
            ];
            let mut ok = true;
            for r in &reports {
                ok &= r.passed();
                println!(
                    "{:<4} {}: {} instances, {} violations, worst margin {:.3e}",
                    if r.passed() { "ok" } else { "FAIL" },
                    r.name,
                    r.instances,
                    r.violations,
                    r.worst_margin
                );
            }
            Ok(ok)
        }
        Command::WriteFixture { out, seed } => {
            let b = write_fixture(&out, &FixtureSpec { seed, ..FixtureSpec::default() })?;
            eprintln!("wrote {} robots to {}", b.n_robots(), out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: validity checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
