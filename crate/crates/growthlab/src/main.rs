//! Command-line front end. Subcommands map one-to-one onto library
//! operations; every command prints its result to stdout and exits 0 only
//! when all asserted invariants pass.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use growthlab::persist;
use growthlab::{load_genset, run_pipeline, trichotomy_report, verify_run, ExperimentManifest};
use growthlab_core::modp::{reduce_ball, PowerCoverOutcome};
use growthlab_core::{
    count_series, enumerate_ball, is_injective_mod_p, power_cover_exponent, prime_count, primes_in,
    surjectivity_closure, triple_product_size, value_census, BallLevels, CensusKind, CountKind,
    GeneratorSet,
};

const FORMATS_HELP: &str = "\
File formats:
  generator JSON  {\"dim\": d, \"denominator\": s, \"generators\":
                  [{\"name\": str, \"num\": [[int; d]; d], \"power\": int}],
                  \"symmetrize\": bool}; entry value = num[i][j] / s^power
  series CSV      columns: radius,count,kind,gens_digest
                  (kind: element | trace | charpoly; counts are cumulative
                  over the ball of that radius)
  census CSV      columns: value,count (value: trace residue, or the
                  descending characteristic-polynomial coefficients joined
                  by spaces)
  ball CSV        columns: radius,key_hex (canonical injective matrix key)
  traces CSV      column: trace (exact rationals, ascending)
  reports         JSON with a \"schema\": 1 field; in pipeline reports the
                  timings_ms key is last and is the only field that varies
                  between identical runs";

#[derive(Parser)]
#[command(
    name = "growthlab",
    version,
    about = "Exact growth experiments for finitely generated rational matrix groups",
    after_long_help = FORMATS_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the word ball B(n) exactly over the rationals
    Ball(BallArgs),
    /// Emit growth series (element/trace/charpoly counts per radius) as CSV
    Series(BallArgs),
    /// Classify element and charpoly growth and label the group empirically
    Classify(ClassifyArgs),
    /// Prime counting and prime windows
    Primes(PrimesArgs),
    /// Mod-p image: closure, surjectivity, censuses, tripling, power cover
    Modp(ModpArgs),
    /// Run the six-stage end-to-end experiment and persist its artifacts
    Pipeline(PipelineArgs),
    /// Replay every claim of a persisted run against its artifacts
    Verify(RunDirArgs),
    /// Summarize a persisted run report
    Report(RunDirArgs),
}

#[derive(Args)]
struct BallArgs {
    /// Generator-set JSON file
    #[arg(long)]
    gens: String,
    /// Ball radius to enumerate
    #[arg(long)]
    radius: usize,
    /// Element budget; enumeration stops cleanly at the last complete radius
    #[arg(long, default_value_t = 500_000)]
    budget: u64,
    /// Directory to write CSV artifacts into (stdout only when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Generator-set JSON file
    #[arg(long)]
    gens: String,
    /// Ball radius to enumerate before classifying
    #[arg(long, default_value_t = 12)]
    radius: usize,
    /// Element budget; a short ball flags the row as partial
    #[arg(long, default_value_t = 500_000)]
    budget: u64,
}

#[derive(Args)]
struct PrimesArgs {
    #[command(subcommand)]
    command: PrimesCommand,
}

#[derive(Subcommand)]
enum PrimesCommand {
    /// Count primes up to x and report the Chebyshev ratio pi(x) ln(x) / x
    Count {
        #[arg(long)]
        x: u64,
    },
    /// List the primes in [lo, hi], one per line
    Window {
        #[arg(long)]
        lo: u64,
        #[arg(long)]
        hi: u64,
    },
}

#[derive(Args)]
struct ModpArgs {
    /// Generator-set JSON file
    #[arg(long)]
    gens: String,
    /// Prime modulus
    #[arg(long)]
    prime: u64,
    /// Also check injectivity, tripling, and power cover for the ball of
    /// this radius
    #[arg(long)]
    radius: Option<usize>,
    /// Element budget for the characteristic-zero ball (with --radius)
    #[arg(long, default_value_t = 500_000)]
    budget: u64,
    /// Element cap for mod-p closures and product expansions
    #[arg(long, default_value_t = 10_000_000)]
    cap: usize,
    /// Power cap for the cover-exponent search
    #[arg(long, default_value_t = 64)]
    d_cap: usize,
    /// Directory to also write the report JSON into
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Manifest JSON; alternatively give --gens/--radius/--window inline
    #[arg(long, conflicts_with_all = ["gens", "radius", "window"])]
    manifest: Option<PathBuf>,
    /// Generator-set JSON file
    #[arg(long)]
    gens: Option<String>,
    /// Ball radius k for the injective-prime search
    #[arg(long)]
    radius: Option<usize>,
    /// Prime window as LO:HI
    #[arg(long, value_parser = Window::from_str)]
    window: Option<Window>,
    /// Element budget for characteristic-zero enumeration
    #[arg(long)]
    budget: Option<u64>,
    /// Pair-sampling cap for the injective-prime search
    #[arg(long)]
    sample_cap: Option<usize>,
    /// Seed for pair sampling
    #[arg(long)]
    seed: Option<u64>,
    /// Element cap for mod-p closures
    #[arg(long)]
    modp_cap: Option<usize>,
    /// Output directory (falls back to the manifest's out_dir)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunDirArgs {
    /// Run directory holding report_*.json and its sibling artifacts
    #[arg(value_name = "RUN_DIR")]
    run_dir: PathBuf,
}

#[derive(Clone, Copy, Debug)]
struct Window {
    lo: u64,
    hi: u64,
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Window, String> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
        let lo: u64 = lo.trim().parse().map_err(|_| format!("bad window low end {lo:?}"))?;
        let hi: u64 = hi.trim().parse().map_err(|_| format!("bad window high end {hi:?}"))?;
        if lo > hi {
            return Err(format!("window low end {lo} exceeds high end {hi}"));
        }
        Ok(Window { lo, hi })
    }
}

/// Rust ignores SIGPIPE by default, turning a closed downstream pipe
/// (`growthlab … | head`) into a println! panic; restore the usual
/// die-silently disposition expected of command-line tools.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Ball(args) => cmd_ball(&args),
        Command::Series(args) => cmd_series(&args),
        Command::Classify(args) => cmd_classify(&args),
        Command::Primes(args) => cmd_primes(&args.command),
        Command::Modp(args) => cmd_modp(&args),
        Command::Pipeline(args) => cmd_pipeline(&args),
        Command::Verify(args) => cmd_verify(&args.run_dir),
        Command::Report(args) => cmd_report(&args.run_dir),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_ball(gens: &GeneratorSet, radius: usize, budget: u64) -> Result<BallLevels> {
    let ball = enumerate_ball(gens, radius, budget)?;
    if !ball.is_complete() {
        eprintln!(
            "note: element budget {budget} exhausted; ball complete to radius {} of {radius}",
            ball.last_radius()
        );
    }
    Ok(ball)
}

fn cmd_ball(args: &BallArgs) -> Result<ExitCode> {
    let gens = load_genset(&args.gens)?;
    let ball = load_ball(&gens, args.radius, args.budget)?;
    let k = ball.last_radius();
    println!(
        "generators: {} ({}d, digest {})",
        gens.labels().join(" "),
        gens.dim(),
        gens.short_digest()
    );
    println!("radius,sphere,ball");
    let mut previous = 0u64;
    for (radius, total) in ball.counts().iter().enumerate() {
        println!("{radius},{},{total}", total - previous);
        previous = *total;
    }
    if let Some(dir) = &args.out {
        let csv = persist::ball_keys_csv(
            (0..=k).flat_map(|r| ball.sphere_keys(r).iter().map(move |key| (r, key))),
        );
        let path = persist::ball_keys_path(dir, k, &gens.short_digest());
        persist::write_text(&path, &csv)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_series(args: &BallArgs) -> Result<ExitCode> {
    let gens = load_genset(&args.gens)?;
    let ball = load_ball(&gens, args.radius, args.budget)?;
    let series = [
        count_series(&ball, CountKind::Element),
        count_series(&ball, CountKind::Trace),
        count_series(&ball, CountKind::CharPoly),
    ];
    let mut merged = String::from("radius,count,kind,gens_digest\n");
    for s in &series {
        merged.push_str(s.to_csv().split_once('\n').expect("csv has a header").1);
    }
    print!("{merged}");
    if let Some(dir) = &args.out {
        for (kind, s) in ["element", "trace", "charpoly"].iter().zip(&series) {
            let path = persist::series_path(dir, kind, &gens.short_digest());
            persist::write_text(&path, &s.to_csv())?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(args: &ClassifyArgs) -> Result<ExitCode> {
    let row = trichotomy_report(&args.gens, args.radius, args.budget)?;
    println!("{}", serde_json::to_string_pretty(&row)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_primes(command: &PrimesCommand) -> Result<ExitCode> {
    match command {
        PrimesCommand::Count { x } => {
            let result = prime_count(*x)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "x": x,
                    "count": result.count,
                    "chebyshev_ratio": result.chebyshev_ratio,
                }))?
            );
        }
        PrimesCommand::Window { lo, hi } => {
            let window = primes_in(*lo, *hi)?;
            for p in &window.primes {
                println!("{p}");
            }
            eprintln!("{} primes in [{lo}, {hi}]", window.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct InjectivityCheck {
    radius: usize,
    injective: bool,
}

#[derive(Serialize)]
struct TriplingReport {
    ball_radius: usize,
    set_size: u64,
    triple_size: u64,
    /// False when the expansion hit the cap and triple_size is a lower bound.
    complete: bool,
    /// log |AAA| / log |A|, when |A| > 1.
    exponent: Option<f64>,
}

#[derive(Serialize)]
struct PowerCoverReport {
    d_cap: usize,
    exponent: Option<usize>,
    cap_exceeded: bool,
}

#[derive(Serialize)]
struct ModPReport {
    schema: u32,
    prime: u64,
    dim: usize,
    gens_digest: String,
    group_order: u64,
    target_order: String,
    surjective: bool,
    surjectivity_radius: usize,
    distinct_traces: u64,
    distinct_charpolys: u64,
    max_trace_level_set: u64,
    injective_radius_checked: Option<InjectivityCheck>,
    tripling: Option<TriplingReport>,
    power_cover: Option<PowerCoverReport>,
}

fn cmd_modp(args: &ModpArgs) -> Result<ExitCode> {
    let gens = load_genset(&args.gens)?;
    let (outcome, group) = surjectivity_closure(&gens, args.prime, args.cap)?;
    let trace_census = value_census(&group, CensusKind::Trace)?;
    let charpoly_census = value_census(&group, CensusKind::CharPoly)?;

    let mut report = ModPReport {
        schema: 1,
        prime: args.prime,
        dim: gens.dim(),
        gens_digest: gens.short_digest().to_string(),
        group_order: outcome.closure_order,
        target_order: outcome.target_order.clone(),
        surjective: outcome.surjective,
        surjectivity_radius: outcome.radius,
        distinct_traces: trace_census.distinct_values() as u64,
        distinct_charpolys: charpoly_census.distinct_values() as u64,
        max_trace_level_set: trace_census.counts.values().copied().max().unwrap_or(0),
        injective_radius_checked: None,
        tripling: None,
        power_cover: None,
    };

    if let Some(radius) = args.radius {
        let ball = load_ball(&gens, radius, args.budget)?;
        let k = ball.last_radius();
        report.injective_radius_checked = Some(InjectivityCheck {
            radius: k,
            injective: is_injective_mod_p(&ball, k, args.prime)?,
        });
        let image = reduce_ball(&ball, k, args.prime)?;
        let triple = triple_product_size(&image, args.cap)?;
        let exponent =
            (image.len() > 1).then(|| (triple.size as f64).ln() / (image.len() as f64).ln());
        report.tripling = Some(TriplingReport {
            ball_radius: k,
            set_size: image.len() as u64,
            triple_size: triple.size,
            complete: triple.complete,
            exponent,
        });
        report.power_cover = Some(match power_cover_exponent(&image, args.d_cap, args.cap)? {
            PowerCoverOutcome::Exponent(d) => {
                PowerCoverReport { d_cap: args.d_cap, exponent: Some(d), cap_exceeded: false }
            }
            PowerCoverOutcome::CapExceeded { .. } => {
                PowerCoverReport { d_cap: args.d_cap, exponent: None, cap_exceeded: true }
            }
        });
    }

    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(dir) = &args.out {
        let path = dir.join(format!("modp_p{}_{}.json", args.prime, gens.short_digest()));
        persist::write_json(&path, "mod-p report", &report)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_pipeline(args: &PipelineArgs) -> Result<ExitCode> {
    let mut manifest = match (&args.manifest, &args.gens) {
        (Some(path), None) => ExperimentManifest::load(path)
            .with_context(|| format!("loading manifest {}", path.display()))?,
        (None, Some(gens)) => {
            let window = args
                .window
                .ok_or_else(|| anyhow!("--window LO:HI is required without --manifest"))?;
            let radius =
                args.radius.ok_or_else(|| anyhow!("--radius is required without --manifest"))?;
            let mut manifest = ExperimentManifest::new(gens.clone(), window.lo, window.hi);
            manifest.radius_k = radius;
            manifest
        }
        _ => bail!("give exactly one of --manifest or --gens"),
    };
    if let Some(budget) = args.budget {
        manifest.budget = budget;
    }
    if let Some(sample_cap) = args.sample_cap {
        manifest.sample_cap = sample_cap;
    }
    if let Some(seed) = args.seed {
        manifest.seed = seed;
    }
    if let Some(modp_cap) = args.modp_cap {
        manifest.modp_cap = modp_cap;
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| manifest.out_dir.clone().map(PathBuf::from))
        .ok_or_else(|| anyhow!("--out DIR is required (or set out_dir in the manifest)"))?;

    let report = run_pipeline(&manifest, &out_dir)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if report.status == "ok" {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "pipeline aborted at {}: {}",
            report.failed_stage.as_deref().unwrap_or("?"),
            report.failure_reason.as_deref().unwrap_or("?")
        );
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_verify(run_dir: &Path) -> Result<ExitCode> {
    let verdict = verify_run(run_dir)?;
    for check in &verdict.checks {
        let mark = if check.passed { "PASS" } else { "FAIL" };
        println!("{mark} {}: {}", check.name, check.detail);
    }
    if verdict.all_passed {
        println!("all {} checks passed", verdict.checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verification FAILED");
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_report(run_dir: &Path) -> Result<ExitCode> {
    let path = persist::find_report(run_dir)?;
    let report: growthlab::PipelineReport =
        serde_json::from_str(&persist::read_text(&path)?).context("parsing report")?;
    println!("report: {}", path.display());
    println!("status: {}", report.status);
    if let Some(stage) = &report.failed_stage {
        println!("failed stage: {stage}");
        println!("reason: {}", report.failure_reason.as_deref().unwrap_or("?"));
    }
    println!(
        "generators: {} (digest {}, dim {})",
        report.gens_file, report.gens_digest, report.dim
    );
    println!(
        "window: [{}, {}] at k = {} (implied alpha = {:.4})",
        report.manifest.window_lo,
        report.manifest.window_hi,
        report.manifest.radius_k,
        report.alpha_hat
    );
    if let Some(p) = report.prime {
        println!(
            "prime: {p} (good-prime fraction {:.3})",
            report.good_prime_fraction.unwrap_or(f64::NAN)
        );
    }
    if let Some(injective) = report.verdicts.injective_at_k {
        println!("injective at k: {injective}");
    }
    if let Some(surjectivity) = &report.surjectivity {
        println!(
            "mod-p closure: order {} of {} (surjective: {}, radius {})",
            surjectivity.closure_order,
            surjectivity.target_order,
            surjectivity.surjective,
            surjectivity.radius
        );
    }
    if let (Some(traces), Some(charpolys)) =
        (report.modp_trace_distinct, report.modp_charpoly_distinct)
    {
        println!("mod-p census: {traces} distinct traces, {charpolys} distinct charpolys");
    }
    if let Some(t) = &report.integer_traces {
        println!(
            "integer traces: {} distinct at radius {} (target n* = {}, exact: {}); at n* at least {}",
            t.distinct_at_enumerated_radius, t.enumerated_radius, t.requested_radius,
            t.exact_at_nstar, t.lower_bound_at_nstar
        );
    }
    println!("verdicts all pass: {}", report.verdicts.all);
    for (stage, ms) in &report.timings_ms {
        println!("  {stage}: {ms} ms");
    }
    Ok(if report.status == "ok" { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
