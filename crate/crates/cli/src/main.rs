//! `noisekex` — command-line laboratory for thermal-noise key exchange.
//!
//! One verb per experiment family:
//!
//! - `simulate-kljn` / `simulate-thermod`: run a full scenario and emit
//!   per-bit records plus a summary
//! - `attack`: run the eavesdropper against the configured system
//! - `amplify`: tabulate XOR privacy amplification
//! - `ber-curve`: sweep bit-error rate against samples per bit
//! - `power-report`: price the configured power budget
//! - `claims-check`: run every pinned quantitative claim and exit nonzero on
//!   any failure
//!
//! Every run is seeded: `--seed` overrides the config's `master_seed`, and
//! identical seeds reproduce identical output files.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use noisekex::errstat::{monte_carlo_ber, SystemUnderTest};
use noisekex::harness::claims::{failed_count, run_claims, ClaimsOptions};
use noisekex::harness::config::{Scenario, ScenarioConfig};
use noisekex::harness::report::{
    emit_amplify, emit_attack, emit_ber_curve, emit_claims, emit_outcome, emit_power,
    BerCurveRow, OutputFormat,
};
use noisekex::harness::scenario::{amplify_table, run_scenario, standard_power_report};
use noisekex::SystemKind;

/// "noisekex" in ASCII; used only when neither --seed nor a config is given.
const DEFAULT_MASTER_SEED: u64 = 0x6E6F_6973_656B_6578;

/// Prints a line to stdout, exiting quietly when the consumer has gone away
/// (`noisekex ... | head` must not panic).
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(name = "noisekex", version, about = "Thermal-noise key exchange laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario configuration file (TOML). Defaults are used when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides the config's master_seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory for emitted files.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Monte Carlo trial count; overrides the config's trials.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Output format for emitted files.
    #[arg(long, value_name = "FMT", default_value = "csv")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the wired KLJN loop end to end.
    SimulateKljn(CommonArgs),
    /// Simulate the TherMod wireless chain end to end.
    SimulateThermod(CommonArgs),
    /// Run the eavesdropper against the configured system.
    Attack(CommonArgs),
    /// Tabulate XOR privacy amplification from a raw key.
    Amplify {
        #[command(flatten)]
        common: CommonArgs,
        /// Raw key length; overrides the config's n_bits.
        #[arg(long, value_name = "N")]
        bits: Option<usize>,
        /// Eve's per-bit correct probability before amplification.
        #[arg(long, value_name = "P", default_value_t = 0.75)]
        p0: f64,
        /// Number of XOR-halving iterations; overrides pa_iterations.
        #[arg(long, value_name = "K")]
        iterations: Option<u32>,
    },
    /// Sweep bit-error rate against samples per bit.
    BerCurve {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated samples-per-bit grid.
        #[arg(long, value_name = "N,N,...", default_value = "10,30,100,300,1000")]
        samples: String,
        /// Append rows to an existing ber_curve.csv instead of rewriting it.
        #[arg(long)]
        append: bool,
    },
    /// Price the configured power budget.
    PowerReport(CommonArgs),
    /// Run the quantitative claims suite; exits with the number of failures.
    ClaimsCheck {
        #[command(flatten)]
        common: CommonArgs,
        /// Run a single claim group (e.g. "eve-75") or check
        /// (e.g. "eve-75/accuracy").
        #[arg(long, value_name = "ID")]
        claim: Option<String>,
        /// Scales every statistical tolerance (0 makes statistical claims
        /// fail; a checker sanity probe).
        #[arg(long, value_name = "F", default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

/// Loads the scenario: config file if given, otherwise the desk-scale default
/// for `fallback_system`; then applies the seed/trials overrides.
fn load_scenario(common: &CommonArgs, fallback_system: SystemKind) -> Result<Scenario> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::from_path(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => match fallback_system {
            SystemKind::Kljn => ScenarioConfig::default_kljn(DEFAULT_MASTER_SEED),
            SystemKind::Thermod => ScenarioConfig::default_thermod(DEFAULT_MASTER_SEED),
        },
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    Ok(cfg.validate()?)
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        outln!("wrote {}", p.display());
    }
}

fn simulate(common: &CommonArgs, system: SystemKind) -> Result<()> {
    let scenario = load_scenario(common, system)?;
    if scenario.system() != system {
        bail!(
            "config system is '{}' but this subcommand simulates '{system}'",
            scenario.system()
        );
    }
    let outcome = run_scenario(&scenario)?;
    outln!(
        "{} bits on {}: legit error rate {:.3e}, eve accuracy {:.4}, certain fraction {:.4}",
        outcome.n_bits,
        outcome.system,
        outcome.legit_error_rate,
        outcome.attack.accuracy,
        outcome.attack.certain_fraction,
    );
    outln!(
        "distilled {} -> {} bits (k = {}), eve prob {:.6} -> {:.10}, leakage {:.3e} bits/bit",
        outcome.pa.input_bits,
        outcome.pa.output_bits,
        outcome.pa.iterations,
        outcome.pa.input_eve_prob,
        outcome.pa.output_eve_prob,
        outcome.pa.output_leakage_bits,
    );
    report_written(&emit_outcome(&outcome, &common.out, common.format)?);
    Ok(())
}

fn attack(common: &CommonArgs) -> Result<()> {
    let scenario = load_scenario(common, SystemKind::Kljn)?;
    let cfg = &scenario.config;
    let summary = match scenario.system() {
        SystemKind::Kljn => noisekex::adversary::run_kljn_key_attack(
            cfg.n_bits,
            &cfg.pair,
            &cfg.noise,
            cfg.master_seed,
        )?,
        SystemKind::Thermod => {
            let (amp, ch) = scenario.wireless.as_ref().expect("validated thermod scenario");
            noisekex::adversary::run_thermod_intercept(
                cfg.n_bits,
                &cfg.pair,
                &cfg.noise,
                amp,
                ch,
                cfg.master_seed,
            )?
        }
    };
    outln!(
        "eve attacked {} bits on {}: {} correct (accuracy {:.4}), certain fraction {:.4}",
        summary.bits_attacked,
        scenario.system(),
        summary.bits_correct,
        summary.accuracy,
        summary.certain_fraction,
    );
    report_written(&emit_attack(&summary, scenario.system(), &common.out, common.format)?);
    Ok(())
}

fn amplify(common: &CommonArgs, bits: Option<usize>, p0: f64, iterations: Option<u32>) -> Result<()> {
    let scenario = load_scenario(common, SystemKind::Kljn)?;
    let n_bits = bits.unwrap_or(scenario.config.n_bits);
    let k = iterations.unwrap_or(scenario.config.pa_iterations);
    let rows = amplify_table(n_bits, p0, k, scenario.config.master_seed)?;
    for r in &rows {
        outln!(
            "iteration {}: {} bits, eve prob {:.10}, leakage {:.3e} bits/bit, {}x raw cost",
            r.iteration, r.key_length, r.eve_correct_prob, r.leakage_bits, r.cycle_multiplier,
        );
    }
    report_written(&emit_amplify(&rows, &common.out, common.format)?);
    Ok(())
}

fn parse_samples_grid(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .with_context(|| format!("invalid samples-per-bit value '{tok}'"))
        })
        .collect()
}

fn ber_curve(common: &CommonArgs, samples: &str, append: bool) -> Result<()> {
    let scenario = load_scenario(common, SystemKind::Thermod)?;
    let cfg = &scenario.config;
    let system = match scenario.system() {
        SystemKind::Kljn => SystemUnderTest::Kljn { pair: cfg.pair },
        SystemKind::Thermod => {
            let (amp, ch) = scenario.wireless.as_ref().expect("validated thermod scenario");
            SystemUnderTest::Thermod {
                pair: cfg.pair,
                amp: *amp,
                ch: ch.clone(),
            }
        }
    };
    let grid = parse_samples_grid(samples)?;
    if grid.is_empty() {
        bail!("samples grid is empty");
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &n in &grid {
        let mut spec = cfg.noise.clone();
        // The sweep overrides the per-bit sample count; keep the rest.
        spec.samples_per_bit = n;
        let point = monte_carlo_ber(&system, &spec, n, cfg.trials, cfg.master_seed)?;
        let variance_ratio = system.effective_variance_ratio(&spec);
        outln!(
            "N = {:>6}: analytic {:.6e}, monte carlo {:.6e} over {} trials (ratio {:.3})",
            n,
            point.ber_analytic,
            point.ber_monte_carlo.unwrap_or(f64::NAN),
            point.trials,
            variance_ratio,
        );
        rows.push(BerCurveRow {
            point,
            variance_ratio,
        });
    }
    report_written(&emit_ber_curve(&rows, &common.out, common.format, append)?);
    Ok(())
}

fn power_report(common: &CommonArgs) -> Result<()> {
    let scenario = load_scenario(common, SystemKind::Kljn)?;
    let report = standard_power_report(
        &scenario.power,
        scenario.system(),
        scenario.config.pa_iterations,
    )?;
    outln!(
        "p_kljn = {} W, p_thermod = {} W",
        report.p_kljn_watts, report.p_thermod_watts
    );
    for e in &report.energy {
        outln!(
            "{} @ k = {}, secure fraction {}: {}x cycles, {} J per final bit",
            e.system, e.pa_iterations, e.secure_fraction, e.cycle_multiplier, e.joules,
        );
    }
    report_written(&emit_power(
        &report,
        &scenario.power.kljn_components,
        &common.out,
        common.format,
    )?);
    Ok(())
}

fn claims_check(common: &CommonArgs, claim: Option<String>, tolerance_scale: f64) -> Result<u8> {
    let options = ClaimsOptions {
        master_seed: common.seed.unwrap_or(ClaimsOptions::default().master_seed),
        tolerance_scale,
        filter: claim,
    };
    let results = run_claims(&options)?;
    for r in &results {
        let status = if r.pass { "PASS" } else { "FAIL" };
        outln!(
            "[{status}] {}: measured {:.6e} vs expected {:.6e} (tolerance {:.3e}, {}) — {}",
            r.claim_id, r.measured, r.expected, r.tolerance, r.comparison, r.paper_anchor,
        );
    }
    let failed = failed_count(&results);
    outln!(
        "{} checks, {} failed{}",
        results.len(),
        failed,
        if failed == 0 { " — all claims hold" } else { "" },
    );
    report_written(&emit_claims(&results, &common.out, common.format)?);
    Ok(failed.min(u8::MAX as usize) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<u8> {
        match &cli.command {
            Command::SimulateKljn(common) => simulate(common, SystemKind::Kljn).map(|()| 0),
            Command::SimulateThermod(common) => simulate(common, SystemKind::Thermod).map(|()| 0),
            Command::Attack(common) => attack(common).map(|()| 0),
            Command::Amplify {
                common,
                bits,
                p0,
                iterations,
            } => amplify(common, *bits, *p0, *iterations).map(|()| 0),
            Command::BerCurve {
                common,
                samples,
                append,
            } => ber_curve(common, samples, *append).map(|()| 0),
            Command::PowerReport(common) => power_report(common).map(|()| 0),
            Command::ClaimsCheck {
                common,
                claim,
                tolerance_scale,
            } => claims_check(common, claim.clone(), *tolerance_scale),
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
