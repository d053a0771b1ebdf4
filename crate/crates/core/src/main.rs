use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dmcvqkd::config::RunConfig;
use dmcvqkd::finite_key::DeltaEntMode;
use dmcvqkd::pe::LogBase;
use dmcvqkd::report::{fmt_f64, write_table};
use dmcvqkd::validate::{check_fields, validate_bounds, CHECK_COLUMNS};
use dmcvqkd::workflow::{self, threads_from_env, with_threads};
use dmcvqkd::Result;

/// Finite-size key rates and protocol simulation for four-state
/// discrete-modulation CV-QKD.
///
/// Exit status: 0 on success, 1 on error, 2 when the workflow ran but
/// produced no key (l ≤ 0, or a simulated run aborted).
///
/// DMCVQKD_THREADS caps the worker count; results do not depend on it.
#[derive(Parser)]
#[command(name = "dmcvqkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config log base.
    #[arg(long, value_enum)]
    log_base: Option<LogBaseArg>,
    /// Overrides the config Δ_ent mode.
    #[arg(long, value_enum)]
    delta_ent_mode: Option<DeltaEntArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogBaseArg {
    Natural,
    PaperLiteral,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeltaEntArg {
    Paper,
    Alphabet,
    Derived,
}

#[derive(Subcommand)]
enum Command {
    /// Expected-case key length.
    ///
    /// Writes keyrate.csv (channel, margins, region and the key-length terms:
    /// alpha, transmittance, excess_noise, beta, snr, delta_a..c,
    /// sigma_a_max, sigma_b_max, sigma_c_min, final_length, n, raw_bits,
    /// h_mle, holevo_f, entropy_term, holevo_term, leak_ec, delta_aep,
    /// delta_ent, l, eps_total, feasible) and reduction.csv (n, k, d_a, d_b,
    /// eta, photon_cutoff, t_n_eta, t_k4_bound, truncation_eps,
    /// eps_collective, eps_general, vacuous, key_reduction).
    Keyrate(Common),
    /// Key length over a grid of one config field.
    ///
    /// Writes sweep.csv: axis, value, status (ok, no-key or error: ...) and
    /// the keyrate.csv columns.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Config field to vary, e.g. transmittance.
        #[arg(long)]
        axis: String,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        grid: Vec<f64>,
    },
    /// One seeded protocol run.
    ///
    /// Writes batch.csv (round, role, ax, ap, bx, bp) and transcript.csv
    /// (key, value rows ending with status: key, no-key, abort-pe,
    /// abort-ec, abort-hash or abort-energy).
    Simulate(Common),
    /// Monte Carlo checks of the concentration bounds.
    ///
    /// Writes bounds.csv: lemma, k, parameter, value, claimed, observed,
    /// trials, verdict.
    ValidateBounds {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
}

fn load(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_path(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(b) = c.log_base {
        cfg.log_base = match b {
            LogBaseArg::Natural => LogBase::Natural,
            LogBaseArg::PaperLiteral => LogBase::PaperLiteral,
        };
    }
    if let Some(m) = c.delta_ent_mode {
        cfg.delta_ent_mode = match m {
            DeltaEntArg::Paper => DeltaEntMode::Paper,
            DeltaEntArg::Alphabet => DeltaEntMode::Alphabet,
            DeltaEntArg::Derived => DeltaEntMode::Derived,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Keyrate(c) => {
            let cfg = load(&c)?;
            let o = workflow::keyrate(&cfg)?;
            workflow::write_keyrate(&o, &c.out)?;
            println!(
                "l = {} bits (feasible: {}), eps_total = {}, eps_general = {}",
                fmt_f64(o.key.l),
                o.key.feasible,
                fmt_f64(o.key.eps_total),
                fmt_f64(o.reduction.eps_general)
            );
            Ok(o.feasible())
        }
        Command::Sweep { common, axis, grid } => {
            let cfg = load(&common)?;
            let rows = workflow::sweep(&cfg, &axis, &grid)?;
            let (header, body) = workflow::sweep_table(&axis, &rows);
            fs::create_dir_all(&common.out)?;
            write_table(fs::File::create(common.out.join("sweep.csv"))?, &header, &body)?;
            let ok = rows.iter().filter(|r| r.status() == "ok").count();
            println!("{ok}/{} grid points with positive key", rows.len());
            Ok(ok > 0)
        }
        Command::Simulate(c) => {
            let cfg = load(&c)?;
            let o = workflow::simulate(&cfg)?;
            workflow::write_simulation(&o, &c.out)?;
            println!("status: {}, final key bits: {}", o.status.as_str(), o.final_key.len());
            Ok(o.status == workflow::RunStatus::Key)
        }
        Command::ValidateBounds { out, seed, trials } => {
            let rows = validate_bounds(seed, trials)?;
            fs::create_dir_all(&out)?;
            let body: Vec<Vec<String>> = rows.iter().map(check_fields).collect();
            write_table(fs::File::create(out.join("bounds.csv"))?, &CHECK_COLUMNS, &body)?;
            for r in &rows {
                println!(
                    "{:<26} k={:<5} {}={:<5} claimed={:.3e} observed={:.3e} {}",
                    r.lemma,
                    r.k,
                    r.parameter,
                    r.value,
                    r.claimed,
                    r.observed(),
                    r.verdict()
                );
            }
            Ok(rows.iter().all(|r| r.pass()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads_from_env().and_then(|t| with_threads(t, || run(cli)).and_then(|r| r));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

