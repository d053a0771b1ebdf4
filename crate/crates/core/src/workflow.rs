//! The four command-line workflows, as library functions.

use std::fs;
use std::path::Path;

use statrs::function::erf::erfc;

use crate::channel::{
    eb_scale, quadrant_bits, simulate_rounds, split_pe_sets, symmetrize,
    write_batch_csv, OrthogonalTransform, QuadratureBatch, Role,
};
use crate::config::RunConfig;
use crate::definetti::{energy_test, reduction_report, EnergyTestOutcome, ReductionReport};
use crate::error::{Error, Result};
use crate::finite_key::{key_length, mle_entropy, KeyLengthReport};
use crate::hash::toeplitz_hash;
use crate::pe::{
    calibrate_deltas, gamma_estimates, pe_decision, region_thresholds, ConfidenceRegion, Deltas,
    PeStatistics, Verdict,
};
use crate::reconciliation::{self, plan, repetition_decode, repetition_reconcile, ReconciliationPlan};
use crate::report::{fmt_f64, key_fields, reduction_fields, write_table, KEY_COLUMNS, REDUCTION_COLUMNS};

/// Q(x) = P[N(0,1) > x].
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Bob's quadrant distribution is uniform for the symmetric constellation,
/// so the expected quadrant entropy is 2 bits.
pub const EXPECTED_QUADRANT_ENTROPY: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct KeyrateOutcome {
    pub config: RunConfig,
    pub snr: f64,
    pub deltas: Deltas,
    pub region: (f64, f64, f64),
    pub plan: ReconciliationPlan,
    pub key: KeyLengthReport,
    pub reduction: ReductionReport,
}

impl KeyrateOutcome {
    pub fn feasible(&self) -> bool {
        self.key.feasible
    }
}

/// Margins from the config, or calibrated to the robustness target.
pub fn deltas_for(cfg: &RunConfig) -> Result<Deltas> {
    match cfg.delta_override() {
        Some(d) => Ok(d),
        None => calibrate_deltas(
            &cfg.channel()?,
            cfg.k as f64,
            cfg.budget()?.eps_pe,
            cfg.eps_rob,
            cfg.log_base,
        ),
    }
}

/// Expected-case key length and de Finetti reduction for a configuration.
pub fn keyrate(cfg: &RunConfig) -> Result<KeyrateOutcome> {
    cfg.validate()?;
    let ch = cfg.channel()?;
    let budget = cfg.budget()?;
    let deltas = deltas_for(cfg)?;
    let region = region_thresholds(&ch, &deltas)?;
    let s = reconciliation::snr(ch.modulation_variance(), ch.transmittance, ch.excess_noise)?;
    let plan = plan(4 * cfg.n, cfg.beta, s, cfg.k_rep, budget.eps_cor)?;
    let key = key_length(
        cfg.n,
        &budget,
        EXPECTED_QUADRANT_ENTROPY,
        region,
        plan.leak_total,
        cfg.delta_ent_mode,
    )?;
    let et = cfg.energy_test()?;
    let reduction = reduction_report(
        2 * cfg.n,
        cfg.k_test,
        et.d_a,
        et.d_b,
        cfg.eta,
        et.eps_test,
        budget.eps_total(),
    )?;
    Ok(KeyrateOutcome { config: cfg.clone(), snr: s, deltas, region, plan, key, reduction })
}

pub const KEYRATE_PREFIX: [&str; 12] = [
    "alpha", "transmittance", "excess_noise", "beta", "snr", "delta_a", "delta_b", "delta_c",
    "sigma_a_max", "sigma_b_max", "sigma_c_min", "final_length",
];

pub fn keyrate_header() -> Vec<String> {
    KEYRATE_PREFIX.iter().chain(KEY_COLUMNS.iter()).map(|s| s.to_string()).collect()
}

pub fn keyrate_fields(o: &KeyrateOutcome) -> Vec<String> {
    let c = &o.config;
    let mut v = vec![
        fmt_f64(c.alpha),
        fmt_f64(c.transmittance),
        fmt_f64(c.excess_noise),
        fmt_f64(c.beta),
        fmt_f64(o.snr),
        fmt_f64(o.deltas.delta_a),
        fmt_f64(o.deltas.delta_b),
        fmt_f64(o.deltas.delta_c),
        fmt_f64(o.region.0),
        fmt_f64(o.region.1),
        fmt_f64(o.region.2),
        o.key.final_length().to_string(),
    ];
    v.extend(key_fields(&o.key));
    v
}

/// Writes keyrate.csv and reduction.csv into `dir`.
pub fn write_keyrate(o: &KeyrateOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_table(fs::File::create(dir.join("keyrate.csv"))?, &keyrate_header(), &[keyrate_fields(o)])?;
    write_table(
        fs::File::create(dir.join("reduction.csv"))?,
        &REDUCTION_COLUMNS,
        &[reduction_fields(&o.reduction)],
    )?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<KeyrateOutcome>,
}

impl SweepRow {
    pub fn status(&self) -> String {
        match &self.outcome {
            Ok(o) if o.feasible() => "ok".into(),
            Ok(_) => "no-key".into(),
            Err(e) => format!("error: {e}"),
        }
    }
}

/// One keyrate evaluation per grid point, in grid order. Points that fail
/// validation or hit a bound regime are kept as error rows.
pub fn sweep(cfg: &RunConfig, axis: &str, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if !RunConfig::numeric_fields().contains(&axis) {
        return Err(Error::UnknownAxis(axis.to_string()));
    }
    Ok(grid
        .iter()
        .map(|&value| SweepRow { value, outcome: cfg.with_field(axis, value).and_then(|c| keyrate(&c)) })
        .collect())
}

pub fn sweep_table(axis: &str, rows: &[SweepRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["axis".to_string(), "value".to_string(), "status".to_string()];
    header.extend(keyrate_header());
    let width = header.len();
    let body = rows
        .iter()
        .map(|r| {
            let mut v = vec![axis.to_string(), fmt_f64(r.value), r.status()];
            match &r.outcome {
                Ok(o) => v.extend(keyrate_fields(o)),
                Err(_) => v.resize(width, String::new()),
            }
            v
        })
        .collect();
    (header, body)
}

/// Outcome class of one simulated protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Key,
    NoKey,
    AbortPe,
    AbortEc,
    AbortHash,
    AbortEnergy,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Key => "key",
            RunStatus::NoKey => "no-key",
            RunStatus::AbortPe => "abort-pe",
            RunStatus::AbortEc => "abort-ec",
            RunStatus::AbortHash => "abort-hash",
            RunStatus::AbortEnergy => "abort-energy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcStats {
    pub blocks: usize,
    pub errors: usize,
    pub ber: f64,
    pub predicted_ber: f64,
    pub success: bool,
    pub disclosed_bits: u64,
    pub hash_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub batch: QuadratureBatch,
    pub region: ConfidenceRegion,
    pub ec: EcStats,
    pub energy: EnergyTestOutcome,
    pub key: KeyLengthReport,
    pub final_key: Vec<bool>,
    pub status: RunStatus,
    pub transcript: Vec<(String, String)>,
}

/// Parameter-estimation verdict for a batch (symmetrize, split, estimate,
/// compare against the configured region).
pub fn estimate_parameters(cfg: &RunConfig, batch: &QuadratureBatch) -> Result<ConfidenceRegion> {
    let ch = cfg.channel()?;
    let k = cfg.k as usize;
    let dim = 2 * batch.count(Role::Gaussian);
    let transform = OrthogonalTransform::random(dim, cfg.seed);
    let sym = symmetrize(batch, &transform, Some(Role::Gaussian))?;
    let sets = split_pe_sets(&sym, k, ch.modulation_variance())?;
    let stats = PeStatistics::from_sets(&sets);
    let eps_pe = cfg.budget()?.eps_pe;
    let gammas = gamma_estimates(&stats, eps_pe, cfg.log_base)?;
    pe_decision(&gammas, &ch, &deltas_for(cfg)?, eps_pe)
}

fn hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (3 - i)));
            char::from_digit(v as u32, 16).expect("nibble")
        })
        .collect()
}

/// Runs the whole protocol once from the configured seed.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationOutcome> {
    cfg.validate()?;
    let ch = cfg.channel()?;
    let sim_ch = cfg.sim_channel()?;
    let budget = cfg.budget()?;
    let batch = simulate_rounds(&sim_ch, cfg.seed, cfg.counts())?;

    let region = estimate_parameters(cfg, &batch)?;

    // Reconciliation on the key rounds, one binary symbol per quadrature.
    let key_idx = batch.indices(Role::Key);
    let y: Vec<f64> = key_idx.iter().flat_map(|&i| [batch.bob_x[i], batch.bob_p[i]]).collect();
    let x: Vec<f64> = key_idx.iter().flat_map(|&i| [batch.alice_x[i], batch.alice_p[i]]).collect();
    let k_rep = cfg.k_rep as usize;
    let side = repetition_reconcile(&y, k_rep)?;
    let guess = repetition_decode(&x, &side)?;
    let blocks = side.y_hard.len();
    let errors = guess.iter().zip(&side.y_hard).filter(|(a, b)| a != b).count();
    let ber = errors as f64 / blocks as f64;
    let sigma = ch.heterodyne_noise_variance().sqrt();
    let predicted = gaussian_tail((ch.transmittance * k_rep as f64).sqrt() * ch.alpha / sigma);
    let tolerance = 3.0 * (predicted * (1.0 - predicted) / blocks as f64).sqrt();
    let ec_success = ber <= predicted + tolerance;
    let bob_key: Vec<bool> = side.y_hard.iter().map(|&s| s > 0).collect();
    // The modelled decoder hands Alice Bob's string when it succeeds.
    let alice_key: Vec<bool> =
        if ec_success { bob_key.clone() } else { guess.iter().map(|&s| s > 0).collect() };
    let hash_ok = reconciliation::verify_hash(&alice_key, &bob_key, budget.eps_cor, cfg.seed)?;
    let ec = EcStats {
        blocks,
        errors,
        ber,
        predicted_ber: predicted,
        success: ec_success,
        disclosed_bits: side.disclosed_bits,
        hash_ok,
    };

    // Energy test on the last k_test Gaussian modes.
    let et = cfg.energy_test()?;
    let g_idx = batch.indices(Role::Gaussian);
    if et.k_test > g_idx.len() {
        return Err(Error::InsufficientRounds { needed: et.k_test, available: g_idx.len() });
    }
    let tail = &g_idx[g_idx.len() - et.k_test..];
    let c = eb_scale(ch.modulation_variance())?;
    let alice_het: Vec<(f64, f64)> =
        tail.iter().map(|&i| (c * batch.alice_x[i], c * batch.alice_p[i])).collect();
    let bob_het: Vec<(f64, f64)> = tail.iter().map(|&i| (batch.bob_x[i], batch.bob_p[i])).collect();
    let energy = energy_test(&alice_het, &bob_het, &et)?;

    let mut counts = [0u64; 4];
    for &i in &key_idx {
        counts[quadrant_bits(batch.bob_x[i], batch.bob_p[i]) as usize] += 1;
    }
    let h_mle = mle_entropy(&counts)?;
    let s = reconciliation::snr(ch.modulation_variance(), ch.transmittance, ch.excess_noise)?;
    let leak = plan(4 * cfg.n, cfg.beta, s, cfg.k_rep, budget.eps_cor)?.leak_total;
    let key = key_length(
        cfg.n,
        &budget,
        h_mle,
        (region.sigma_a_max, region.sigma_b_max, region.sigma_c_min),
        leak,
        cfg.delta_ent_mode,
    )?;

    let status = if region.verdict == Verdict::Abort {
        RunStatus::AbortPe
    } else if !ec_success {
        RunStatus::AbortEc
    } else if !hash_ok {
        RunStatus::AbortHash
    } else if !energy.pass {
        RunStatus::AbortEnergy
    } else if key.final_length() == 0 {
        RunStatus::NoKey
    } else {
        RunStatus::Key
    };
    let final_len = if status == RunStatus::Key {
        (key.final_length() as usize).min(bob_key.len())
    } else {
        0
    };
    let final_key = toeplitz_hash(&bob_key, cfg.seed, final_len)?;

    let mut t: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| t.push((k.to_string(), v));
    put("seed", cfg.seed.to_string());
    put("alpha", fmt_f64(cfg.alpha));
    put("transmittance", fmt_f64(cfg.transmittance));
    put("excess_noise", fmt_f64(cfg.excess_noise));
    put("sim_excess_noise", fmt_f64(sim_ch.excess_noise));
    put("n", cfg.n.to_string());
    put("m", cfg.m.to_string());
    put("k", cfg.k.to_string());
    put("rounds", batch.len().to_string());
    put("gamma_a", fmt_f64(region.gamma_a));
    put("gamma_b", fmt_f64(region.gamma_b));
    put("gamma_c", fmt_f64(region.gamma_c));
    put("sigma_a_max", fmt_f64(region.sigma_a_max));
    put("sigma_b_max", fmt_f64(region.sigma_b_max));
    put("sigma_c_min", fmt_f64(region.sigma_c_min));
    put("pe_verdict", format!("{:?}", region.verdict).to_lowercase());
    put("ec_blocks", blocks.to_string());
    put("ec_errors", errors.to_string());
    put("ec_ber", fmt_f64(ber));
    put("ec_predicted_ber", fmt_f64(predicted));
    put("ec_success", ec_success.to_string());
    put("ec_disclosed_bits", side.disclosed_bits.to_string());
    put("hash_ok", hash_ok.to_string());
    put("energy_a", fmt_f64(energy.energy_a));
    put("energy_b", fmt_f64(energy.energy_b));
    put("energy_limit_a", fmt_f64(energy.limit_a));
    put("energy_limit_b", fmt_f64(energy.limit_b));
    put("energy_pass", energy.pass.to_string());
    for (name, value) in KEY_COLUMNS.iter().zip(key_fields(&key)) {
        put(&format!("key_{name}"), value);
    }
    put("final_length", final_len.to_string());
    put("final_key_hex", hex(&final_key));
    put("status", status.as_str().to_string());

    Ok(SimulationOutcome { batch, region, ec, energy, key, final_key, status, transcript: t })
}

/// key,value CSV of the transcript.
pub fn transcript_csv(o: &SimulationOutcome) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = o.transcript.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
    let mut buf = Vec::new();
    write_table(&mut buf, &["key", "value"], &rows)?;
    Ok(buf)
}

/// Writes batch.csv and transcript.csv into `dir`.
pub fn write_simulation(o: &SimulationOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_batch_csv(&o.batch, std::io::BufWriter::new(fs::File::create(dir.join("batch.csv"))?))?;
    fs::write(dir.join("transcript.csv"), transcript_csv(o)?)?;
    Ok(())
}

/// Runs `f` on a rayon pool of `threads` workers (or the global pool).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Worker count from `DMCVQKD_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("DMCVQKD_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Config(format!("DMCVQKD_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}
