//! Experiment runner: parses a TOML config plus command-line overrides,
//! dispatches one of the named experiments, writes the resulting report
//! rows as CSV or JSON, and exits 0 when every verdict is within bounds,
//! 2 when any verdict is violated, 1 on usage errors.

use clap::Parser;
use kacs_core::analysis::{self, ClaimKind, EstimateReport, StateSampler, Verdict};
use kacs_core::circuit::{
    self, apply_gate_sequence, prss_decrypt, prss_encrypt, scramble, steer_to_target, EncMode,
    ParamSource, ScramblerKey, SteerMode,
};
use kacs_core::haar::{haar_sphere_sample, haar_tail_probability};
use kacs_core::{Field, RngStream, StateVector};
use serde::Deserialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(
    name = "kacs",
    about = "Parallel Kac's walk laboratory: couplings, scramblers, statistics",
    disable_help_subcommand = true
)]
struct Cli {
    /// Experiment: walk-mix | couple-contract | couple-coalesce | scramble |
    /// steer | stats | enc-demo | connectivity | gate-error
    experiment: String,
    /// TOML config file; command-line flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (mandatory, here or in the config).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Sphere dimension W (walk experiments).
    #[arg(short = 'W', long)]
    w: Option<usize>,
    /// Qubit count n (circuit experiments; W = 2^n).
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    field: Option<String>,
    /// Step count T.
    #[arg(long)]
    t_steps: Option<usize>,
    /// Curve length for couple-contract.
    #[arg(long)]
    l_max: Option<usize>,
    /// Matching count for connectivity.
    #[arg(long)]
    l: Option<usize>,
    /// Exponent c entering bounds and presets.
    #[arg(long)]
    c: Option<f64>,
    /// Precision bits d.
    #[arg(long)]
    d: Option<u32>,
    /// Contracting-phase steps (couple-coalesce).
    #[arg(long)]
    phase1: Option<usize>,
    /// Coalescing-phase steps (couple-coalesce).
    #[arg(long)]
    phase2: Option<usize>,
    /// Coalescence frequency target.
    #[arg(long)]
    target: Option<f64>,
    /// Parameter source: true-random | keyed.
    #[arg(long)]
    source: Option<String>,
    /// Scrambler key as hex (keyed source / enc-demo).
    #[arg(long)]
    key: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv | json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    experiment: Option<String>,
    seed: Option<u64>,
    trials: Option<u64>,
    w: Option<usize>,
    n: Option<u32>,
    field: Option<String>,
    t_steps: Option<usize>,
    l_max: Option<usize>,
    l: Option<usize>,
    c: Option<f64>,
    d: Option<u32>,
    phase1: Option<usize>,
    phase2: Option<usize>,
    target: Option<f64>,
    source: Option<String>,
    key: Option<String>,
    out: Option<String>,
    format: Option<String>,
}

/// Fully resolved experiment parameters.
struct Config {
    experiment: String,
    seed: u64,
    trials: Option<u64>,
    w: Option<usize>,
    n: Option<u32>,
    field: Field,
    t_steps: Option<usize>,
    l_max: Option<usize>,
    l: Option<usize>,
    c: f64,
    d: u32,
    phase1: Option<usize>,
    phase2: Option<usize>,
    target: f64,
    source: String,
    key: Option<String>,
    out: Option<PathBuf>,
    format: String,
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

fn resolve(cli: Cli) -> Result<Config, UsageError> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| UsageError(format!("bad config: {e}")))?
        }
        None => FileConfig::default(),
    };
    let experiment = if cli.experiment == "from-config" {
        match file.experiment.clone() {
            Some(e) => e,
            None => return usage("config file does not name an experiment"),
        }
    } else {
        cli.experiment.clone()
    };
    let seed = match cli.seed.or(file.seed) {
        Some(s) => s,
        None => return usage("seed is mandatory (reproducibility contract)"),
    };
    let field_str = cli.field.or(file.field).unwrap_or_else(|| "real".into());
    let field = Field::from_str(&field_str)
        .map_err(|_| UsageError(format!("unknown field {field_str:?}")))?;
    let format = cli.format.or(file.format).unwrap_or_else(|| "csv".into());
    if format != "csv" && format != "json" {
        return usage(format!("unknown format {format:?} (expected csv or json)"));
    }
    let source = cli.source.or(file.source).unwrap_or_else(|| "true-random".into());
    if source != "true-random" && source != "keyed" {
        return usage(format!("unknown source {source:?}"));
    }
    Ok(Config {
        experiment,
        seed,
        trials: cli.trials.or(file.trials),
        w: cli.w.or(file.w),
        n: cli.n.or(file.n),
        field,
        t_steps: cli.t_steps.or(file.t_steps),
        l_max: cli.l_max.or(file.l_max),
        l: cli.l.or(file.l),
        c: cli.c.or(file.c).unwrap_or(2.0),
        d: cli.d.or(file.d).unwrap_or(16),
        phase1: cli.phase1.or(file.phase1),
        phase2: cli.phase2.or(file.phase2),
        target: cli.target.or(file.target).unwrap_or(0.9),
        source,
        key: cli.key.or(file.key),
        out: cli.out.or(file.out.map(PathBuf::from)),
        format,
    })
}

fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T, UsageError> {
    v.ok_or_else(|| UsageError(format!("missing parameter: {name}")))
}

fn log2_ceil(w: usize) -> usize {
    (usize::BITS - (w - 1).leading_zeros()) as usize
}

/// Step-count preset `T = 10 (c+1) log2 W` for Wasserstein mixing.
fn mixing_preset_steps(w: usize, c: f64) -> usize {
    (10.0 * (c + 1.0) * log2_ceil(w) as f64).ceil() as usize
}

struct ScrambleSampler {
    input: StateVector,
    t_steps: usize,
    d: u32,
    key: Option<ScramblerKey>,
}

impl StateSampler for ScrambleSampler {
    fn sample(&self, rng: &RngStream) -> kacs_core::Result<StateVector> {
        let out = match &self.key {
            Some(k) => scramble(&self.input, self.t_steps, &ParamSource::Keyed(k), self.d)?.0,
            None => {
                scramble(&self.input, self.t_steps, &ParamSource::TrueRandom(rng), self.d)?.0
            }
        };
        Ok(out)
    }
}

fn run_experiment(cfg: &Config) -> Result<Vec<EstimateReport>, Box<dyn std::error::Error>> {
    let rng = RngStream::from_seed_u64(cfg.seed);
    let trials = cfg.trials.unwrap_or(10_000);
    match cfg.experiment.as_str() {
        "walk-mix" => {
            let w = require(cfg.w, "W")?;
            let t = cfg.t_steps.unwrap_or_else(|| mixing_preset_steps(w, cfg.c));
            Ok(vec![analysis::w1_upper_bound(w, cfg.field, t, cfg.c, trials, &rng)?])
        }
        "couple-contract" => {
            let w = require(cfg.w, "W")?;
            let l_max = require(cfg.l_max, "l_max")?;
            Ok(analysis::contraction_curve(w, cfg.field, l_max, trials, &rng)?)
        }
        "couple-coalesce" => {
            let w = require(cfg.w, "W")?;
            let phase1 = cfg.phase1.unwrap_or(400);
            let phase2 = cfg.phase2.unwrap_or(5 * (1 + cfg.c.ceil() as usize) * log2_ceil(w));
            Ok(vec![analysis::coalescence_experiment(
                w,
                cfg.field,
                phase1,
                phase2,
                cfg.target,
                cfg.trials.unwrap_or(500),
                &rng,
            )?])
        }
        "scramble" => {
            let n = require(cfg.n, "n")?;
            let w = 1usize << n;
            let t = cfg.t_steps.unwrap_or_else(|| mixing_preset_steps(w, cfg.c));
            let key = match (cfg.source.as_str(), &cfg.key) {
                ("keyed", Some(hex)) => Some(ScramblerKey::from_hex(hex)?),
                ("keyed", None) => Some(ScramblerKey::expanded([7u8; 32], cfg.field, t, cfg.d)),
                _ => None,
            };
            let sampler = ScrambleSampler {
                input: StateVector::basis(cfg.field, w, 0)?,
                t_steps: t,
                d: cfg.d,
                key,
            };
            let mut reports = Vec::new();
            for moment in [1u32, 2] {
                reports.push(analysis::frame_potential(
                    &sampler,
                    moment,
                    trials,
                    &rng.substream(moment as u64),
                )?);
            }
            Ok(reports)
        }
        "steer" => {
            let n = require(cfg.n, "n")?;
            let w = 1usize << n;
            let count = cfg.trials.unwrap_or(100);
            let mut max_cont = 0.0f64;
            let mut max_disc = 0.0f64;
            let gates_len = match cfg.field {
                Field::Real => n as usize,
                Field::Complex => n as usize + 1,
            };
            for trial in 0..count {
                let mut trng = rng.substream(trial);
                let eta = haar_sphere_sample(w, cfg.field, &mut trng)?;
                let xi = haar_sphere_sample(w, cfg.field, &mut trng)?;
                let gates = steer_to_target(&eta, &xi, SteerMode::Continuous)?;
                let reached = apply_gate_sequence(&eta, &gates)?;
                max_cont = max_cont.max(reached.max_amp_distance(&xi));
                let gates = steer_to_target(&eta, &xi, SteerMode::Discrete(cfg.d))?;
                let reached = apply_gate_sequence(&eta, &gates)?;
                max_disc = max_disc.max(reached.l2_distance(&xi));
            }
            let disc_bound = match cfg.field {
                Field::Real => {
                    gates_len as f64 * 2f64.powi(1 - cfg.d as i32) * std::f64::consts::PI
                }
                Field::Complex => gates_len as f64 * 2f64.powf(6.0 - cfg.d as f64 / 2.0),
            };
            Ok(vec![
                EstimateReport::new(
                    format!("steer-continuous-{}-n{n}", cfg.field),
                    max_cont,
                    0.0,
                    count,
                    Some(1e-9),
                    ClaimKind::UpperBound,
                ),
                EstimateReport::new(
                    format!("steer-discrete-d{}-{}-n{n}", cfg.d, cfg.field),
                    max_disc,
                    0.0,
                    count,
                    Some(disc_bound),
                    ClaimKind::UpperBound,
                ),
            ])
        }
        "stats" => {
            let w = require(cfg.w, "W")?;
            let n_trials = cfg.trials.unwrap_or(100_000);
            let mut reports = Vec::new();
            for (field, lane) in [(Field::Real, 0u64), (Field::Complex, 1u64)] {
                let t = haar_tail_probability(w, cfg.c, field, n_trials, &rng.substream(lane))?;
                reports.push(EstimateReport::new(
                    format!("haar-tail-{field}-W{w}-c{}", cfg.c),
                    t.estimate,
                    t.stderr,
                    t.trials,
                    Some(t.bound),
                    ClaimKind::UpperBound,
                ));
            }
            Ok(reports)
        }
        "enc-demo" => {
            let n = require(cfg.n, "n")?;
            let w = 1usize << n;
            let t = cfg.t_steps.unwrap_or(50);
            let key = match &cfg.key {
                Some(hex) => ScramblerKey::from_hex(hex)?,
                None => {
                    let mut seed_bytes = [0u8; 32];
                    seed_bytes[..8].copy_from_slice(&cfg.seed.to_le_bytes());
                    ScramblerKey::expanded(seed_bytes, cfg.field, t, cfg.d)
                }
            };
            let count = cfg.trials.unwrap_or(200);
            let mut max_err = 0.0f64;
            let mut identical = true;
            for trial in 0..count {
                let mut trng = rng.substream(trial);
                let psi = haar_sphere_sample(w, cfg.field, &mut trng)?;
                let c1 = prss_encrypt(&psi, &key, EncMode::PrgExpanded, None)?;
                let c2 = prss_encrypt(&psi, &key, EncMode::PrgExpanded, None)?;
                identical &= c1 == c2;
                let back = prss_decrypt(&c1, &key, EncMode::PrgExpanded)?;
                max_err = max_err.max(back.max_amp_distance(&psi));
            }
            // Randomized-mode ciphertext overlaps vs the Haar oracle.
            let psi = StateVector::basis(cfg.field, w, 0)?;
            let enc_t = mixing_preset_steps(w, cfg.c);
            let enc_key = ScramblerKey::expanded([3u8; 32], cfg.field, enc_t, cfg.d);
            let prf_sampler = move |r: &RngStream| -> kacs_core::Result<StateVector> {
                let mut rr = r.clone();
                Ok(prss_encrypt(&psi, &enc_key, EncMode::PrfRandomized, Some(&mut rr))?.state)
            };
            let overlap = analysis::frame_potential(
                &prf_sampler,
                1,
                count.max(200),
                &rng.substream(u64::MAX - 7),
            )?;
            Ok(vec![
                EstimateReport::new(
                    format!("enc-round-trip-{}-n{n}-T{t}", cfg.field),
                    max_err,
                    0.0,
                    count,
                    Some(1e-9),
                    ClaimKind::UpperBound,
                ),
                EstimateReport::new(
                    format!("enc-key-reuse-identical-{}-n{n}", cfg.field),
                    if identical { 1.0 } else { 0.0 },
                    0.0,
                    count,
                    Some(1.0),
                    ClaimKind::MatchesValue,
                ),
                EstimateReport::new(
                    format!("enc-prf-overlap-{}-n{n}", cfg.field),
                    overlap.estimate,
                    overlap.stderr,
                    overlap.trials,
                    overlap.bound,
                    ClaimKind::MatchesValue,
                ),
            ])
        }
        "connectivity" => {
            let w = require(cfg.w, "W")?;
            let l = cfg
                .l
                .unwrap_or_else(|| (5.0 * (1.0 + cfg.c) * log2_ceil(w) as f64).ceil() as usize);
            Ok(vec![analysis::connectivity_probability(w, l, cfg.c, trials, &rng)?])
        }
        "gate-error" => {
            let instances = cfg.trials.unwrap_or(100);
            let mut reports = Vec::new();
            for &d in &[4u32, 8, 12] {
                let mut max_dist = 0.0f64;
                for n in 3..=8u32 {
                    for inst in 0..instances {
                        let r = rng.substream(d as u64 * 1_000_000 + n as u64 * 10_000 + inst);
                        let cont = circuit::random_continuous_params(n, Field::Real, &r)?;
                        let disc = cont.truncated(d)?;
                        max_dist = max_dist.max(circuit::gate_operator_distance(&disc, &cont)?);
                    }
                }
                reports.push(EstimateReport::new(
                    format!("gate-error-real-d{d}"),
                    max_dist,
                    0.0,
                    instances * 6,
                    Some(2f64.powi(1 - d as i32) * std::f64::consts::PI),
                    ClaimKind::UpperBound,
                ));
            }
            let d = cfg.d;
            let mut max_dist = 0.0f64;
            for n in 3..=5u32 {
                for inst in 0..instances {
                    let r = rng.substream(77_000_000 + n as u64 * 10_000 + inst);
                    let cont = circuit::random_continuous_params(n, Field::Complex, &r)?;
                    let disc = cont.truncated(d)?;
                    max_dist = max_dist.max(circuit::gate_operator_distance(&disc, &cont)?);
                }
            }
            reports.push(EstimateReport::new(
                format!("gate-error-complex-d{d}"),
                max_dist,
                0.0,
                instances * 3,
                Some(2f64.powf(6.0 - d as f64 / 2.0)),
                ClaimKind::UpperBound,
            ));
            Ok(reports)
        }
        other => Err(Box::new(UsageError(format!("unknown experiment {other:?}")))),
    }
}

fn write_reports(
    cfg: &Config,
    reports: &[EstimateReport],
) -> Result<(), Box<dyn std::error::Error>> {
    let body = if cfg.format == "json" {
        serde_json::to_string_pretty(reports)? + "\n"
    } else {
        let mut s = String::from(EstimateReport::CSV_HEADER);
        s.push('\n');
        for r in reports {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("KACS_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            // Worker count caps speed only; per-trial substreams keep the
            // results independent of scheduling.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            // --help / --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let cfg = match resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(1);
        }
    };
    let reports = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for r in &reports {
        let tag = match r.verdict {
            Verdict::Within => "within",
            Verdict::Violated => "VIOLATED",
            Verdict::Inconclusive => "n/a",
        };
        eprintln!(
            "[{tag}] {}: estimate {:.6e} (stderr {:.2e}, trials {}){}",
            r.name,
            r.estimate,
            r.stderr,
            r.trials,
            r.bound.map(|b| format!(", bound {b:.6e}")).unwrap_or_default()
        );
    }
    if let Err(e) = write_reports(&cfg, &reports) {
        eprintln!("error writing output: {e}");
        return ExitCode::from(1);
    }
    if reports.iter().any(|r| r.verdict == Verdict::Violated) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
