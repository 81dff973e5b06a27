//! `lowsnr`: degree design, efficiency sweeps, key-rate curves and a decoding
//! demo, each writing CSV/JSON artifacts stamped with the seed and a hash of
//! the resolved configuration.

mod artifact;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lowsnr_raptor::channel::db_to_linear;
use lowsnr_raptor::codec::{measure_efficiency, EfficiencyConfig, PrecodeSpec, DEFAULT_RATE};
use lowsnr_raptor::degree::{DegreeDistribution, DistributionJson};
use lowsnr_raptor::design::{optimize_general, optimize_low_snr, DesignSpecGeneral, DesignSpecLowSnr, DEFAULT_GRID_SIZE};
use lowsnr_raptor::exit::{CapacityModel, ExitMethod, MonteCarlo};
use lowsnr_raptor::qkd::{key_rate_vs_distance, CvqkdParams, EfficiencyModel, IeTable, SweepConfig};
use lowsnr_raptor::Error;
use serde::{Deserialize, Serialize};
use serde_json::json;

use artifact::{Csv, Meta};

#[derive(Parser)]
#[command(name = "lowsnr", version, about = "Raptor codes for very low SNR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize an output degree distribution.
    Design(DesignArgs),
    /// Measure rate efficiency over the BI-AWGN channel.
    Efficiency(EfficiencyArgs),
    /// Secret key rate against distance.
    Keyrate(KeyrateArgs),
    /// Run one rateless transfer and print its outcome.
    DecodeDemo(DemoArgs),
}

#[derive(Args, Serialize)]
struct DesignArgs {
    /// Low-SNR program (maximise β over the efficiency grid).
    #[arg(long, conflicts_with = "general")]
    low_snr: bool,
    /// General program at a given SNR (minimise α Σ ω_d/d).
    #[arg(long)]
    general: bool,
    /// Maximum degree.
    #[arg(long = "D", default_value_t = 100)]
    max_degree: u32,
    /// Largest mean LLR the growth constraints must cover.
    #[arg(long)]
    mu_o: f64,
    /// Low-SNR margin ε.
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    grid: usize,
    #[arg(long, default_value_t = 0.80)]
    eta_min: f64,
    #[arg(long, default_value_t = 1.00)]
    eta_max: f64,
    #[arg(long, default_value_t = 0.0005)]
    eta_step: f64,
    /// General program: operating SNR in dB.
    #[arg(long, allow_negative_numbers = true, required_if_eq("general", "true"))]
    snr_db: Option<f64>,
    /// General program: average input-node degree α.
    #[arg(long, required_if_eq("general", "true"))]
    alpha: Option<f64>,
    /// General program: Monte-Carlo samples per EXIT value.
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    /// General program: use the low-SNR EXIT approximation instead of Monte Carlo.
    #[arg(long)]
    approx_exit: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[serde(skip)]
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Serialize)]
struct DistributionArgs {
    /// Distribution file (`.json` or the `D n` text format). Without it the
    /// low-SNR design for --D/--mu-o is used.
    #[arg(long)]
    dist: Option<PathBuf>,
    #[arg(long = "D", default_value_t = 300)]
    max_degree: u32,
    #[arg(long, default_value_t = 40.0)]
    mu_o: f64,
}

#[derive(Args, Serialize)]
struct EfficiencyArgs {
    /// SNR points in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    snr_db: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Precoder rate.
    #[arg(long, default_value_t = DEFAULT_RATE)]
    rate: f64,
    #[arg(long, default_value_t = 40)]
    max_blocks: usize,
    #[command(flatten)]
    distribution: DistributionArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[serde(skip)]
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Serialize)]
struct KeyrateArgs {
    /// Sweep configuration JSON; overrides the parameter flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// I_E table: lines `distance_km,i_e`.
    #[arg(long)]
    ie_table: Option<PathBuf>,
    /// Distances in km, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60,70,80,90,100")]
    distances: Vec<f64>,
    /// Candidate modulation variances, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,8,10,15,20")]
    va_grid: Vec<f64>,
    /// Constant reconciliation efficiency.
    #[arg(long, default_value_t = 0.95)]
    eta: f64,
    #[arg(long, default_value_t = 0.01)]
    excess_noise: f64,
    #[arg(long, default_value_t = 0.6)]
    homodyne_efficiency: f64,
    #[arg(long, default_value_t = 0.01)]
    electronic_noise: f64,
    #[arg(long, default_value_t = 0.2)]
    attenuation: f64,
    /// Add a fixed-rate comparison column with this frame-error rate.
    #[arg(long)]
    p_w: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[serde(skip)]
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Serialize)]
struct DemoArgs {
    #[arg(long, default_value_t = 1000)]
    k: usize,
    #[arg(long, allow_negative_numbers = true, default_value_t = -20.0)]
    snr_db: f64,
    #[arg(long, default_value_t = DEFAULT_RATE)]
    rate: f64,
    #[command(flatten)]
    distribution: DistributionArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Keyrate configuration file: a sweep plus its I_E table.
#[derive(Serialize, Deserialize)]
struct KeyrateFile {
    #[serde(flatten)]
    sweep: SweepConfig,
    #[serde(default)]
    ie_table: Vec<(f64, f64)>,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::DegreeOutOfRange { .. }
            | Error::ProbabilitySum { .. }
            | Error::Malformed { .. }
            | Error::DimensionMismatch(_) => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(a) => design(a),
        Command::Efficiency(a) => efficiency(a),
        Command::Keyrate(a) => keyrate(a),
        Command::DecodeDemo(a) => decode_demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn design(a: &DesignArgs) -> CmdResult {
    if a.low_snr == a.general {
        return Err(Failure::Validation("choose exactly one of --low-snr and --general".into()));
    }
    let meta = Meta::new("design", a.seed, a)?;
    let result = if a.low_snr {
        let spec = DesignSpecLowSnr {
            max_degree: a.max_degree,
            mu_o: a.mu_o,
            grid_size: a.grid,
            epsilon: a.eps,
            eta_min: a.eta_min,
            eta_max: a.eta_max,
            eta_step: a.eta_step,
        };
        optimize_low_snr(&spec)?
    } else {
        let exit_method = if a.approx_exit {
            ExitMethod::LowSnr
        } else {
            ExitMethod::Exact(MonteCarlo {
                samples: a.samples,
                seed: a.seed,
            })
        };
        let spec = DesignSpecGeneral {
            alpha: a.alpha.expect("required by clap"),
            max_degree: a.max_degree,
            mu_o: a.mu_o,
            grid_size: a.grid,
            snr: db_to_linear(a.snr_db.expect("required by clap")),
            exit_method,
        };
        optimize_general(&spec)?
    };
    let mut report = result.to_json();
    report["meta"] = meta.json();
    artifact::write(&a.out_dir.join("design.json"), &pretty(&report))?;
    let mut text = meta.header();
    text.push_str(&result.distribution.to_text());
    artifact::write(&a.out_dir.join("distribution.txt"), &text)?;
    println!("eta={:.4} beta={:.4}", result.eta, result.beta);
    Ok(())
}

fn load_distribution(a: &DistributionArgs) -> Result<DegreeDistribution, Failure> {
    match &a.dist {
        Some(path) if path.extension().is_some_and(|e| e == "json") => {
            let text = read(path)?;
            let json: DistributionJson = serde_json::from_str(&text).map_err(Error::from)?;
            Ok(DegreeDistribution::from_json(&json)?)
        }
        Some(path) => Ok(DegreeDistribution::load(path)?),
        None => Ok(optimize_low_snr(&DesignSpecLowSnr::new(a.max_degree, a.mu_o))?.distribution),
    }
}

fn efficiency(a: &EfficiencyArgs) -> CmdResult {
    if a.trials == 0 {
        return Err(Failure::Validation("--trials must be at least 1".into()));
    }
    let meta = Meta::new("efficiency", a.seed, a)?;
    let dist = load_distribution(&a.distribution)?;
    let precode = PrecodeSpec::new(a.k, a.rate)?;
    let mut curve = Csv::new(&meta, &["snr_db", "k", "trials", "mean_n", "realized_rate", "efficiency", "wer"]);
    let mut trials = Csv::new(&meta, &["snr_db", "trial", "n", "blocks", "iterations", "success", "correct"]);
    for &snr_db in &a.snr_db {
        let mut cfg = EfficiencyConfig::new(precode, dist.clone(), db_to_linear(snr_db), a.trials, a.seed);
        cfg.max_blocks = a.max_blocks;
        let rep = measure_efficiency(&cfg)?;
        curve.row(&[
            snr_db.to_string(),
            a.k.to_string(),
            a.trials.to_string(),
            rep.mean_n.to_string(),
            rep.realized_rate.to_string(),
            rep.efficiency.to_string(),
            rep.wer.to_string(),
        ]);
        for r in &rep.records {
            trials.row(&[
                snr_db.to_string(),
                r.trial.to_string(),
                r.n.to_string(),
                r.blocks.to_string(),
                r.iterations.to_string(),
                r.success.to_string(),
                r.correct.to_string(),
            ]);
        }
        println!("snr_db={snr_db} efficiency={:.4} wer={}", rep.efficiency, rep.wer);
    }
    curve.save(&a.out_dir.join("efficiency.csv"))?;
    trials.save(&a.out_dir.join("trials.csv"))?;
    Ok(())
}

fn keyrate(a: &KeyrateArgs) -> CmdResult {
    let file = match &a.config {
        Some(path) => serde_json::from_str::<KeyrateFile>(&read(path)?).map_err(Error::from)?,
        None => KeyrateFile {
            sweep: SweepConfig {
                params: CvqkdParams {
                    va: a.va_grid.first().copied().unwrap_or(1.0),
                    excess_noise: a.excess_noise,
                    homodyne_efficiency: a.homodyne_efficiency,
                    electronic_noise: a.electronic_noise,
                    attenuation_db_per_km: a.attenuation,
                    distance_km: 0.0,
                },
                distances_km: a.distances.clone(),
                va_grid: a.va_grid.clone(),
                efficiency: EfficiencyModel::Constant(a.eta),
                p_w: 0.0,
                capacity_model: CapacityModel::BiAwgnExact,
            },
            ie_table: Vec::new(),
        },
    };
    let mut points = file.ie_table.clone();
    if let Some(path) = &a.ie_table {
        points = parse_ie_table(path)?;
    }
    if points.is_empty() {
        return Err(Failure::Validation(
            "I_E table is empty: pass --ie-table FILE with one `distance_km,i_e` line per distance, \
             or an \"ie_table\" array of [distance_km, i_e] pairs in --config"
                .into(),
        ));
    }
    let table = IeTable::new(points)?;
    let resolved = json!({ "sweep": &file.sweep, "ie_table": &table.points, "p_w": a.p_w });
    let meta = Meta::from_value("keyrate", a.seed, resolved)?;

    let raptor = key_rate_vs_distance(&file.sweep, &table)?;
    let fixed = match a.p_w {
        Some(p_w) => {
            let mut sweep = file.sweep.clone();
            sweep.p_w = p_w;
            Some(key_rate_vs_distance(&sweep, &table)?)
        }
        None => None,
    };
    let mut columns = vec!["distance_km", "va", "gamma", "eta", "i_ab", "i_e", "key_rate"];
    if fixed.is_some() {
        columns.extend(["va_fixed", "key_rate_fixed"]);
    }
    let mut csv = Csv::new(&meta, &columns);
    for (i, r) in raptor.iter().enumerate() {
        let mut row = vec![
            r.distance_km.to_string(),
            r.va.to_string(),
            r.gamma.to_string(),
            r.eta.to_string(),
            r.i_ab.to_string(),
            r.i_e.to_string(),
            r.key_rate.to_string(),
        ];
        if let Some(f) = &fixed {
            row.push(f[i].va.to_string());
            row.push(f[i].key_rate.to_string());
        }
        csv.row(&row);
    }
    csv.save(&a.out_dir.join("keyrate.csv"))?;
    println!("{} distances written", raptor.len());
    Ok(())
}

fn parse_ie_table(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = read(path)?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("distance") {
            continue;
        }
        let bad = || Failure::Validation(format!("{}:{}: expected `distance_km,i_e`", path.display(), i + 1));
        let (d, v) = line.split_once(',').ok_or_else(bad)?;
        let d: f64 = d.trim().parse().map_err(|_| bad())?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        points.push((d, v));
    }
    Ok(points)
}

fn decode_demo(a: &DemoArgs) -> CmdResult {
    let meta = Meta::new("decode-demo", a.seed, a)?;
    let dist = load_distribution(&a.distribution)?;
    let gamma = db_to_linear(a.snr_db);
    let cfg = EfficiencyConfig::new(PrecodeSpec::new(a.k, a.rate)?, dist, gamma, 1, a.seed);
    let rep = measure_efficiency(&cfg)?;
    let r = &rep.records[0];
    let out = json!({
        "meta": meta.json(),
        "snr_db": a.snr_db,
        "capacity": rep.capacity,
        "k": a.k,
        "n": r.n,
        "blocks": r.blocks,
        "iterations": r.iterations,
        "success": r.success,
        "correct": r.correct,
        "efficiency": rep.efficiency,
    });
    println!("{}", pretty(&out));
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialise");
    s.push('\n');
    s
}
