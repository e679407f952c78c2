use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use sampdec_core::complex::complex_to_real;
use sampdec_core::tuning::{
    decoding_radius, low_rho_warning, lsd_radius, min_k_for_eta, near_map_sample_size,
    randomized_rho, solve_rho_opt,
};

use sampdec_sim::config::{
    parse_k_sweep, parse_snr_grid, BudgetMode, DecoderKind, DecoderSpec, ExperimentConfig,
    Preprocessing, RhoChoice,
};
use sampdec_sim::error::{CliError, Result};
use sampdec_sim::experiment::{run_llr_sweep, run_ser_experiment};
use sampdec_sim::persist;
use sampdec_sim::pipeline::decode_raw;

#[derive(Parser)]
#[command(
    name = "sampdec",
    about = "Lattice decoding by sampling: one-shot decodes, error-rate sweeps, \
soft-output fidelity and parameter tuning",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decode one system read from matrix/vector files.
    Decode(DecodeArgs),
    /// Monte-Carlo bit/symbol/frame error rates over an SNR grid.
    Ber(BerArgs),
    /// Soft-output fidelity against the exact posterior over a K sweep.
    Llr(LlrArgs),
    /// Closed-form parameter calculations.
    #[command(subcommand)]
    Tune(TuneCmd),
}

/// Decoder flags shared by the decoding subcommands.
#[derive(Args)]
struct DecoderArgs {
    /// Decoder: sic, rand, derand or two-stage.
    #[arg(long, value_parser = DecoderKind::parse)]
    decoder: DecoderKind,
    /// Nominal sample size.
    #[arg(long = "K", default_value_t = 15.0)]
    k: f64,
    /// Budget handling: literal or strict.
    #[arg(long, value_parser = BudgetMode::parse, default_value = "literal")]
    mode: BudgetMode,
    /// Window half-size of the per-level rounding tables.
    #[arg(long = "N", default_value_t = 2)]
    n_window: usize,
    /// Concentration: 'auto' or a number > 1.
    #[arg(long, value_parser = RhoChoice::parse, default_value = "auto")]
    rho: RhoChoice,
    /// Branching depth for two-stage; defaults to the smallest p with
    /// (p+1)^2 >= n.
    #[arg(long)]
    p: Option<usize>,
}

impl DecoderArgs {
    fn spec(&self) -> Result<DecoderSpec> {
        let spec = DecoderSpec {
            kind: self.decoder,
            k: self.k,
            mode: self.mode,
            truncation_n: self.n_window,
            rho: self.rho,
            p: self.p,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct DecodeArgs {
    /// System matrix file ("rows cols" header, row-major entries).
    #[arg(long)]
    matrix: PathBuf,
    /// Received vector file.
    #[arg(long)]
    y: PathBuf,
    /// Treat the input files as complex (re,im interleaved) and embed.
    #[arg(long, default_value_t = false)]
    complex: bool,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Seed for the randomized decoder.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BerArgs {
    /// Complex antenna count.
    #[arg(long)]
    nc: usize,
    /// Modulation: 4qam, 16qam or 64qam.
    #[arg(long = "mod", value_parser = parse_modulation, default_value = "16qam")]
    modulation: u32,
    /// E_b/N_0 grid in dB: start:step:stop or a single value.
    #[arg(long)]
    snr: String,
    #[command(flatten)]
    decoder: DecoderArgs,
    /// Preprocessing: none, lll, mmse or lll+mmse.
    #[arg(long, value_parser = Preprocessing::parse, default_value = "none")]
    preproc: Preprocessing,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Compare decisions against the exact ML point: on or off.
    #[arg(long = "oracle-ml", value_parser = parse_on_off, default_value = "off",
          action = clap::ArgAction::Set)]
    oracle_ml: bool,
    /// Cap the worker threads (defaults to all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV; a JSON sidecar lands next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LlrArgs {
    #[arg(long)]
    nc: usize,
    #[arg(long = "mod", value_parser = parse_modulation, default_value = "4qam")]
    modulation: u32,
    /// E_b/N_0 in dB (grid allowed).
    #[arg(long, default_value = "6")]
    snr: String,
    /// Comma-separated sample sizes, e.g. 1,5,25,100.
    #[arg(long = "K-sweep")]
    k_sweep: String,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[arg(long, value_parser = Preprocessing::parse, default_value = "none")]
    preproc: Preprocessing,
    #[arg(long, default_value_t = 500)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum TuneCmd {
    /// Concentration from a sample size: rho <K> <n> [--randomized].
    Rho {
        k: f64,
        n: usize,
        /// Solve the draw-count relation instead of the budget one.
        #[arg(long, default_value_t = false)]
        randomized: bool,
    },
    /// Guaranteed decoding radius: radius <K> <n> <min_rii>.
    Radius { k: f64, n: usize, min_rii: f64 },
    /// Smallest integer K reaching mass eta at depth p: eta-k <eta> <p>.
    EtaK { eta: f64, p: usize },
    /// List-sphere radius: lsd-radius <n> <sigma>.
    LsdRadius { n: usize, sigma: f64 },
    /// Sample size for near-exact soft output: map-k <n> <sigma> <min_rii>.
    MapK {
        n: usize,
        sigma: f64,
        min_rii: f64,
    },
}

fn parse_modulation(s: &str) -> Result<u32> {
    let digits = s.strip_suffix("qam").unwrap_or(s);
    let m: u32 = digits
        .parse()
        .map_err(|_| CliError::config(format!("bad modulation '{}'", s)))?;
    if ![4, 16, 64].contains(&m) {
        return Err(CliError::config(format!(
            "modulation must be 4qam, 16qam or 64qam, got '{}'",
            s
        )));
    }
    Ok(m)
}

fn parse_on_off(s: &str) -> Result<bool> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(CliError::config(format!(
            "expected on or off, got '{}'",
            other
        ))),
    }
}

fn limit_workers(workers: Option<usize>) -> Result<()> {
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::config("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::config(format!("worker pool: {}", e)))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DecodeReport {
    rows: usize,
    cols: usize,
    decoder: DecoderSpec,
    total_prob: f64,
    tables_evaluated: u64,
    nodes_visited: u64,
    pruned_mass: f64,
    candidates: Vec<CandidateOut>,
}

#[derive(Serialize)]
struct CandidateOut {
    z: Vec<i64>,
    dist: f64,
    log_prob: f64,
}

fn cmd_decode(args: DecodeArgs) -> Result<()> {
    let spec = args.decoder.spec()?;
    let (h, y) = if args.complex {
        let hc = persist::read_cmatrix(&args.matrix)?;
        let yc = persist::read_cvector(&args.y)?;
        complex_to_real(&hc, &yc).map_err(CliError::from)?
    } else {
        (persist::read_matrix(&args.matrix)?, persist::read_vector(&args.y)?)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (list, stats) = decode_raw(&h, &y, &spec, &mut rng)?;
    let report = DecodeReport {
        rows: h.rows(),
        cols: h.cols(),
        decoder: spec,
        total_prob: list.total_prob,
        tables_evaluated: stats.tables_evaluated,
        nodes_visited: stats.nodes_visited,
        pruned_mass: stats.pruned_mass,
        candidates: list
            .items
            .iter()
            .map(|c| CandidateOut {
                z: c.z.clone(),
                dist: c.dist,
                log_prob: c.log_prob,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::runtime(e.to_string()))?;
    text.push('\n');
    std::fs::write(&args.out, text)
        .map_err(|e| CliError::runtime(format!("{}: {}", args.out.display(), e)))?;
    match list.best() {
        Some(best) => println!(
            "{} candidates; best z = {:?}, distance {:.6}",
            list.len(),
            best.z,
            best.dist
        ),
        None => println!("empty candidate list (strict budget exhausted)"),
    }
    Ok(())
}

fn cmd_ber(args: BerArgs) -> Result<()> {
    limit_workers(args.workers)?;
    let cfg = ExperimentConfig {
        n_c: args.nc,
        modulation: args.modulation,
        snr_db: parse_snr_grid(&args.snr)?,
        decoder: args.decoder.spec()?,
        preproc: args.preproc,
        trials: args.trials,
        seed: args.seed,
        oracle_ml: args.oracle_ml,
    };
    let result = run_ser_experiment(&cfg)?;
    persist::persist_results(&cfg, &result, &args.out)?;
    let bits_per_frame = (cfg.real_dim() as f64) * (cfg.modulation as f64).log2() / 2.0;
    for row in &result.rows {
        let ber = row.bit_errors as f64 / (row.trials as f64 * bits_per_frame);
        let ser = row.sym_errors as f64 / (row.trials as f64 * cfg.n_c as f64);
        let agree = row
            .ml_agree
            .map(|a| format!(", ml-agree {:.4}", a as f64 / row.trials as f64))
            .unwrap_or_default();
        println!(
            "snr {:>6.2} dB: ber {:.3e}, ser {:.3e}{}, mean list {:.2}, {} ms",
            row.snr_db, ber, ser, agree, row.mean_list_size, row.wall_ms
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_llr(args: LlrArgs) -> Result<()> {
    limit_workers(args.workers)?;
    let ks = parse_k_sweep(&args.k_sweep)?;
    let cfg = ExperimentConfig {
        n_c: args.nc,
        modulation: args.modulation,
        snr_db: parse_snr_grid(&args.snr)?,
        decoder: args.decoder.spec()?,
        preproc: args.preproc,
        trials: args.trials,
        seed: args.seed,
        oracle_ml: false,
    };
    let rows = run_llr_sweep(&cfg, &ks)?;
    persist::persist_llr(&cfg, &rows, &args.out)?;
    for row in &rows {
        let mean = row
            .mean_abs_dllr
            .map(|v| format!("{:.4}", v))
            .unwrap_or_else(|| "-".into());
        println!(
            "K {:>6}: mean |dLLR| {}, sign agreement {:.4}, clamp rate {:.4}",
            row.k, mean, row.sign_agreement, row.clamp_rate
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_tune(cmd: TuneCmd) -> Result<()> {
    let record = match cmd {
        TuneCmd::Rho { k, n, randomized } => {
            let rho = if randomized {
                randomized_rho(k, n)?
            } else {
                solve_rho_opt(k, n)?
            };
            println!("{}", rho);
            json!({
                "op": "rho", "k": k, "n": n, "randomized": randomized,
                "rho": rho, "low_rho_warning": low_rho_warning(rho),
            })
        }
        TuneCmd::Radius { k, n, min_rii } => {
            let rho = solve_rho_opt(k, n)?;
            let radius = decoding_radius(k, n, min_rii)?;
            println!("{}", radius);
            json!({
                "op": "radius", "k": k, "n": n, "min_rii": min_rii,
                "radius": radius, "rho": rho,
                "low_rho_warning": low_rho_warning(rho),
            })
        }
        TuneCmd::EtaK { eta, p } => {
            let k = min_k_for_eta(eta, p)?;
            println!("{}", k);
            json!({ "op": "eta-k", "eta": eta, "p": p, "k": k })
        }
        TuneCmd::LsdRadius { n, sigma } => {
            let radius = lsd_radius(n, sigma)?;
            println!("{}", radius);
            json!({ "op": "lsd-radius", "n": n, "sigma": sigma, "radius": radius })
        }
        TuneCmd::MapK { n, sigma, min_rii } => {
            let k = near_map_sample_size(n, sigma, min_rii)?;
            println!("{}", k);
            json!({
                "op": "map-k", "n": n, "sigma": sigma, "min_rii": min_rii,
                "k": k,
            })
        }
    };
    println!("{}", record);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Decode(args) => cmd_decode(args),
        Cmd::Ber(args) => cmd_ber(args),
        Cmd::Llr(args) => cmd_llr(args),
        Cmd::Tune(cmd) => cmd_tune(cmd),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e);
        std::process::exit(e.exit_code());
    }
}
