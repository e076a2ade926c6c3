//! rothlab: batch front end for generation, analysis, certification,
//! increments, iteration, exact extremal search, and benchmarks.
//!
//! Exit codes:
//!   0  success (for `check`: the set is 3AP-free)
//!   1  `check` found a progression
//!   2  invalid arguments or malformed input
//!   3  `verify` found a violated certificate
//!   4  capacity/overflow guard tripped
//!   5  resource budget exceeded
//!
//! All randomness is seeded via --seed (default 0); rerunning a command
//! reproduces its output byte for byte. ROTHLAB_THREADS (or --threads) caps
//! the parallel scans without changing any result.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rothlab::certify::{verify_all, Analysis, VerifyConfig};
use rothlab::correlation::{autocorrelation, balanced_profile, v_profile};
use rothlab::increment::{density_increment, IncrementConfig, Mode};
use rothlab::iterate::{bound_report, run as run_iteration};
use rothlab::modring::choose_modulus;
use rothlab::sets::{behrend, greedy_free, is_3ap_free, r3_exact, random_subset, DenseSet};
use rothlab::{parse_ratio, ratio_string, Error};

#[derive(Parser)]
#[command(name = "rothlab", version, about = "Exact-arithmetic toolkit for 3AP-free set experiments")]
struct Cli {
    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    /// Cap the worker threads used by parallel scans (default: the
    /// ROTHLAB_THREADS environment variable, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a set file.
    Gen {
        /// greedy | behrend | random
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: u64,
        /// Target density for --kind random.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination path; without it the set JSON goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive 3AP-freeness check. Exit 0 if free, 1 with a witness.
    Check { file: PathBuf },
    /// Run the full certificate suite. Exit 0 iff every check holds.
    Verify {
        file: PathBuf,
        /// Window lengths, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 8])]
        ell: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print density, modulus, energy, and the measured energy ratio.
    Analyze {
        file: PathBuf,
        /// Window length for the V-profile dump.
        #[arg(long, default_value_t = 8)]
        ell: u64,
        /// Write the autocorrelation profile as CSV (t,R_scaled).
        #[arg(long)]
        dump_r: Option<PathBuf>,
        /// Write the window second moments as CSV (d,V_scaled).
        #[arg(long)]
        dump_v: Option<PathBuf>,
    },
    /// Run one density-increment step.
    Increment {
        file: PathBuf,
        /// greedy | certified
        #[arg(long, default_value = "greedy")]
        mode: String,
        /// Window-length constant, e.g. 1/64.
        #[arg(long)]
        c_ell: Option<String>,
        /// Block-length constant, e.g. 1/20.
        #[arg(long)]
        c_block: Option<String>,
        /// Fixed window length override.
        #[arg(long)]
        ell: Option<u64>,
        #[arg(long, default_value_t = 8)]
        min_len: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the result JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full increment iteration.
    Iterate {
        file: PathBuf,
        #[arg(long, default_value_t = 32)]
        max_steps: usize,
        #[arg(long, default_value_t = 8)]
        min_n: u64,
        /// greedy | certified
        #[arg(long, default_value = "greedy")]
        mode: String,
        #[arg(long, default_value_t = 8)]
        min_len: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the trajectory JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the CSV summary here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exact maximum 3AP-free subset size by branch and bound.
    R3 {
        #[arg(long)]
        n: u64,
    },
    /// Wall-clock timings CSV for the correlation kernels.
    Bench {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 8)]
        ell: u64,
    },
    /// Evaluate the double-log density bound and the length recursion.
    Bound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_) => 2,
        Error::Capacity(_) => 4,
        Error::Budget(_) => 5,
        Error::Internal(_) => 3,
        _ => 2,
    }
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code_for(err))
}

fn load_set(path: &Path) -> Result<DenseSet, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    DenseSet::from_json(&text)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn configure_threads(cli_threads: Option<usize>) {
    let from_env = std::env::var("ROTHLAB_THREADS").ok().and_then(|v| v.parse().ok());
    if let Some(threads) = cli_threads.or(from_env) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let json = cli.json;
    let result = match cli.command {
        Command::Gen { kind, n, alpha, seed, out } => cmd_gen(&kind, n, alpha, seed, out, json),
        Command::Check { file } => cmd_check(&file, json),
        Command::Verify { file, ell, seed } => cmd_verify(&file, ell, seed, json),
        Command::Analyze { file, ell, dump_r, dump_v } => {
            cmd_analyze(&file, ell, dump_r, dump_v, json)
        }
        Command::Increment { file, mode, c_ell, c_block, ell, min_len, seed, out } => {
            cmd_increment(&file, &mode, c_ell, c_block, ell, min_len, seed, out, json)
        }
        Command::Iterate { file, max_steps, min_n, mode, min_len, seed, out, csv } => {
            cmd_iterate(&file, max_steps, min_n, &mode, min_len, seed, out, csv, json)
        }
        Command::R3 { n } => cmd_r3(n, json),
        Command::Bench { n, reps, ell } => cmd_bench(n, reps, ell),
        Command::Bound { n, alpha, c, c0 } => cmd_bound(n, alpha, c, c0, json),
    };
    match result {
        Ok(code) => code,
        Err(err) => fail(&err),
    }
}

fn cmd_gen(
    kind: &str,
    n: u64,
    alpha: Option<f64>,
    seed: u64,
    out: Option<PathBuf>,
    json: bool,
) -> Result<ExitCode, Error> {
    let set = match kind {
        "greedy" => greedy_free(n)?,
        "behrend" => behrend(n)?,
        "random" => {
            let alpha = alpha
                .ok_or_else(|| Error::InvalidInput("--alpha is required for random".into()))?;
            random_subset(n, alpha, seed)?
        }
        other => return Err(Error::InvalidInput(format!("unknown kind {other:?}"))),
    };
    let body = serde_json::to_string(&set).expect("set serializes");
    match out {
        Some(path) => {
            write_file(&path, &body)?;
            if json {
                println!(
                    "{{\"file\":{:?},\"n\":{},\"size\":{},\"density\":\"{}\"}}",
                    path.display().to_string(),
                    set.n(),
                    set.size(),
                    ratio_string(&set.density())
                );
            } else {
                println!(
                    "wrote {} ({} of {} elements, density {})",
                    path.display(),
                    set.size(),
                    set.n(),
                    ratio_string(&set.density())
                );
            }
        }
        None => println!("{body}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(file: &Path, json: bool) -> Result<ExitCode, Error> {
    let set = load_set(file)?;
    let report = is_3ap_free(&set);
    if json {
        println!("{}", serde_json::to_string(&report).expect("report serializes"));
    } else if let Some((a, b, c)) = report.witness {
        println!("3AP found: ({a}, {b}, {c})");
    } else {
        println!("3AP-free ({} of {} elements)", set.size(), set.n());
    }
    Ok(if report.free { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_verify(file: &Path, ell: Vec<u64>, seed: u64, json: bool) -> Result<ExitCode, Error> {
    let set = load_set(file)?;
    let config = VerifyConfig { ells: ell, seed, ..VerifyConfig::default() };
    let report = verify_all(&set, &config)?;
    if json {
        println!("{}", serde_json::to_string(&report).expect("report serializes"));
    } else {
        println!(
            "set: n={} |A|={} density={} m={} free={}",
            report.n,
            report.set_size,
            ratio_string(&report.density),
            report.m,
            report.free
        );
        if let Some((a, b, c)) = report.witness {
            println!("witness: ({a}, {b}, {c})");
        }
        for r in &report.reports {
            println!("  {r}");
        }
        println!("beta_hat = {}", ratio_string(&report.beta_hat));
        println!("{}", if report.all_hold { "ALL CHECKS HOLD" } else { "VIOLATIONS FOUND" });
    }
    Ok(if report.all_hold { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn cmd_analyze(
    file: &Path,
    ell: u64,
    dump_r: Option<PathBuf>,
    dump_v: Option<PathBuf>,
    json: bool,
) -> Result<ExitCode, Error> {
    let set = load_set(file)?;
    let analysis = Analysis::new(set)?;
    let ctx = analysis.ctx();
    if let Some(path) = dump_r {
        let mut csv = String::from("t,R_scaled\n");
        for (t, r) in analysis.corr().rvals().iter().enumerate() {
            csv.push_str(&format!("{t},{r}\n"));
        }
        write_file(&path, &csv)?;
    }
    if let Some(path) = dump_v {
        let values = v_profile(analysis.corr(), ell)?;
        let mut csv = String::from("d,V_scaled\n");
        for (d, v) in values.iter().enumerate() {
            csv.push_str(&format!("{d},{v}\n"));
        }
        write_file(&path, &csv)?;
    }
    if json {
        println!(
            "{{\"n\":{},\"size\":{},\"density\":\"{}\",\"m\":{},\"energy_scaled\":\"{}\",\"beta_hat\":\"{}\"}}",
            ctx.n(),
            analysis.set().size(),
            ratio_string(&analysis.set().density()),
            ctx.m(),
            analysis.energy().value(),
            ratio_string(&analysis.beta_hat())
        );
    } else {
        println!("n        = {}", ctx.n());
        println!("|A|      = {}", analysis.set().size());
        println!("density  = {}", ratio_string(&analysis.set().density()));
        println!("m        = {}", ctx.m());
        println!("E_scaled = {}", analysis.energy().value());
        println!("beta_hat = {}", ratio_string(&analysis.beta_hat()));
    }
    Ok(ExitCode::SUCCESS)
}

fn build_increment_config(
    mode: &str,
    c_ell: Option<String>,
    c_block: Option<String>,
    ell: Option<u64>,
    min_len: u64,
    seed: u64,
) -> Result<IncrementConfig, Error> {
    let mode: Mode = mode.parse()?;
    let mut cfg = IncrementConfig { mode, ell_override: ell, min_len, seed, ..Default::default() };
    if let Some(text) = c_ell {
        cfg.c_ell = parse_ratio(&text)?;
    }
    if let Some(text) = c_block {
        cfg.c_block = parse_ratio(&text)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[allow(clippy::too_many_arguments)]
fn cmd_increment(
    file: &Path,
    mode: &str,
    c_ell: Option<String>,
    c_block: Option<String>,
    ell: Option<u64>,
    min_len: u64,
    seed: u64,
    out: Option<PathBuf>,
    json: bool,
) -> Result<ExitCode, Error> {
    let set = load_set(file)?;
    let cfg = build_increment_config(mode, c_ell, c_block, ell, min_len, seed)?;
    let ctx = choose_modulus(set.n())?;
    match density_increment(&set, ctx, &cfg) {
        Ok(result) => {
            let body = serde_json::to_string(&result).expect("result serializes");
            if let Some(path) = out {
                write_file(&path, &body)?;
            }
            if json {
                println!("{body}");
            } else {
                println!(
                    "increment: d={} x={} ell={} q={} s={} |P|={} start={}",
                    result.d,
                    result.x,
                    result.ell,
                    result.q,
                    result.s,
                    result.progression.len,
                    result.progression.a
                );
                println!(
                    "eta = {}  new_density = {} (was {})",
                    ratio_string(&result.eta),
                    ratio_string(&result.new_density),
                    ratio_string(&set.density())
                );
                for cert in &result.certificates {
                    println!("  {cert}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(err @ (Error::ZeroEnergy | Error::NoIncrement | Error::TooShort { .. })) => {
            let status = match err {
                Error::ZeroEnergy => "zero_energy",
                Error::NoIncrement => "no_increment",
                Error::TooShort { .. } => "too_short",
                _ => unreachable!(),
            };
            if json {
                println!("{{\"status\":\"{status}\"}}");
            } else {
                println!("no increment: {err}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(err) => Err(err),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_iterate(
    file: &Path,
    max_steps: usize,
    min_n: u64,
    mode: &str,
    min_len: u64,
    seed: u64,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    json: bool,
) -> Result<ExitCode, Error> {
    let set = load_set(file)?;
    let cfg = build_increment_config(mode, None, None, None, min_len, seed)?;
    let trajectory = run_iteration(&set, &cfg, max_steps, min_n);
    let body = serde_json::to_string(&trajectory).expect("trajectory serializes");
    if let Some(path) = out {
        write_file(&path, &body)?;
    }
    if let Some(path) = csv {
        write_file(&path, &trajectory.to_csv())?;
    }
    if json {
        println!("{body}");
    } else {
        for stage in &trajectory.stages {
            let step = match &stage.increment {
                Some(inc) => format!(
                    "-> |P|={} eta={} new_density={}",
                    inc.progression.len,
                    ratio_string(&inc.eta),
                    ratio_string(&inc.new_density)
                ),
                None => String::new(),
            };
            println!(
                "stage {}: N={} |A|={} alpha={} {}",
                stage.j,
                stage.n,
                stage.size,
                ratio_string(&stage.alpha),
                step
            );
        }
        println!("stop: {:?}", trajectory.stop_reason);
        if let Some((a, b, c)) = trajectory.witness {
            println!("witness: ({a}, {b}, {c})");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_r3(n: u64, json: bool) -> Result<ExitCode, Error> {
    let (size, witness) = r3_exact(n)?;
    if json {
        println!(
            "{{\"n\":{n},\"r3\":{size},\"witness\":{}}}",
            serde_json::to_string(witness.elements()).expect("elements serialize")
        );
    } else {
        println!("r3({n}) = {size}");
        println!("witness: {:?}", witness.elements());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(n: u64, reps: usize, ell: u64) -> Result<ExitCode, Error> {
    let set = greedy_free(n)?;
    let ctx = choose_modulus(n)?;
    let profile = balanced_profile(&set, ctx)?;
    let mut rows = String::from("kernel,n,m,ell,rep,millis\n");
    let mut corr = None;
    for rep in 0..reps {
        let start = Instant::now();
        let c = autocorrelation(&profile)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        rows.push_str(&format!("autocorrelation,{n},{},0,{rep},{elapsed:.3}\n", ctx.m()));
        corr = Some(c);
    }
    let corr = corr.expect("at least one rep");
    for rep in 0..reps {
        let start = Instant::now();
        let v = v_profile(&corr, ell)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(&v);
        rows.push_str(&format!("v_profile,{n},{},{ell},{rep},{elapsed:.3}\n", ctx.m()));
    }
    print!("{rows}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_bound(n: u64, alpha: f64, c: f64, c0: f64, json: bool) -> Result<ExitCode, Error> {
    let report = bound_report(n, alpha, c, c0)?;
    if json {
        println!("{}", serde_json::to_string(&report).expect("report serializes"));
    } else {
        println!(
            "alpha = {} vs C·(log log N)^(-1/11) = {:.9} -> {}",
            report.alpha,
            report.bound_value,
            if report.within_bound { "within bound" } else { "exceeds bound" }
        );
        println!("recursion table (j, lower bound on log N_j):");
        for row in &report.recursion {
            println!("  {:>3}  {:.6}", row.j, row.log_n_lower_bound);
        }
    }
    Ok(ExitCode::SUCCESS)
}
