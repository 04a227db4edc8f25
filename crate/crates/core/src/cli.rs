//! `noma-sim` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or property failure, 2 usage or
//! configuration error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::channel::place_user;
use crate::config::SimConfig;
use crate::error::Error;
use crate::simulation::{
    run_sweep, snr_csv, snr_distribution, snr_samples, write_atomic, CoverageReport,
    SnrDistribution,
};
use crate::validation::{default_mcs_table, run_validation, McsTableEntry};

pub const SEED_ENV: &str = "NOMA_SIM_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "noma-sim",
    version,
    about = "NOMA broadcast + multicast MIMO link simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "results")]
    pub out: PathBuf,
    /// RNG seed; overrides NOMA_SIM_SEED and the config file.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub parallelism: Option<u64>,
    /// Frames per user; overrides the config file.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub frames: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a single (MCS, alpha) point.
    Simulate {
        /// MCS index; first entry of the config list when omitted.
        #[arg(long)]
        mcs: Option<u8>,
        /// Power split; first entry of the config list when omitted.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Run the full (MCS, alpha) coverage sweep.
    Sweep,
    /// User SNR distribution over the configured drops.
    Snr,
    /// Run the invariant self-check suite.
    Validate {
        /// Replacement MCS table (JSON array of {index, constellation, code_rate}).
        #[arg(long, value_name = "PATH")]
        mcs_table: Option<PathBuf>,
        /// Random instances per filter property.
        #[arg(long, default_value_t = 100)]
        instances: usize,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<SimConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if let Some(f) = cli.frames {
        cfg.frames_per_user = f as usize;
    }
    Ok(cfg)
}

/// Flag, then environment, then config file.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, config: u64) -> Result<u64, Error> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        None => Ok(config),
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    if let Command::Validate {
        mcs_table,
        instances,
    } = &cli.command
    {
        return cmd_validate(mcs_table.as_deref(), *instances, cli.seed.unwrap_or(1));
    }
    let mut cfg = load_config(cli)?;
    let env = std::env::var(SEED_ENV).ok();
    let seed = resolve_seed(cli.seed, env.as_deref(), cfg.scenario.seed)?;
    match &cli.command {
        Command::Simulate { mcs, alpha } => {
            if let Some(m) = mcs {
                cfg.mcs = vec![*m];
            }
            if let Some(a) = alpha {
                cfg.alpha = vec![*a];
            }
            cfg.mcs.truncate(1);
            cfg.alpha.truncate(1);
            cfg.validate()?;
            let report = sweep(cli, &cfg, seed)?;
            finish_report(&report, &cli.out)
        }
        Command::Sweep => {
            let report = sweep(cli, &cfg, seed)?;
            finish_report(&report, &cli.out)
        }
        Command::Snr => cmd_snr(&cfg, seed, &cli.out),
        Command::Validate { .. } => unreachable!(),
    }
}

fn sweep(cli: &Cli, cfg: &SimConfig, seed: u64) -> Result<CoverageReport, Error> {
    let spec = cfg.sweep_spec(seed)?;
    let threads = cli
        .parallelism
        .map(|p| p as usize)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {threads} workers: {e}")))?;
    Ok(pool.install(|| run_sweep(&spec))?)
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn finish_report(report: &CoverageReport, out: &Path) -> Result<(), Error> {
    report.write(out).map_err(io_error(out))?;
    println!(
        "{:>5} {:>4} {:>6} {:>8} {:>8} {:>8} {:>6}",
        "group", "mcs", "alpha", "bc %", "mc %", "joint %", "users"
    );
    for c in &report.cells {
        println!(
            "{:>5} {:>4} {:>6.2} {:>8.1} {:>8.1} {:>8.1} {:>6}",
            c.group, c.mcs, c.alpha, c.coverage_bc, c.coverage_mc, c.joint_coverage, c.n_users
        );
    }
    println!("wrote {}", out.join("report.json").display());
    println!("wrote {}", out.join("coverage.csv").display());
    Ok(())
}

fn cmd_snr(cfg: &SimConfig, seed: u64, out: &Path) -> Result<(), Error> {
    let scenario = &cfg.scenario;
    let beams = cfg.beams()?;
    let samples: Vec<f64> = match &cfg.users {
        Some(users) => users
            .iter()
            .enumerate()
            .map(|(i, &p)| place_user(scenario, &beams, i, p).snr_db)
            .collect(),
        None => snr_samples(scenario, &beams, cfg.drops, seed),
    };
    let dist = snr_distribution(&samples).map_err(|e| Error::Simulation(e.into()))?;
    std::fs::create_dir_all(out).map_err(io_error(out))?;
    let path = out.join("snr.csv");
    write_atomic(&path, snr_csv(&dist).as_bytes()).map_err(io_error(&path))?;
    println!(
        "SNR over {} users: mean {:.2} dB, min {:.2} dB, max {:.2} dB",
        dist.samples, dist.mean_db, dist.min_db, dist.max_db
    );
    print!("{}", histogram(&dist));
    println!("wrote {}", path.display());
    Ok(())
}

/// One line per non-empty bin.
pub fn histogram(dist: &SnrDistribution) -> String {
    let peak = dist.bins.iter().map(|b| b.pdf).fold(0.0, f64::max);
    let mut s = String::new();
    for b in dist.bins.iter().filter(|b| b.pdf > 0.0) {
        let width = ((b.pdf / peak) * 50.0).round().max(1.0) as usize;
        s.push_str(&format!(
            "{:>5} dB | {:<50} {:.3}\n",
            b.bin_db,
            "#".repeat(width),
            b.pdf
        ));
    }
    s
}

fn cmd_validate(table_path: Option<&Path>, instances: usize, seed: u64) -> Result<(), Error> {
    let table: Vec<McsTableEntry> = match table_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| {
                Error::Config(crate::config::ConfigError::Read {
                    path: path.display().to_string(),
                    source,
                })
            })?;
            serde_json::from_str(&text).map_err(|source| {
                Error::Config(crate::config::ConfigError::Parse {
                    path: path.display().to_string(),
                    source,
                })
            })?
        }
        None => default_mcs_table(),
    };
    let results = run_validation(&table, instances.max(1), seed);
    for r in &results {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name.to_string())
        .collect();
    println!(
        "{}/{} properties passed",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::PropertiesFailed(failed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(5), Some("7"), 9).unwrap(), 5);
        assert_eq!(resolve_seed(None, Some("7"), 9).unwrap(), 7);
        assert_eq!(resolve_seed(None, None, 9).unwrap(), 9);
        assert_eq!(resolve_seed(None, Some("x"), 9).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["noma-sim"]), 2);
        assert_eq!(run(["noma-sim", "sweep", "--frames", "0"]), 2);
        assert_eq!(run(["noma-sim", "bogus"]), 2);
    }
}
