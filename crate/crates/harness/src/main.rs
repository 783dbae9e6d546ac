use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbs_harness::experiments::{
    cdf_table, counts_table, run_converge, run_oracle, run_order_stats, run_small_canonical, sample_table,
    ConvergeConfig, OracleConfig, OrderConfig, SampleConfig, SmallConfig,
};
use gibbs_harness::report::ExperimentReport;
use gibbs_harness::{default_t_grid, parse_list, parse_t_grid, parse_x_grid, HarnessError, RescalingChoice, Result};
use gibbs_partitions::sampler::SamplerConfig;
use gibbs_partitions::{Statistics, Weights};

/// Largest-part statistics of random partitions under multiplicative measures.
///
/// CSV output: one table per metric with a header row; floats carry 17
/// significant digits. With --out, the first table goes to the given path,
/// further tables to <stem>_<table>.csv, and the JSON envelope to <stem>.json.
///
/// JSON envelope keys: experiment, measure, seed, tool_version, status
/// ("theorem" or "CONJECTURAL"), config, notes, tables (name, columns, rows),
/// timings_seconds.
///
/// Exit codes: 0 success, 2 invalid input, 3 resource or budget exhausted.
#[derive(Parser)]
#[command(name = "gibbs-part", version, verbatim_doc_comment)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Weight sequence: power:c=1,beta=0 | lattice:d=3 | plane | table:@file.csv
    #[arg(long, default_value = "power:c=1,beta=0")]
    measure: String,
    /// bose or fermi
    #[arg(long, default_value = "bose")]
    kind: String,
    /// Certified truncation error of exact tail sums
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Common {
    fn weights(&self) -> Result<Weights> {
        Ok(Weights::parse(&self.measure)?)
    }

    fn kind(&self) -> Result<Statistics> {
        Ok(self.kind.parse::<Statistics>()?)
    }
}

#[derive(Args)]
struct Activities {
    /// Single activity (comma-separated list allowed)
    #[arg(long)]
    x: Option<String>,
    /// Grid x_j = 1 - 10^-j for j in j1..j2
    #[arg(long = "x-grid", default_value = "1..5")]
    x_grid: String,
}

impl Activities {
    fn values(&self) -> Result<Vec<f64>> {
        match &self.x {
            Some(list) => parse_list(list),
            None => parse_x_grid(&self.x_grid),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact sup-distance between the rescaled max law and Gumbel over an activity grid
    Converge {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        activities: Activities,
        /// Thresholds as lo:hi:n (default -4:8:241)
        #[arg(long = "t-grid")]
        t_grid: Option<String>,
        /// auto | power:c=..,beta=.. | gas:d=.. | plane
        #[arg(long, default_value = "auto")]
        rescaling: String,
    },
    /// Sampled top-d order statistics against the limit marginals
    Order {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        activities: Activities,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value = "auto")]
        rescaling: String,
    },
    /// Fixed-weight ensembles (conjectural limit), exact for small n
    Small {
        #[command(flatten)]
        common: Common,
        /// Comma-separated weights n
        #[arg(long, default_value = "50,200,800")]
        n: String,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long = "exact-up-to", default_value_t = 25)]
        exact_up_to: u64,
    },
    /// Cross-check recurrences against brute-force enumeration
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 25)]
        n: u64,
        /// Lattice table size checked by brute force
        #[arg(long, default_value_t = 500)]
        k: u64,
    },
    /// Weighted partition counts Q(0..=n)
    Counts {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        n: u64,
    },
    /// Exact max-part CDF at one activity
    Cdf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: f64,
        /// Last level (default: truncation horizon)
        #[arg(long = "m-max")]
        m_max: Option<u64>,
    },
    /// Sampled partitions, one CSV row each
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 3)]
        d: usize,
    },
}

fn write_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn emit(report: &ExperimentReport, common: &Common) -> Result<()> {
    match (common.format, &common.out) {
        (Format::Csv, None) => write_stdout(&report.to_csv()?)?,
        (Format::Csv, Some(path)) => {
            report.write_csv_files(path)?;
        }
        (Format::Json, None) => write_stdout(&(serde_json::to_string_pretty(&report.to_json())? + "\n"))?,
        (Format::Json, Some(path)) => std::fs::write(path, serde_json::to_string_pretty(&report.to_json())?)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Converge { common, activities, t_grid, rescaling } => {
            let cfg = ConvergeConfig {
                weights: common.weights()?,
                kind: common.kind()?,
                rescaling: rescaling.parse::<RescalingChoice>()?,
                x_grid: activities.values()?,
                t_grid: match t_grid {
                    Some(s) => parse_t_grid(&s)?,
                    None => default_t_grid(),
                },
                tol: common.tol,
            };
            emit(&run_converge(&cfg)?, &common)
        }
        Command::Order { common, activities, d, samples, rescaling } => {
            let cfg = OrderConfig {
                weights: common.weights()?,
                kind: common.kind()?,
                rescaling: rescaling.parse::<RescalingChoice>()?,
                d,
                x_grid: activities.values()?,
                samples,
                seed: common.seed,
                sampler: SamplerConfig::default(),
                tol: common.tol,
            };
            emit(&run_order_stats(&cfg)?, &common)
        }
        Command::Small { common, n, samples, exact_up_to } => {
            if common.kind()? != Statistics::Bose {
                return Err(HarnessError::Invalid("fixed-weight sampling needs Bose statistics".into()));
            }
            let cfg = SmallConfig {
                weights: common.weights()?,
                n_list: parse_list(&n)?,
                samples,
                seed: common.seed,
                sampler: SamplerConfig::default(),
                exact_up_to,
            };
            emit(&run_small_canonical(&cfg)?, &common)
        }
        Command::Oracle { common, n, k } => {
            emit(&run_oracle(&OracleConfig { weights: common.weights()?, n_max: n, lattice_k: k })?, &common)
        }
        Command::Counts { common, n } => emit(&counts_table(&common.weights()?, common.kind()?, n)?, &common),
        Command::Cdf { common, x, m_max } => {
            emit(&cdf_table(&common.weights()?, common.kind()?, x, common.tol, m_max)?, &common)
        }
        Command::Sample { common, x, samples, d } => {
            let cfg = SampleConfig {
                weights: common.weights()?,
                kind: common.kind()?,
                x,
                samples,
                d,
                seed: common.seed,
                sampler: SamplerConfig::default(),
            };
            emit(&sample_table(&cfg)?, &common)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
