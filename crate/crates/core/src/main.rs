use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use qtomo::experiments::{
    emit_results, fit_loglog, read_csv, run_scaling, write_csv, write_json, ExperimentConfig,
    OutputFormat, TARGET_NAMES,
};
use qtomo::selftest::run_selftest;

#[derive(Parser)]
#[command(
    name = "qtomo",
    version,
    about = "Adaptive quantum tomography scaling experiments"
)]
struct Cli {
    /// Overrides the seed in the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent trials (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output file; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::Both => OutputFormat::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scaling experiment described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// List builtin targets.
    Targets,
    /// Fit log-log slopes to the rows of a results CSV.
    Fit { csv: PathBuf },
    /// Run the built-in invariant checks.
    Selftest,
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::from_path(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let result = run_scaling(&cfg, cli.workers)?;
            match cli.out {
                Some(path) => {
                    for p in emit_results(&result, &path, cli.format.into())? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => {
                    let stdout = std::io::stdout().lock();
                    match cli.format {
                        Format::Csv => write_csv(&result, stdout)?,
                        Format::Json => write_json(&result, stdout)?,
                        Format::Both => bail!("--format both needs --out"),
                    }
                }
            }
            if let Some(fit) = result.fit {
                eprintln!(
                    "slope {:.4}  intercept {:.4}  r2 {:.4}",
                    fit.slope, fit.intercept, fit.r2
                );
            }
        }
        Command::Targets => {
            for name in TARGET_NAMES {
                println!("{name}");
            }
        }
        Command::Fit { csv } => {
            let file =
                std::fs::File::open(&csv).with_context(|| format!("opening {}", csv.display()))?;
            let rows = read_csv(file)?;
            let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
            for r in &rows {
                let key = format!("{},{},{},{}", r.task, r.method, r.target, r.alpha);
                groups
                    .entry(key)
                    .or_default()
                    .push((r.n as f64, r.mean_infidelity));
            }
            println!("task,method,target,alpha,slope,intercept,r2");
            for (key, points) in groups {
                let fit = fit_loglog(&points)?;
                println!("{key},{:.6},{:.6},{:.6}", fit.slope, fit.intercept, fit.r2);
            }
        }
        Command::Selftest => {
            let mut failed = 0;
            for c in run_selftest() {
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("{status}  {}  {}", c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                eprintln!("{failed} check(s) failed");
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
