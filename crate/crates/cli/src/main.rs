mod config;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use amorph_core::bench::{self, run_episode, SimConfig};
use amorph_core::imgproc::{read_pgm_binary, write_pgm_binary};
use amorph_core::simenv::TraceRecord;
use amorph_core::worldgen::{generate, TerrainMap};
use amorph_core::{seeds, Error, Method, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{Layers, RunConfig};

const SEED_ENV: &str = "AMORPH_SEED";
const EXIT_USAGE: u8 = 64;

/// Simulated UAV search for soil patches on procedurally generated terrain.
///
/// Exit codes: 0 success, 1 internal error, 2 terrain generation exhausted,
/// 3 I/O or file format error, 4 unknown method, 5 invalid configuration,
/// 64 bad command line.
#[derive(Debug, Parser)]
#[command(name = "amorph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one terrain map as a PGM plus a JSON sidecar.
    Gen {
        #[command(flatten)]
        config: ConfigArgs,
        /// Terrain seed.
        #[arg(long)]
        seed: u64,
        /// Output PGM path; the sidecar is written next to it with a .json extension.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run a single episode and print a JSON report.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Terrain PGM to search (soil is white).
        #[arg(long, required_unless_present = "seed")]
        map: Option<PathBuf>,
        /// Terrain seed, or with --map only the episode seed.
        #[arg(long)]
        seed: Option<u64>,
        /// square, lissajous, heuristic-square or heuristic-lissajous.
        #[arg(long)]
        method: String,
        /// Visibility parameter θ.
        #[arg(long, default_value_t = 0.7)]
        theta: f64,
        /// Write one JSON line per step (plus the reset) here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the Monte-Carlo benchmark and write results.csv, summary.csv and probe.csv.
    Bench {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Recompute a summary table from an existing results CSV.
    Summarize {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        results: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Measure observation-model misclassification rates against height.
    Probe {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        probe: ProbeArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON config file with flat dotted keys, e.g. {"bench.trials": 100}.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set worldgen.blur_sigma=20 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut layers = Layers::default();
        if let Some(path) = &self.config {
            layers.push_file(path)?;
        }
        if let Ok(raw) = std::env::var(SEED_ENV) {
            let seed: u64 = raw
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{SEED_ENV}=`{raw}` is not a u64")))?;
            layers.push("bench.master_seed".into(), seed.into())?;
        }
        for assignment in &self.set {
            layers.push_assignment(assignment)?;
        }
        let config = layers.resolve()?;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct ProbeArgs {
    /// Number of height intervals between ẑ = 0 and 1.
    #[arg(long, default_value_t = 20)]
    z_steps: usize,
    /// Rendered views per height and ground type.
    #[arg(long, default_value_t = 200)]
    views: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::GenerationExhausted { .. } => 2,
        Error::Io(_) | Error::Csv(_) | Error::Pgm(_) | Error::InvalidImage(_) => 3,
        Error::UnknownMethod(_) => 4,
        Error::InvalidConfig(_) | Error::InvalidParameter(_) => 5,
        Error::EpisodeTerminated(_) => 1,
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Gen { config, seed, out } => cmd_gen(&config.load()?, seed, &out),
        Command::Run {
            config,
            map,
            seed,
            method,
            theta,
            trace,
        } => {
            let method: Method = method.parse()?;
            cmd_run(
                &config.load()?,
                map.as_deref(),
                seed,
                method,
                theta,
                trace.as_deref(),
            )
        }
        Command::Bench { config, out_dir } => cmd_bench(&config.load()?, &out_dir),
        Command::Summarize {
            config,
            results,
            out,
        } => cmd_summarize(&config.load()?, &results, &out),
        Command::Probe { config, probe, out } => cmd_probe(&config.load()?, &probe, &out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_gen(config: &RunConfig, seed: u64, out: &Path) -> Result<()> {
    let map = generate(&config.worldgen, seed)?;
    let mut pgm = create(out)?;
    write_pgm_binary(map.grid(), &mut pgm)?;
    pgm.flush()?;
    let sidecar = json!({
        "seed": seed,
        "params": map.params(),
        "soil_fraction": map.soil_fraction(),
    });
    let mut meta = create(&out.with_extension("json"))?;
    serde_json::to_writer_pretty(&mut meta, &sidecar).map_err(io::Error::from)?;
    writeln!(meta)?;
    meta.flush()?;
    println!("{}", map.soil_fraction());
    Ok(())
}

fn cmd_run(
    config: &RunConfig,
    map_path: Option<&Path>,
    seed: Option<u64>,
    method: Method,
    theta: f64,
    trace: Option<&Path>,
) -> Result<()> {
    let sim = config.sim();
    sim.simenv.with_theta(theta).validate()?;
    let seed = seed.unwrap_or(0);
    let map = match map_path {
        Some(path) => {
            let grid = read_pgm_binary(BufReader::new(File::open(path)?))?;
            TerrainMap::from_grid(grid, seed, config.worldgen.clone())?
        }
        None => generate(&config.worldgen, seed)?,
    };
    let map = Arc::new(map);
    let episode = seeds::episode_seed(seed, method.as_str(), theta);
    let outcome = match trace {
        Some(path) => {
            let mut out = create(path)?;
            let mut failed: Option<io::Error> = None;
            let outcome = run_episode(map, method, theta, episode, &sim, |rec| {
                if failed.is_none() {
                    if let Err(e) = write_trace_line(&mut out, rec) {
                        failed = Some(e);
                    }
                }
            })?;
            if let Some(e) = failed {
                return Err(e.into());
            }
            out.flush()?;
            outcome
        }
        None => run_episode(map, method, theta, episode, &sim, |_| {})?,
    };
    let report = json!({
        "status": outcome.status,
        "steps": outcome.state.step_count,
        "distance": outcome.state.distance,
        "truth_soil_fraction": outcome.truth_soil_fraction,
    });
    println!("{report}");
    Ok(())
}

fn write_trace_line(out: &mut impl Write, rec: &TraceRecord) -> io::Result<()> {
    serde_json::to_writer(&mut *out, rec)?;
    writeln!(out)
}

fn probe_rows(config: &RunConfig, args: &ProbeArgs) -> Result<Vec<bench::ProbeRow>> {
    bench::visibility_probe(
        &config.simenv,
        &config.bench.thetas,
        args.z_steps,
        args.views,
        config.bench.master_seed,
    )
}

fn cmd_bench(config: &RunConfig, out_dir: &Path) -> Result<()> {
    let sim: SimConfig = config.sim();
    let records = bench::run_trials(&config.bench, &sim)?;
    let summary = bench::summarize(&records, &config.bench.bins)?;
    let probe = probe_rows(
        config,
        &ProbeArgs {
            z_steps: 20,
            views: 200,
        },
    )?;

    fs::create_dir_all(out_dir)?;
    let mut w = create(&out_dir.join("results.csv"))?;
    bench::write_results_csv(&records, &mut w)?;
    w.flush()?;
    let mut w = create(&out_dir.join("summary.csv"))?;
    bench::write_summary_csv(&summary, &mut w)?;
    w.flush()?;
    let mut w = create(&out_dir.join("probe.csv"))?;
    bench::write_probe_csv(&probe, &mut w)?;
    w.flush()?;

    print!("{}", bench::format_condition_table(&records));
    Ok(())
}

fn cmd_summarize(config: &RunConfig, results: &Path, out: &Path) -> Result<()> {
    let records = bench::read_results_csv(BufReader::new(File::open(results)?))?;
    let summary = bench::summarize(&records, &config.bench.bins)?;
    let mut w = create(out)?;
    bench::write_summary_csv(&summary, &mut w)?;
    w.flush()?;
    print!("{}", bench::format_condition_table(&records));
    Ok(())
}

fn cmd_probe(config: &RunConfig, args: &ProbeArgs, out: &Path) -> Result<()> {
    let rows = probe_rows(config, args)?;
    let mut w = create(out)?;
    bench::write_probe_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}
