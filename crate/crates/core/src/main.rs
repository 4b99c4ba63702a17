use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rtwn::config::{DisturbanceSection, NetworkSection, Scenario, SimSection, TaskEntry};
use rtwn::sim::experiment::{build_trial, run_sweep, ExperimentSpec, TrialParams, SUMMARY_HEADER};
use rtwn::sim::{run, Metrics};
use rtwn::Error;

#[derive(Parser)]
#[command(name = "rtwn", version, about = "Disturbance handling for slot-scheduled wireless networks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a random disturbed scenario and write it as TOML.
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        util: f64,
        /// Grid size as WxH.
        #[arg(long, default_value = "9x9")]
        network: String,
        #[arg(long, default_value_t = 4)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one scenario file.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Run a parameter sweep described by a TOML file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, env = "RTWN_OUT_DIR")]
        out_dir: Option<PathBuf>,
        /// Worker threads; all cores when unset.
        #[arg(long)]
        parallel: Option<usize>,
    },
}

const EXIT_INPUT: u8 = 2;
const EXIT_STATIC_INFEASIBLE: u8 = 3;
const EXIT_RUNTIME: u8 = 1;

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(match e {
        Error::Config(_) | Error::Network(_) | Error::Task { .. } | Error::MissingLink { .. } => EXIT_INPUT,
        Error::StaticInfeasible { .. } => EXIT_STATIC_INFEASIBLE,
        _ => EXIT_RUNTIME,
    })
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn parse_grid(s: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::Config(format!("network size {s:?} is not WxH"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?))
}

fn generate(seed: u64, util: f64, network: &str, steps: usize) -> Result<String, Error> {
    let (grid_width, grid_height) = parse_grid(network)?;
    let params = TrialParams { util, steps, grid_width, grid_height, ..TrialParams::default() };
    let cfg = build_trial(&params, seed)?;
    let d = cfg.disturbance.as_ref().expect("trials are disturbed");
    let scenario = Scenario {
        network: NetworkSection::from_model(&cfg.network),
        tasks: cfg.tasks.iter().map(|t| TaskEntry::from_spec(t, &cfg.network)).collect(),
        disturbance: Some(DisturbanceSection {
            task: d.task,
            instance: d.instance,
            periods: Some(d.spec.periods.clone()),
            deadlines: (d.spec.deadlines != d.spec.periods).then(|| d.spec.deadlines.clone()),
            gamma: None,
            steps: None,
        }),
        mac: Default::default(),
        sim: SimSection {
            mode: cfg.mode,
            required_pdr: cfg.required,
            seed,
            alpha_periods: params.alpha_periods,
            beta: cfg.beta,
            framework: cfg.framework,
            ..SimSection::default()
        },
    };
    scenario.to_toml()
}

fn simulate(scenario: &Path, trace_out: Option<&Path>, csv_out: Option<&Path>) -> Result<(), Error> {
    let cfg = Scenario::load(scenario)?.to_sim_config()?;
    let out = run(&cfg)?;
    if let Some(e) = &out.dynamic_error {
        eprintln!("warning: {e}");
    }
    match trace_out {
        Some(p) => write(p, &out.trace.render())?,
        None => print!("{}", out.trace.render()),
    }
    let mut buf = Vec::new();
    Metrics::write_csv(std::slice::from_ref(&out.metrics), &mut buf).map_err(|e| Error::Config(e.to_string()))?;
    let csv = String::from_utf8(buf).expect("csv output is utf-8");
    match csv_out {
        Some(p) => write(p, &csv)?,
        None => eprint!("{csv}"),
    }
    Ok(())
}

fn sweep(spec_path: &Path, out_dir: Option<PathBuf>, parallel: Option<usize>) -> Result<(), Error> {
    let text = fs::read_to_string(spec_path).map_err(|e| io_err(spec_path, e))?;
    let spec: ExperimentSpec = toml::from_str(&text).map_err(|e| io_err(spec_path, e))?;
    let dir = out_dir.or_else(|| spec.out_dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    if let Some(n) = parallel {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))?;
    }
    let points = run_sweep(&spec)?;
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;

    let rows: Vec<Metrics> = points.iter().flat_map(|p| p.rows.iter().cloned()).collect();
    let metrics_path = dir.join("metrics.csv");
    let f = fs::File::create(&metrics_path).map_err(|e| io_err(&metrics_path, e))?;
    Metrics::write_csv(&rows, f).map_err(|e| io_err(&metrics_path, e))?;

    let summary_path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary_path).map_err(|e| io_err(&summary_path, e))?;
    w.write_record(SUMMARY_HEADER).map_err(|e| io_err(&summary_path, e))?;
    for p in &points {
        w.write_record(p.csv_row()).map_err(|e| io_err(&summary_path, e))?;
        println!(
            "{} U*={:.2} R={} alpha={}P0 tick={}us sr={:.3}",
            p.params.framework, p.params.util, p.params.steps, p.params.alpha_periods, p.params.priority_tick_us, p.sr
        );
    }
    w.flush().map_err(|e| io_err(&summary_path, e))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Generate { seed, util, network, steps, out } => generate(seed, util, &network, steps).and_then(|t| match out {
            Some(p) => write(&p, &t),
            None => {
                print!("{t}");
                Ok(())
            }
        }),
        Cmd::Simulate { scenario, trace_out, csv_out } => simulate(&scenario, trace_out.as_deref(), csv_out.as_deref()),
        Cmd::Sweep { spec, out_dir, parallel } => sweep(&spec, out_dir, parallel),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
