use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iemi_sim::commands;
use iemi_sim::config::ExperimentConfig;
use iemi_sim::Error;

#[derive(Parser)]
#[command(name = "iemi-sim", version, about = "Touchscreen interference-injection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (directory for gen-traces); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sensor waveform CSV.
    SimulateSensor(Common),
    /// Minimum ghost-touch field per frequency, CSV.
    Sweep(Common),
    /// Critical field and the matching plate voltage.
    CriticalField {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta_c_f: Option<f64>,
        #[arg(long)]
        v_c_v: Option<f64>,
        #[arg(long)]
        area_m2: Option<f64>,
        #[arg(long)]
        eps_r: Option<f64>,
    },
    /// Frequencies of maximal and zero coupling.
    PredictFrequencies {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f_sw_hz: Option<f64>,
        #[arg(long)]
        d_s: Option<f64>,
        #[arg(long)]
        band_low_hz: Option<f64>,
        #[arg(long)]
        band_high_hz: Option<f64>,
    },
    /// Switching frequency and duty cycle from observed maxima.
    InferTiming {
        #[command(flatten)]
        common: Common,
        /// Comma-separated frequencies of maximal coupling.
        #[arg(long, value_delimiter = ',')]
        maxima_hz: Option<Vec<f64>>,
    },
    /// Synthetic emission traces, classifier and ground truth.
    GenTraces(Common),
    /// Screen pose from a trace directory.
    Locate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        traces: PathBuf,
    },
    /// Attack campaign report.
    Attack(Common),
    /// Injection detection from a monitor stream, or the episode benchmark.
    Detect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        stream: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::SimulateSensor(c) => emit(&c.out, &commands::simulate_sensor(&load(&c)?)?),
        Command::Sweep(c) => emit(&c.out, &commands::sweep(&load(&c)?)?),
        Command::CriticalField { common, delta_c_f, v_c_v, area_m2, eps_r } => {
            let mut cfg = load(&common)?;
            let s = &mut cfg.critical_field;
            s.delta_c_f = delta_c_f.unwrap_or(s.delta_c_f);
            s.v_c_v = v_c_v.unwrap_or(s.v_c_v);
            s.area_m2 = area_m2.unwrap_or(s.area_m2);
            s.eps_r = eps_r.unwrap_or(s.eps_r);
            let r = commands::critical_field_result(&cfg)?;
            eprintln!("E_crit = {:.1} V/m", r.e_crit_v_per_m);
            eprintln!("V_E = {:.2} V", r.v_e_v);
            emit(&common.out, &commands::critical_field_cmd(&cfg)?)
        }
        Command::PredictFrequencies { common, f_sw_hz, d_s, band_low_hz, band_high_hz } => {
            let mut cfg = load(&common)?;
            cfg.sensor.f_sw_hz = f_sw_hz.or(cfg.sensor.f_sw_hz);
            cfg.sensor.d_s = d_s.or(cfg.sensor.d_s);
            let b = &mut cfg.frequencies;
            b.band_low_hz = band_low_hz.unwrap_or(b.band_low_hz);
            b.band_high_hz = band_high_hz.unwrap_or(b.band_high_hz);
            emit(&common.out, &commands::predict_frequencies(&cfg)?)
        }
        Command::InferTiming { common, maxima_hz } => {
            let mut cfg = load(&common)?;
            if let Some(m) = maxima_hz {
                cfg.timing.maxima_hz = m;
            }
            emit(&common.out, &commands::infer_timing(&cfg)?)
        }
        Command::GenTraces(c) => {
            let dir = c.out.clone().ok_or_else(|| Error::Config("gen-traces needs --out <dir>".into()))?;
            commands::gen_traces(&load(&c)?, &dir).map(|_| ())
        }
        Command::Locate { common, traces } => emit(&common.out, &commands::locate(&load(&common)?, &traces)?),
        Command::Attack(c) => emit(&c.out, &commands::attack(&load(&c)?)?),
        Command::Detect { common, stream } => {
            let text = stream.as_deref().map(read).transpose()?;
            emit(&common.out, &commands::detect(&load(&common)?, text.as_deref())?)
        }
    }
}

fn read(p: &Path) -> Result<String, Error> {
    Ok(std::fs::read_to_string(p)?)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidParameter { .. } => 2,
                Error::LocateFailure(_) | Error::PoseUnsolvable(_) | Error::SegmentationFailure(_) => 3,
                _ => 1,
            })
        }
    }
}
