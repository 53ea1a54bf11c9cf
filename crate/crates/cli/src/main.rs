use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Parser, Subcommand};

use iondecay::config::{ConfigError, RawConfig};
use iondecay::scenario::Mode;
use iondecay::{format, presets, AppError, Scenario};
use iondecay_core::coupling;

#[derive(Parser)]
#[command(name = "iondecay", version, about = "Trapped-ion decoherence from background-gas polarization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (defaults to the config file's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run named presets; several names run concurrently.
    Preset {
        #[arg(required_unless_present = "all", value_parser = clap::builder::PossibleValuesParser::new(presets::NAMES))]
        names: Vec<String>,
        /// Run every preset.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evaluate the modified Bessel function K1.
    K1 {
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        /// Log-spaced table `x,k1` from MIN to MAX with N points.
        #[arg(long, num_args = 3, value_names = ["MIN", "MAX", "N"], conflicts_with = "x")]
        sweep: Option<Vec<f64>>,
    },
    /// Langevin collision rates from a config file.
    Langevin {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the coupling V_k from a config file.
    VkSweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("iondecay: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), AppError> {
    match cmd {
        Command::Run { config, out } => run_file(&config, None, out),
        Command::Langevin { config, out } => run_file(&config, Some(Mode::Langevin), out),
        Command::VkSweep { config, out } => run_file(&config, Some(Mode::CouplingSweep), out),
        Command::Preset { names, all, out } => {
            let names: Vec<String> = if all {
                presets::NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                names
            };
            run_presets(&names, &out)
        }
        Command::K1 { x, sweep } => k1(x, sweep),
    }
}

fn run_file(path: &Path, forced: Option<Mode>, out: Option<PathBuf>) -> Result<(), AppError> {
    let text = fs::read_to_string(path).map_err(|source| AppError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut raw = RawConfig::parse(&text)?;
    if let Some(mode) = forced {
        match raw.get("mode") {
            None => raw.insert("mode".into(), mode.name().into())?,
            Some(m) if m == mode.name() => {}
            Some(m) => {
                return Err(ConfigError::Invalid {
                    key: "mode".into(),
                    value: m.into(),
                    reason: format!("this subcommand requires mode = {}", mode.name()),
                }
                .into())
            }
        }
    }
    let scenario = Scenario::from_raw(&raw)?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let dir = out.unwrap_or_else(|| base.clone());
    execute(&scenario, &base, &dir)
}

fn execute(scenario: &Scenario, base: &Path, dir: &Path) -> Result<(), AppError> {
    let outcome = scenario.run(base)?;
    for line in &outcome.report {
        println!("{}: {line}", scenario.output());
    }
    for path in outcome.write_to(dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_presets(names: &[String], out: &Path) -> Result<(), AppError> {
    let scenarios = names
        .iter()
        .map(|n| {
            let text = presets::config(n).expect("names validated by clap");
            Scenario::parse(&text).map_err(AppError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<Result<(), AppError>> = thread::scope(|s| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|sc| s.spawn(move || execute(sc, out, out)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });
    results.into_iter().collect()
}

fn k1(x: Option<f64>, sweep: Option<Vec<f64>>) -> Result<(), AppError> {
    let numeric = |e| AppError::numeric("k1", e);
    if let Some(v) = sweep {
        let (lo, hi, n) = (v[0], v[1], v[2]);
        if !(lo > 0.0 && hi > lo && n >= 2.0 && n.fract() == 0.0) {
            return Err(ConfigError::Invalid {
                key: "sweep".into(),
                value: format!("{lo} {hi} {n}"),
                reason: "need 0 < MIN < MAX and integer N >= 2".into(),
            }
            .into());
        }
        let n = n as usize;
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let x = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp();
            rows.push(vec![x, coupling::bessel_k1(x).map_err(numeric)?]);
        }
        print!("{}", format::table("", "x,k1", rows));
        return Ok(());
    }
    let x = x.ok_or_else(|| ConfigError::Missing("x".into()))?;
    println!("k1 = {:e}", coupling::bessel_k1(x).map_err(numeric)?);
    Ok(())
}
