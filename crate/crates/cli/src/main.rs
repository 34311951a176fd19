use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orbitlab_core::report::{atlas_rows, run, Command, Report, RunConfig, Suite, DEFAULT_SAMPLES, DEFAULT_SEED};
use orbitlab_core::Error;

#[derive(Parser)]
#[command(name = "orbitlab", version, about = "Orbit geometry, invariant measures and dilation limits for real reductive dual pairs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Pair names from the catalog (comma separated); default depends on the command.
    #[arg(long, value_delimiter = ',')]
    pairs: Vec<String>,
    /// RNG seed; falls back to ORBITLAB_SEED, then a fixed default.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count where sampling is used.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Tolerance override, `key=value`; repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    tolerances: Vec<(String, f64)>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Orbit,
    Homogeneity,
    Slice,
    Measures,
    Weil,
    K,
    Degree,
    Wavefront,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Orbit dimension atlas.
    Atlas {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a check suite.
    Check {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[command(flatten)]
        common: Common,
    },
    /// Orbital integral of a preset test function, optionally with a homogeneity scan.
    Integrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value = "gauss")]
        phi: String,
        /// Dilation parameters for a homogeneity scan (comma separated).
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
    /// Dilation limit of the intertwining distribution.
    Limit {
        #[command(flatten)]
        common: Common,
        /// Highest weight, e.g. `1`, `1,-1`, `trivial`; append `:nongenuine` for a non-genuine one.
        #[arg(long, allow_hyphen_values = true)]
        weight: String,
        #[arg(long, default_value = "family")]
        phi: String,
        #[arg(long, default_value_t = 1e-3)]
        t_min: f64,
    },
    /// Re-run the configuration stored in a report and compare.
    Replay {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a configuration file (a `RunConfig` as JSON).
    Run {
        config: PathBuf,
    },
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad tolerance '{v}': {e}"))?;
    Ok((k.to_string(), v))
}

fn seed(explicit: Option<u64>) -> Result<u64, Error> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var("ORBITLAB_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Error::Config(format!("ORBITLAB_SEED is not an integer: '{v}'"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn config(command: Command, c: &Common) -> Result<RunConfig, Error> {
    Ok(RunConfig {
        command,
        pairs: c.pairs.clone(),
        seed: seed(c.seed)?,
        samples: c.samples,
        tolerances: c.tolerances.iter().cloned().collect::<BTreeMap<_, _>>(),
        output: c.out.as_ref().map(|p| p.display().to_string()),
    })
}

fn emit(text: &str, out: Option<&str>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {path}: {e}"))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn summarize(r: &Report) {
    let fails = r.records.iter().filter(|x| x.status == orbitlab_core::report::Status::Fail).count();
    eprintln!("{} records, {} failed, {:.2}s", r.records.len(), fails, r.wall_clock_s);
    for rec in r.records.iter().filter(|x| x.status == orbitlab_core::report::Status::Fail) {
        eprintln!("FAIL {} [{}]", rec.name, rec.anchor);
    }
}

fn finish(r: &Report) -> Result<ExitCode, Error> {
    emit(&r.to_json(), r.config.output.as_deref())?;
    summarize(r);
    Ok(if r.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Atlas { common, format: Format::Csv } => {
            let cfg = config(Command::Atlas, &common)?;
            let rows = atlas_rows(&cfg)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row).map_err(|e| Error::Config(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
            emit(String::from_utf8_lossy(&bytes).trim_end(), cfg.output.as_deref())?;
            Ok(if rows.iter().all(|r| r.agree) { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Atlas { common, format: Format::Json } => finish(&run(&config(Command::Atlas, &common)?)?),
        Cmd::Check { suite, common } => {
            let s = match suite {
                SuiteArg::Orbit => Suite::Orbit,
                SuiteArg::Homogeneity => Suite::Homogeneity,
                SuiteArg::Slice => Suite::Slice,
                SuiteArg::Measures => Suite::Measures,
                SuiteArg::Weil => Suite::Weil,
                SuiteArg::K => Suite::K,
                SuiteArg::Degree => Suite::Degree,
                SuiteArg::Wavefront => Suite::Wavefront,
                SuiteArg::All => Suite::All,
            };
            finish(&run(&config(Command::Check { suite: s }, &common)?)?)
        }
        Cmd::Integrate { common, k, phi, t_grid } => finish(&run(&config(Command::Integrate { k, phi, t_grid }, &common)?)?),
        Cmd::Limit { common, weight, phi, t_min } => {
            finish(&run(&config(Command::Limit { weight, phi_preset: phi, t_min }, &common)?)?)
        }
        Cmd::Run { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Config(format!("cannot read {}: {e}", config.display())))?;
            let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
            finish(&run(&cfg)?)
        }
        Cmd::Replay { report, out } => {
            let text = std::fs::read_to_string(&report).map_err(|e| Error::Config(format!("cannot read {}: {e}", report.display())))?;
            let old = Report::from_json(&text)?;
            let new = run(&old.config)?;
            let target = out.map(|p| p.display().to_string());
            emit(&new.to_json(), target.as_deref())?;
            let same = new.canonical_json() == old.canonical_json();
            eprintln!("replay: {}", if same { "byte-identical" } else { "differs" });
            Ok(if same { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            // configuration and input problems exit with 2
            ExitCode::from(2)
        }
    }
}
