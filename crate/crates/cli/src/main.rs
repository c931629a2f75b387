use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gamma_fts::backtest::{self, ExperimentConfig};
use gamma_fts::dataio::{self, DatasetSchema};
use gamma_fts::{Error, Forecaster, Series};

/// Embedding-based weighted multivariate fuzzy time series forecasting.
#[derive(Parser)]
#[command(name = "gamma-fts", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON experiment config (nested or flat dotted keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set partition.kappa=30`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Clean and optionally resample a raw dataset into the canonical CSV layout.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        /// aec, hpc, shwi or cleaned.
        #[arg(long, default_value = "cleaned")]
        schema: String,
        #[arg(long)]
        target: Option<String>,
        /// e.g. `30m`, `1h`.
        #[arg(long)]
        resolution: Option<String>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Fit a model on the configured dataset and write a JSON snapshot.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        output: PathBuf,
    },
    /// One-step forecasts for every row of a cleaned CSV but the last.
    Forecast {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Sliding-window evaluation of the configured models.
    Backtest {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        output: PathBuf,
        /// Exit 0 even when windows were skipped.
        #[arg(long)]
        allow_skips: bool,
    },
    /// Backtest every (K, kappa) pair of a grid.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4, 5, 6])]
        ks: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [10, 20, 30, 40, 50])]
        kappas: Vec<usize>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        allow_skips: bool,
    },
    /// Print the rule base of a snapshot in readable form.
    ExportRules {
        #[arg(long)]
        model: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Error(Error, Option<PathBuf>),
    Skipped(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e, None)
    }
}

fn at(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |e| Failure::Error(e, Some(path.to_path_buf()))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric { .. } => 3,
        _ => 2,
    }
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig, Failure> {
    let base = match &args.config {
        Some(p) => ExperimentConfig::load(p).map_err(at(p))?,
        None => ExperimentConfig::default(),
    };
    let config = base.with_overrides(&args.overrides)?;
    config.validate()?;
    Ok(config)
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Error(Error::Io { path: path.display().to_string(), source: e }, None))
}

fn read_model(path: &Path) -> Result<Forecaster, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Error(Error::Io { path: path.display().to_string(), source: e }, None))?;
    serde_json::from_str(&text).map_err(|e| Failure::Error(Error::Json(e), Some(path.to_path_buf())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Preprocess { input, schema, target, resolution, output } => {
            let mut schema = DatasetSchema::builtin(&schema)?;
            if target.is_some() {
                schema.target = target;
            }
            let raw: Series = dataio::load_csv(&input, &schema).map_err(at(&input))?;
            let (clean, removed) = dataio::drop_missing(&raw);
            let clean = match resolution {
                Some(r) => dataio::resample(&clean, dataio::parse_resolution(&r)?)?,
                None => clean,
            };
            dataio::save_csv(&clean, &output)?;
            println!("rows read: {}", raw.len());
            println!("rows removed: {removed}");
            println!("rows written: {}", clean.len());
        }
        Command::Train { config, output } => {
            let config = load_config(&config)?;
            let (series, _) = backtest::load_dataset::<f64>(&config.dataset)?;
            let start = Instant::now();
            let model = Forecaster::fit(&series, &config.model_config(config.embedding.kind))?;
            let elapsed = start.elapsed().as_secs_f64();
            write(&output, &serde_json::to_string_pretty(&model).map_err(Error::Json)?)?;
            println!("rules: {}", model.rule_count());
            println!("train time: {elapsed:.3} s");
        }
        Command::Forecast { model, input, output } => {
            let fitted = read_model(&model)?;
            let schema = DatasetSchema::cleaned(Some(fitted.target.clone()));
            let series: Series = dataio::load_csv(&input, &schema).map_err(at(&input))?;
            let forecasts = fitted.forecast_series(&series).map_err(at(&input))?;
            let actual = series.target_values();
            let mut out = String::from("timestamp,actual,predicted,fallback\n");
            for (t, f) in forecasts.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    series.timestamps()[t + 1].format(dataio::ISO_FORMAT),
                    actual[t + 1],
                    f.value,
                    f.fallback_used
                ));
            }
            write(&output, &out)?;
            println!("forecasts: {}", forecasts.len());
        }
        Command::Backtest { config, output, allow_skips } => {
            let config = load_config(&config)?;
            let result = backtest::run_experiment(&config)?;
            backtest::write_outputs(&output, &result)?;
            print!("{}", backtest::format_table(&result.report));
            println!("total time: {:.3} s", result.timings.total_seconds);
            let skipped = result.report.skipped_windows();
            for m in &result.report.models {
                for w in m.windows.iter().filter(|w| w.skipped.is_some()) {
                    eprintln!("skipped: {} window {}: {}", m.name, w.index, w.skipped.as_deref().unwrap_or(""));
                }
            }
            if skipped > 0 && !allow_skips {
                return Err(Failure::Skipped(skipped));
            }
        }
        Command::Sweep { config, ks, kappas, output, allow_skips } => {
            let config = load_config(&config)?;
            let report = backtest::sweep(&config, &ks, &kappas)?;
            backtest::write_sweep_outputs(&output, &report)?;
            print!("{}", backtest::format_sweep_table(&report));
            let skipped: usize = report.cells.iter().map(|c| c.skipped_windows).sum();
            if skipped > 0 && !allow_skips {
                return Err(Failure::Skipped(skipped));
            }
        }
        Command::ExportRules { model, output } => {
            let fitted = read_model(&model)?;
            let text = fitted.rules_text();
            match output {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Skipped(n)) => {
            eprintln!("error: {n} window(s) skipped (pass --allow-skips to accept)");
            ExitCode::from(4)
        }
        Err(Failure::Error(e, path)) => {
            match (&e, path) {
                (Error::Parse { line, message }, Some(p)) => eprintln!("{}:{line}: {message}", p.display()),
                (_, Some(p)) => eprintln!("error: {}: {e}", p.display()),
                (_, None) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
