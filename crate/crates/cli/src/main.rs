use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use capagg_core::bench::{run_bench, write_curves_csv, write_timing_csv, BenchConfig};
use capagg_core::check::check_forecasts;
use capagg_core::io::{read_forecasts, write_aggregate_csv, write_csv, write_forecasts};
use capagg_core::scoring::{evaluate_cases, run_pipeline, ScoreReport};
use capagg_core::synth::{generate, preset, GenConfig, PRESETS};
use capagg_core::{EngineConfig, Error, Method, Result, Strategy, DEFAULT_SUPPORT_CAP};
use clap::{Args, Parser, Subcommand};

/// Coherent aggregation of probability forecasts.
#[derive(Parser)]
#[command(name = "capagg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pool a forecast file and aggregate it into coherent probabilities.
    Aggregate {
        input: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        /// Aggregate CSV (event,prob,weight,input); stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Full JSON report with the sweep trace.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Report local-coherence residuals and conjunction-fallacy flags.
    Check {
        input: PathBuf,
        #[arg(long, default_value_t = Strategy::Neighborhood)]
        design: Strategy,
        #[arg(long, default_value_t = DEFAULT_SUPPORT_CAP)]
        cap: usize,
        /// JSON report; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score raw, individual, aggregate and linear-average forecasts.
    Score {
        input: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        /// JSON report, or per-judge CSV for a `.csv` path; stdout JSON if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic forecast panel.
    Gen {
        /// Start from a dataset shape (STCK, FIN, NBA1, NBA2, HSTN).
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        judges: Option<usize>,
        #[arg(long)]
        events: Option<usize>,
        #[arg(long, default_value_t = 0.15)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        basic_fraction: Option<f64>,
        /// Weights of the forms p&q, p&!q, p|q, p|!q.
        #[arg(long, value_delimiter = ',', num_args = 4)]
        forms: Option<Vec<f64>>,
        /// Draw variables from a two-component mixture.
        #[arg(long)]
        correlated: bool,
        /// CSV, or JSON lines for `.jsonl`; stdout CSV if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time aggregation on synthetic panels and record Brier-vs-sweep curves.
    Bench {
        /// Dataset shapes to run, or `all`.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        dataset: Vec<String>,
        /// Number of seeds per dataset, starting at --seed.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, default_value_t = 0.15)]
        noise: f64,
        #[command(flatten)]
        engine: EngineArgs,
        /// Timing CSV; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Brier-vs-sweep CSV.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, default_value_t = Strategy::Neighborhood)]
    design: Strategy,
    #[arg(long, default_value_t = Method::Cyclic)]
    method: Method,
    /// Maximum number of sweeps.
    #[arg(long, default_value_t = 50)]
    sweeps: usize,
    /// Stop once no coordinate moves more than this over a sweep.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Run disjoint subsets of each batch concurrently.
    #[arg(long)]
    parallel: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SUPPORT_CAP)]
    cap: usize,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            method: self.method,
            max_sweeps: self.sweeps,
            tol: self.tol,
            parallel: self.parallel,
            support_cap: self.cap,
            keep_iterates: false,
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_scores_csv(path: &Path, reports: &[ScoreReport]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "case,judge,forecasts,brier,slope")?;
    for r in reports {
        for j in &r.judges {
            let slope = j.slope.map_or(String::new(), |s| s.to_string());
            writeln!(
                w,
                "{},{},{},{},{}",
                r.case.as_str(),
                csv_field(&j.judge),
                j.forecasts,
                j.brier,
                slope
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Aggregate {
            input,
            engine,
            out,
            report,
        } => {
            let forecasts = read_forecasts(&input)?;
            let (_, r) = run_pipeline(&forecasts, engine.design, &engine.config())?;
            write_aggregate_csv(output(out.as_deref())?, &r)?;
            if let Some(path) = report {
                write_json(Some(&path), &r)?;
            }
            if !r.converged {
                eprintln!("warning: not converged after {} sweeps", r.iterations_run);
            }
        }
        Command::Check {
            input,
            design,
            cap,
            out,
        } => {
            let forecasts = read_forecasts(&input)?;
            let r = check_forecasts(&forecasts, design, cap)?;
            write_json(out.as_deref(), &r)?;
            let incoherent: Vec<&str> = r.incoherent_judges().map(|j| j.judge.as_str()).collect();
            if !incoherent.is_empty() {
                eprintln!("incoherent judges: {}", incoherent.join(", "));
            }
        }
        Command::Score { input, engine, out } => {
            let forecasts = read_forecasts(&input)?;
            let reports = evaluate_cases(&forecasts, engine.design, &engine.config())?;
            match out {
                Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
                    write_scores_csv(&p, &reports)?
                }
                other => write_json(other.as_deref(), &reports)?,
            }
        }
        Command::Gen {
            dataset,
            vars,
            judges,
            events,
            noise,
            seed,
            basic_fraction,
            forms,
            correlated,
            out,
        } => {
            let mut config = match dataset {
                Some(name) => preset(&name)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown dataset `{name}`")))?
                    .config(noise, seed),
                None => GenConfig {
                    noise,
                    seed,
                    ..GenConfig::default()
                },
            };
            config.n_vars = vars.unwrap_or(config.n_vars);
            config.n_judges = judges.unwrap_or(config.n_judges);
            config.events_per_judge = events.unwrap_or(config.events_per_judge);
            config.basic_fraction = basic_fraction.unwrap_or(config.basic_fraction);
            if let Some(f) = forms {
                config.form_weights = [f[0], f[1], f[2], f[3]];
            }
            config.correlated = correlated;
            let panel = generate(&config)?;
            match out {
                Some(p) => write_forecasts(&p, &panel.forecasts)?,
                None => write_csv(output(None)?, &panel.forecasts)?,
            }
        }
        Command::Bench {
            dataset,
            seeds,
            noise,
            engine,
            out,
            curves,
        } => {
            let presets = if dataset.iter().any(|d| d.eq_ignore_ascii_case("all")) {
                PRESETS.to_vec()
            } else {
                dataset
                    .iter()
                    .map(|d| {
                        preset(d).ok_or_else(|| {
                            Error::InvalidParameter(format!("unknown dataset `{d}`"))
                        })
                    })
                    .collect::<Result<_>>()?
            };
            let config = BenchConfig {
                presets,
                seeds: (engine.seed..engine.seed + seeds).collect(),
                noise,
                strategy: engine.design,
                engine: engine.config(),
            };
            let runs = run_bench(&config)?;
            write_timing_csv(output(out.as_deref())?, &runs)?;
            if let Some(path) = curves {
                write_curves_csv(BufWriter::new(File::create(path)?), &runs)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_)
                | Error::UnknownStrategy(_)
                | Error::UnknownMethod(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
