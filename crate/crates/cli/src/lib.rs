//! Command-line front end for the `mmx-core` pipeline.
//!
//! Every subcommand reads an optional JSON config (`--config`), falling back
//! to the bundled example. With `--out DIR` results are written to files,
//! otherwise they go to stdout. Exit codes: 0 success, 1 config error,
//! 2 data error, 3 numerical failure.

pub mod server;

use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mmx_core::causal::{export_dot, pc_pattern};
use mmx_core::factor::Selection;
use mmx_core::pipeline::{
    load_data, run_pipeline, ModelBundle, PipelineConfig, PipelineError, Stage,
};
use mmx_core::report::{OptimizationTable, Report};
use mmx_core::scenario::{ScenarioError, ScenarioModel, ScenarioRequest};
use mmx_core::stats::{correlation, standardize};

#[derive(Debug, Parser)]
#[command(name = "mmx", version, about = "Marketing-mix modeling pipeline")]
pub struct Cli {
    /// Pipeline config (JSON); the bundled example when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory; stdout when omitted.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load or synthesize the dataset and emit it as CSV.
    Synth,
    /// Descriptive statistics, full and stepwise regression.
    Fit {
        #[arg(long)]
        json: bool,
    },
    /// Principal components, rotation and score coefficients.
    Factor {
        /// Retain exactly K components instead of the eigenvalue > 1 rule.
        #[arg(long, value_name = "K")]
        k: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Solve the allocation LP.
    Optimize {
        /// Solve against a saved model bundle instead of refitting.
        #[arg(long, value_name = "PATH", conflicts_with = "published")]
        bundle: Option<PathBuf>,
        /// Solve against the published eleven-channel objective.
        #[arg(long)]
        published: bool,
        /// Scenario overrides (JSON request body of the optimize endpoint).
        #[arg(long, value_name = "PATH")]
        scenario: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// PC-algorithm causal pattern as DOT.
    Dag {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_name = "N")]
        max_cond_size: Option<usize>,
        /// Order-independent skeleton search.
        #[arg(long)]
        stable: bool,
        /// Emit the edge list with marks and sepsets instead of DOT.
        #[arg(long)]
        json: bool,
    },
    /// Run the full pipeline and write every table, bundle and graph.
    Report,
    /// Serve the scenario-optimization API.
    Serve {
        #[arg(long, value_name = "PATH", conflicts_with = "published")]
        bundle: Option<PathBuf>,
        #[arg(long)]
        published: bool,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::new(e.exit_code(), e.to_string())
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Malformed(_) | ScenarioError::InfeasibleBounds { .. } => 1,
            _ => 3,
        };
        CliError::new(code, e.to_string())
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::new(2, format!("{}: {e}", path.display()))
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::example(0),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.out.is_some() {
        cfg.output_dir = cli.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_error(&path, e))
}

/// Writes to `DIR/name` when an output directory is set, else to stdout.
fn emit(
    out: &mut dyn Write,
    dir: Option<&Path>,
    name: &str,
    contents: &str,
) -> Result<(), CliError> {
    match dir {
        Some(d) => write_file(d, name, contents),
        None => out
            .write_all(contents.as_bytes())
            .map_err(|e| CliError::new(2, e.to_string())),
    }
}

/// Runs the pipeline and keeps the report if `ready` accepts it, even when a
/// later stage failed.
fn report_through(
    cfg: &PipelineConfig,
    ready: impl Fn(&Report) -> bool,
) -> Result<Report, CliError> {
    match run_pipeline(cfg) {
        Ok(out) => Ok(out.report),
        Err(fail) if ready(&fail.report) => Ok(fail.report),
        Err(fail) => {
            if let Some(dir) = &cfg.output_dir {
                let _ = fail.write(dir);
            }
            Err(fail.error.into())
        }
    }
}

fn emit_report(
    out: &mut dyn Write,
    dir: Option<&Path>,
    stem: &str,
    report: &Report,
    json: bool,
) -> Result<(), CliError> {
    match dir {
        Some(_) => {
            emit(out, dir, &format!("{stem}.json"), &report.to_json())?;
            emit(out, dir, &format!("{stem}.txt"), &report.render_text())
        }
        None if json => emit(out, None, "", &report.to_json()),
        None => emit(out, None, "", &report.render_text()),
    }
}

fn scenario_model(
    cfg: &PipelineConfig,
    bundle: Option<&Path>,
    published: bool,
) -> Result<ScenarioModel, CliError> {
    if published {
        return Ok(ScenarioModel::published_example());
    }
    let bundle = match bundle {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            ModelBundle::from_json(&text)
                .map_err(|e| CliError::new(2, format!("{}: {e}", path.display())))?
        }
        None => {
            run_pipeline(cfg)
                .map_err(|f| CliError::from(f.error))?
                .bundle
        }
    };
    Ok(bundle.scenario_model()?)
}

fn read_scenario(path: Option<&Path>) -> Result<ScenarioRequest, CliError> {
    let Some(path) = path else {
        return Ok(ScenarioRequest::default());
    };
    let text = fs::read(path).map_err(|e| io_error(path, e))?;
    server::parse_request(&text).map_err(|e| CliError::new(1, format!("{}: {e}", path.display())))
}

/// Executes a parsed command, writing stdout output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = load_config(&cli)?;
    let dir = cfg.output_dir.clone();
    let dir = dir.as_deref();
    match cli.command {
        Command::Synth => {
            let data = load_data(&cfg)?;
            let mut csv = Vec::new();
            data.write_csv(&mut csv)
                .map_err(|e| CliError::from(PipelineError::new(Stage::Write, e)))?;
            emit(out, dir, "data.csv", &String::from_utf8_lossy(&csv))
        }
        Command::Fit { json } => {
            let full = report_through(&cfg, |r| r.stepwise.is_some())?;
            let mut r = Report::empty(full.provenance);
            r.summary = full.summary;
            r.full_regression = full.full_regression;
            r.stepwise = full.stepwise;
            emit_report(out, dir, "fit", &r, json)
        }
        Command::Factor { k, json } => {
            if let Some(k) = k {
                cfg.factors.selection = Selection::Fixed(k);
            }
            let full = report_through(&cfg, |r| r.score_coefficients.is_some())?;
            let mut r = Report::empty(full.provenance);
            r.variance_explained = full.variance_explained;
            r.rotated_loadings = full.rotated_loadings;
            r.score_coefficients = full.score_coefficients;
            emit_report(out, dir, "factor", &r, json)
        }
        Command::Optimize {
            bundle,
            published,
            scenario,
            json,
        } => {
            let req = read_scenario(scenario.as_deref())?;
            let model = scenario_model(&cfg, bundle.as_deref(), published)?;
            let problem = model.build_problem(&req)?;
            let resp = model.optimize(&req)?;
            if json || dir.is_some() {
                let text = serde_json::to_string_pretty(&resp).expect("response serializes") + "\n";
                emit(out, dir, "optimize.json", &text)?;
            }
            if !json {
                let mut r = Report::empty(mmx_core::report::ReportProvenance {
                    seed: cfg.seed,
                    config_hash: cfg.hash(),
                });
                r.optimization = Some(OptimizationTable::new(
                    &problem,
                    &resp.solution,
                    Some(&resp.allocation),
                ));
                emit(out, dir, "optimize.txt", &r.render_text())?;
            }
            Ok(())
        }
        Command::Dag {
            alpha,
            max_cond_size,
            stable,
            json,
        } => {
            if let Some(a) = alpha {
                cfg.causal.alpha = a;
            }
            if max_cond_size.is_some() {
                cfg.causal.max_cond_size = max_cond_size;
            }
            cfg.causal.stable |= stable;
            cfg.validate()?;
            let data = load_data(&cfg)?;
            let z = standardize(&data).map_err(|e| PipelineError::new(Stage::Standardize, e))?;
            let r = correlation(&z);
            let g = pc_pattern(&data.names(), &r, data.n(), &cfg.causal)
                .map_err(|e| PipelineError::new(Stage::Causal, e))?;
            if json {
                let text =
                    serde_json::to_string_pretty(&g.to_record()).expect("record serializes") + "\n";
                emit(out, dir, "pattern.json", &text)
            } else {
                emit(out, dir, "pattern.dot", &export_dot(&g))
            }
        }
        Command::Report => match run_pipeline(&cfg) {
            Ok(output) => match dir {
                Some(d) => output
                    .write(d)
                    .map_err(|e| CliError::from(PipelineError::new(Stage::Write, e))),
                None => emit(out, None, "", &output.report.render_text()),
            },
            Err(fail) => {
                if let Some(d) = dir {
                    fail.write(d)
                        .map_err(|e| CliError::from(PipelineError::new(Stage::Write, e)))?;
                }
                Err(fail.error.into())
            }
        },
        Command::Serve {
            bundle,
            published,
            host,
            port,
        } => {
            let model = scenario_model(&cfg, bundle.as_deref(), published)?;
            let runtime =
                tokio::runtime::Runtime::new().map_err(|e| CliError::new(3, e.to_string()))?;
            runtime
                .block_on(server::serve(model, SocketAddr::new(host, port)))
                .map_err(|e| CliError::new(2, format!("serve: {e}")))
        }
    }
}
