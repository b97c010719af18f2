//! End-to-end orchestration: data → regressions → factors → objective →
//! allocation → causal pattern, with a persisted model bundle.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::causal::{export_dot, pc_pattern, CausalConfig, CausalError, Cpdag};
use crate::data::{DataError, Dataset, VariableMeta};
use crate::example;
use crate::factor::{
    factor_analysis, factor_scores, FactorError, FactorSolution, RotationSettings, Selection,
};
use crate::linalg::Matrix;
use crate::mixopt::{
    allocation_report, compose_objective, solve_lp, LpError, LpProblem, LpSolution, LpStatus,
    ObjectiveSpec, Sense,
};
use crate::report::{
    component_names, ComponentTable, OptimizationTable, RegressionTable, Report, ReportError,
    ReportProvenance, StepwiseTable, SummaryTable, VarianceTable,
};
use crate::scenario::{ConstraintConfig, ScenarioError, ScenarioModel};
use crate::stats::{
    correlation, ols_fit, standardize, stepwise_fit, RegressionFit, Series, StatsError,
    StepwiseThresholds, StepwiseTrace,
};
use crate::synth::{
    nearest_pd_repair, synthesize, ClipPolicy, SynthError, SynthesisSpec, PD_FLOOR,
};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationSource {
    /// The bundled 12-variable matrix rebuilt from published loadings.
    #[default]
    DerivedExample,
    Matrix(Matrix),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv {
        path: PathBuf,
    },
    Synthesis {
        n: usize,
        #[serde(default)]
        clip_policy: ClipPolicy,
        /// Defaults to the bundled twelve-variable summary.
        #[serde(default)]
        meta: Option<Vec<VariableMeta>>,
        #[serde(default)]
        correlation: CorrelationSource,
        /// Project a non-PD target onto the nearest PD correlation matrix.
        #[serde(default)]
        repair: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    #[serde(default)]
    pub selection: Selection,
    #[serde(default)]
    pub rotation: RotationSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationConfig {
    #[serde(default = "default_lower")]
    pub lower: f64,
    #[serde(default = "default_upper")]
    pub upper: f64,
    /// Per-variable overrides of the common bounds.
    #[serde(default)]
    pub bounds: BTreeMap<String, Bounds>,
    #[serde(default = "default_constraints")]
    pub constraints: Vec<ConstraintConfig>,
}

fn default_lower() -> f64 {
    example::Z_LOWER
}

fn default_upper() -> f64 {
    example::Z_UPPER
}

fn default_constraints() -> Vec<ConstraintConfig> {
    vec![ConstraintConfig::z_sum(
        "sum_z",
        Sense::Le,
        example::Z_SUM_LIMIT,
    )]
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        OptimizationConfig {
            lower: default_lower(),
            upper: default_upper(),
            bounds: BTreeMap::new(),
            constraints: default_constraints(),
        }
    }
}

fn default_response() -> String {
    example::RESPONSE.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataSource,
    #[serde(default = "default_response")]
    pub response: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stepwise: StepwiseThresholds,
    #[serde(default)]
    pub factors: FactorConfig,
    #[serde(default)]
    pub optimization: OptimizationConfig,
    #[serde(default)]
    pub causal: CausalConfig,
    /// Where [`PipelineOutput::write`] puts files; not part of the config hash.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl PipelineConfig {
    /// Bundled metadata and derived correlation, 71 rows, clipped to bounds.
    pub fn example(seed: u64) -> Self {
        PipelineConfig {
            data: DataSource::Synthesis {
                n: example::N_MONTHS,
                clip_policy: ClipPolicy::ClipToBounds,
                meta: None,
                correlation: CorrelationSource::DerivedExample,
                repair: false,
            },
            response: default_response(),
            seed,
            stepwise: StepwiseThresholds::default(),
            factors: FactorConfig::default(),
            optimization: OptimizationConfig::default(),
            causal: CausalConfig::default(),
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text)
            .map_err(|e| PipelineError::new(Stage::Config, StageError::Config(e.to_string())))
    }

    /// Reads a config file; a relative CSV path resolves against the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| {
            PipelineError::new(
                Stage::Config,
                StageError::Config(format!("cannot read {}: {e}", path.display())),
            )
        })?;
        let mut cfg = Self::from_json(&text)?;
        if let DataSource::Csv { path: csv } = &mut cfg.data {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    *csv = dir.join(&*csv);
                }
            }
        }
        Ok(cfg)
    }

    /// SHA-256 over every field except the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::new(Stage::Config, StageError::Config(m)));
        if let DataSource::Synthesis { n, meta, .. } = &self.data {
            if *n == 0 {
                return fail("synthesis n must be positive".into());
            }
            let declared = meta.clone().unwrap_or_else(example::variable_meta);
            if !declared.iter().any(|m| m.name == self.response) {
                return fail(format!(
                    "response {:?} is not a declared variable",
                    self.response
                ));
            }
        }
        let s = self.stepwise;
        if !(s.p_enter > 0.0 && s.p_enter < s.p_remove) {
            return fail(format!(
                "stepwise thresholds need 0 < p_enter < p_remove (got {} and {})",
                s.p_enter, s.p_remove
            ));
        }
        if !(self.causal.alpha > 0.0 && self.causal.alpha < 1.0) {
            return fail(format!(
                "causal alpha must lie in (0, 1), got {}",
                self.causal.alpha
            ));
        }
        let o = &self.optimization;
        if !o.lower.is_finite() || o.upper.is_nan() {
            return fail("optimization lower bound must be finite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Load,
    Synthesize,
    Standardize,
    Correlation,
    FullRegression,
    Stepwise,
    Factor,
    FactorRegression,
    Objective,
    Optimize,
    Causal,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("stage serializes");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Causal(#[from] CausalError),
}

/// A failure tagged with the stage that raised it.
#[derive(Debug, Error)]
#[error("stage {stage}: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: StageError,
}

impl PipelineError {
    pub fn new(stage: Stage, source: impl Into<StageError>) -> Self {
        PipelineError {
            stage,
            source: source.into(),
        }
    }

    /// 1 configuration, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use StageError as E;
        match &self.source {
            E::Config(_) => 1,
            E::Data(_) | E::Io(_) => 2,
            E::Stats(e) => match e {
                StatsError::InvalidThresholds { .. } => 1,
                StatsError::RankDeficient { .. } => 3,
                _ => 2,
            },
            E::Synth(e) => match e {
                SynthError::InvalidCorrelation(_) | SynthError::CommunalityExceedsOne(_) => 1,
                SynthError::Data(_) => 2,
                _ => 3,
            },
            E::Factor(e) => match e {
                FactorError::TooManyComponents { .. } => 1,
                _ => 3,
            },
            E::Lp(e) => match e {
                LpError::InfeasibleBounds { .. } | LpError::UnboundedBelow(_) => 1,
                _ => 3,
            },
            E::Causal(e) => match e {
                CausalError::InvalidAlpha(_) => 1,
                CausalError::InsufficientSample { .. } => 2,
                _ => 3,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub created_unix: u64,
}

/// Everything needed to re-serve or audit a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub response: String,
    /// All variables, predictors first in dataset order.
    pub meta: Vec<VariableMeta>,
    pub n: usize,
    pub correlation: Matrix,
    pub full_fit: RegressionFit,
    pub stepwise_fit: RegressionFit,
    pub stepwise_trace: StepwiseTrace,
    pub factors: FactorSolution,
    pub factor_fit: RegressionFit,
    pub objective: ObjectiveSpec,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<ConstraintConfig>,
    pub solution: LpSolution,
    pub cpdag: Cpdag,
    pub provenance: Provenance,
}

impl ModelBundle {
    pub fn predictor_meta(&self) -> Vec<VariableMeta> {
        self.objective
            .names
            .iter()
            .map(|n| {
                self.meta
                    .iter()
                    .find(|m| &m.name == n)
                    .cloned()
                    .expect("objective names come from meta")
            })
            .collect()
    }

    /// Largest |coefficient − recomposed coefficient|.
    pub fn objective_recomposition_error(&self) -> Result<f64, LpError> {
        let again = compose_objective(
            &self.objective.names,
            &self.factor_fit.coefficients(),
            &self.factors.score_coefficients,
            self.factor_fit.intercept_value(),
        )?;
        Ok(again
            .coefficients
            .iter()
            .zip(&self.objective.coefficients)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn scenario_model(&self) -> Result<ScenarioModel, ScenarioError> {
        ScenarioModel::new(
            &self.response,
            self.predictor_meta(),
            self.objective.clone(),
            self.lower.clone(),
            self.upper.clone(),
            self.constraints.clone(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub dataset: Dataset,
    pub bundle: ModelBundle,
    pub report: Report,
    pub dot: String,
}

/// A failed run with the tables completed before the failure.
#[derive(Debug)]
pub struct PipelineFailure {
    pub error: PipelineError,
    pub report: Report,
}

impl fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for PipelineFailure {}

pub const REPORT_FILE: &str = "report.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const BUNDLE_FILE: &str = "bundle.json";
pub const DOT_FILE: &str = "pattern.dot";
pub const DATA_FILE: &str = "data.csv";

impl PipelineOutput {
    /// Writes report (JSON and text), bundle, DOT graph and data CSV.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(REPORT_FILE), self.report.to_json())?;
        fs::write(dir.join(REPORT_TEXT_FILE), self.report.render_text())?;
        fs::write(dir.join(BUNDLE_FILE), self.bundle.to_json())?;
        fs::write(dir.join(DOT_FILE), &self.dot)?;
        let mut csv = Vec::new();
        self.dataset
            .write_csv(&mut csv)
            .map_err(|e| io::Error::other(e.to_string()))?;
        fs::write(dir.join(DATA_FILE), csv)
    }
}

impl PipelineFailure {
    /// Writes the partial report.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(REPORT_FILE), self.report.to_json())?;
        fs::write(dir.join(REPORT_TEXT_FILE), self.report.render_text())
    }
}

/// Loads or synthesizes the dataset a config describes.
pub fn load_data(config: &PipelineConfig) -> Result<Dataset, PipelineError> {
    match &config.data {
        DataSource::Csv { path } => {
            let file = fs::File::open(path).map_err(|e| {
                PipelineError::new(
                    Stage::Load,
                    io::Error::new(e.kind(), format!("{}: {e}", path.display())),
                )
            })?;
            Dataset::read_csv(file).map_err(|e| PipelineError::new(Stage::Load, e))
        }
        DataSource::Synthesis {
            n,
            clip_policy,
            meta,
            correlation,
            repair,
        } => {
            let meta = meta.clone().unwrap_or_else(example::variable_meta);
            let mut r = match correlation {
                CorrelationSource::DerivedExample => example::derived_correlation(),
                CorrelationSource::Matrix(m) => m.clone(),
            };
            if r.rows() != meta.len() {
                return Err(PipelineError::new(
                    Stage::Config,
                    StageError::Config(format!(
                        "correlation is {}x{} but {} variables are declared",
                        r.rows(),
                        r.cols(),
                        meta.len()
                    )),
                ));
            }
            if *repair {
                r = nearest_pd_repair(&r, PD_FLOOR)
                    .map_err(|e| PipelineError::new(Stage::Synthesize, e))?;
            }
            let spec = SynthesisSpec {
                meta,
                target_correlation: r,
                n: *n,
                seed: config.seed,
                clip_policy: *clip_policy,
            };
            synthesize(&spec).map_err(|e| PipelineError::new(Stage::Synthesize, e))
        }
    }
}

fn tag<E: Into<StageError>>(stage: Stage) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::new(stage, e)
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Runs every stage. On failure the returned report holds the completed tables.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput, Box<PipelineFailure>> {
    let mut report = Report::empty(ReportProvenance {
        seed: config.seed,
        config_hash: config.hash(),
    });
    match run_stages(config, &mut report) {
        Ok(out) => Ok(out),
        Err(error) => {
            report.error = Some(ReportError {
                stage: error.stage.to_string(),
                message: error.source.to_string(),
            });
            Err(Box::new(PipelineFailure { error, report }))
        }
    }
}

/// Runs the pipeline on an already-loaded dataset.
pub fn run_pipeline_on(
    config: &PipelineConfig,
    data: Dataset,
) -> Result<PipelineOutput, Box<PipelineFailure>> {
    let mut report = Report::empty(ReportProvenance {
        seed: config.seed,
        config_hash: config.hash(),
    });
    match fit_dataset(config, data, &mut report) {
        Ok(out) => Ok(out),
        Err(error) => {
            report.error = Some(ReportError {
                stage: error.stage.to_string(),
                message: error.source.to_string(),
            });
            Err(Box::new(PipelineFailure { error, report }))
        }
    }
}

fn run_stages(
    config: &PipelineConfig,
    report: &mut Report,
) -> Result<PipelineOutput, PipelineError> {
    config.validate()?;
    let data = load_data(config)?;
    fit_dataset(config, data, report)
}

fn fit_dataset(
    config: &PipelineConfig,
    data: Dataset,
    report: &mut Report,
) -> Result<PipelineOutput, PipelineError> {
    use Stage as S;
    let config_err = |m: String| PipelineError::new(S::Config, StageError::Config(m));

    let names = data.names();
    let y_idx = data
        .index_of(&config.response)
        .map_err(|_| config_err(format!("response {:?} is not a column", config.response)))?;
    let p = data.p();
    if data.n() < p + 2 {
        return Err(PipelineError::new(
            S::Load,
            StatsError::InsufficientObservations {
                n: data.n(),
                terms: p + 2,
            },
        ));
    }
    report.summary = Some(SummaryTable::from_dataset(&data));

    let z = standardize(&data).map_err(tag(S::Standardize))?;
    let r = correlation(&z);

    let pred_idx: Vec<usize> = (0..p).filter(|&j| j != y_idx).collect();
    let pred_names: Vec<String> = pred_idx.iter().map(|&j| names[j].clone()).collect();
    let columns: Vec<Vec<f64>> = (0..p).map(|j| data.column(j)).collect();
    let y = Series::new(&config.response, &columns[y_idx]);
    let x: Vec<Series<'_>> = pred_idx
        .iter()
        .map(|&j| Series::new(&names[j], &columns[j]))
        .collect();

    let full_fit = ols_fit(y, &x, true).map_err(tag(S::FullRegression))?;
    report.full_regression = Some(RegressionTable::from_fit(&full_fit));

    let (step_fit, step_trace) = stepwise_fit(y, &x, config.stepwise).map_err(tag(S::Stepwise))?;
    report.stepwise = Some(StepwiseTable {
        fit: RegressionTable::from_fit(&step_fit),
        trace: step_trace.clone(),
    });

    let r_pred = r.select(&pred_idx);
    let factors = factor_analysis(
        &pred_names,
        &r_pred,
        config.factors.selection,
        config.factors.rotation,
    )
    .map_err(tag(S::Factor))?;
    report.variance_explained = Some(VarianceTable::from_solution(&factors));
    report.rotated_loadings = Some(ComponentTable::new(&pred_names, &factors.loadings_rotated));
    report.score_coefficients = Some(ComponentTable::new(
        &pred_names,
        &factors.score_coefficients,
    ));

    let z_pred = crate::stats::ZMatrix::from_standardized(
        pred_names.clone(),
        Matrix::from_columns(&pred_idx.iter().map(|&j| z.column(j)).collect::<Vec<_>>()),
    );
    let scores =
        factor_scores(&z_pred, &factors.score_coefficients).map_err(tag(S::FactorRegression))?;
    let score_names = component_names(factors.k);
    let score_cols: Vec<Vec<f64>> = (0..factors.k).map(|c| scores.column(c)).collect();
    let fx: Vec<Series<'_>> = score_names
        .iter()
        .zip(&score_cols)
        .map(|(n, c)| Series::new(n, c))
        .collect();
    let factor_fit = ols_fit(y, &fx, true).map_err(tag(S::FactorRegression))?;
    report.factor_regression = Some(RegressionTable::from_fit(&factor_fit));

    let objective = compose_objective(
        &pred_names,
        &factor_fit.coefficients(),
        &factors.score_coefficients,
        factor_fit.intercept_value(),
    )
    .map_err(tag(S::Objective))?;

    let opt = &config.optimization;
    for name in opt.bounds.keys() {
        if !pred_names.contains(name) {
            return Err(config_err(format!(
                "bounds given for unknown predictor {name:?}"
            )));
        }
    }
    let (lower, upper): (Vec<f64>, Vec<f64>) = pred_names
        .iter()
        .map(|n| {
            opt.bounds
                .get(n)
                .map_or((opt.lower, opt.upper), |b| (b.lower, b.upper))
        })
        .unzip();
    let pred_meta: Vec<VariableMeta> = pred_idx.iter().map(|&j| data.meta[j].clone()).collect();
    let linear = opt
        .constraints
        .iter()
        .map(|c| c.to_linear(&pred_meta))
        .collect::<Result<Vec<_>, _>>()
        .map_err(config_err)?;
    let problem = LpProblem {
        objective: objective.clone(),
        lower: lower.clone(),
        upper: upper.clone(),
        linear_constraints: linear,
    };
    let solution = solve_lp(&problem).map_err(tag(S::Optimize))?;
    let alloc = (solution.status == LpStatus::Optimal)
        .then(|| allocation_report(&problem, &solution, &pred_meta));
    report.optimization = Some(OptimizationTable::new(&problem, &solution, alloc.as_ref()));

    let cpdag = pc_pattern(&names, &r, data.n(), &config.causal).map_err(tag(S::Causal))?;
    report.causal = Some(cpdag.to_record());
    let dot = export_dot(&cpdag);

    let bundle = ModelBundle {
        response: config.response.clone(),
        meta: data.meta.clone(),
        n: data.n(),
        correlation: r,
        full_fit,
        stepwise_fit: step_fit,
        stepwise_trace: step_trace,
        factors,
        factor_fit,
        objective,
        lower,
        upper,
        constraints: opt.constraints.clone(),
        solution,
        cpdag,
        provenance: Provenance {
            seed: config.seed,
            config_hash: report.provenance.config_hash.clone(),
            created_unix: timestamp(),
        },
    };
    Ok(PipelineOutput {
        dataset: data,
        bundle,
        report: report.clone(),
        dot,
    })
}
