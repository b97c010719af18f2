//! Standardization, correlation, ordinary least squares and stepwise selection.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::data::{mean, sample_sd, Dataset};
use crate::linalg::{cholesky, eigen_sym, Matrix};

/// Sample SDs below this are treated as zero.
pub const CONSTANT_SD_TOL: f64 = 1e-12;
/// Reciprocal-condition guard for the (equilibrated) cross-product matrix.
pub const RCOND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("column {0:?} is constant (sample SD below 1e-12)")]
    ConstantColumn(String),
    #[error("design matrix is rank deficient (reciprocal condition {rcond:.3e})")]
    RankDeficient { rcond: f64 },
    #[error("need more observations than terms: n = {n}, terms = {terms}")]
    InsufficientObservations { n: usize, terms: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("stepwise thresholds require p_enter < p_remove (got {p_enter} and {p_remove})")]
    InvalidThresholds { p_enter: f64, p_remove: f64 },
}

/// Column-standardized observations: every column has sample mean 0 and sample SD 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ZMatrix {
    names: Vec<String>,
    values: Matrix,
}

impl ZMatrix {
    /// Wraps an already-standardized matrix. No checks are made.
    pub fn from_standardized(names: Vec<String>, values: Matrix) -> Self {
        ZMatrix { names, values }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &Matrix {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn p(&self) -> usize {
        self.values.cols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j)
    }
}

/// Standardizes every column with its own sample mean and SD (n − 1 denominator).
pub fn standardize(data: &Dataset) -> Result<ZMatrix, StatsError> {
    let n = data.n();
    let mut columns = Vec::with_capacity(data.p());
    for (j, meta) in data.meta.iter().enumerate() {
        let col = data.column(j);
        let m = mean(&col);
        let sd = if n > 1 { sample_sd(&col) } else { 0.0 };
        if !(sd >= CONSTANT_SD_TOL) {
            return Err(StatsError::ConstantColumn(meta.name.clone()));
        }
        columns.push(col.iter().map(|x| (x - m) / sd).collect::<Vec<_>>());
    }
    Ok(ZMatrix {
        names: data.names(),
        values: Matrix::from_columns(&columns),
    })
}

/// Correlation matrix `ZᵀZ / (n − 1)` with an exact unit diagonal.
pub fn correlation(z: &ZMatrix) -> Matrix {
    let n = z.n() as f64;
    let mut r = z.values.gram();
    let p = r.rows();
    for i in 0..p {
        for j in 0..p {
            r[(i, j)] = if i == j {
                1.0
            } else {
                (r[(i, j)] / (n - 1.0)).clamp(-1.0, 1.0)
            };
        }
    }
    r
}

/// Two-sided Student-t tail probability `2·P(T_df > |t|)`.
pub fn student_t_two_sided_p(t: f64, df: u64) -> f64 {
    assert!(df >= 1, "degrees of freedom must be positive");
    if t.is_nan() {
        return f64::NAN;
    }
    if t == 0.0 {
        return 1.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("valid t distribution");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// A named view of one data column.
#[derive(Debug, Clone, Copy)]
pub struct Series<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
}

impl<'a> Series<'a> {
    pub fn new(name: &'a str, values: &'a [f64]) -> Self {
        Series { name, values }
    }
}

/// One row of a coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    /// Standardized coefficient; absent for the intercept.
    pub std_beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub response: String,
    pub n: usize,
    pub df_residual: usize,
    pub intercept: Option<Term>,
    pub predictors: Vec<Term>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub residual_se: f64,
}

impl RegressionFit {
    pub fn intercept_value(&self) -> f64 {
        self.intercept.as_ref().map_or(0.0, |t| t.estimate)
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.predictors.iter().map(|t| t.estimate).collect()
    }

    pub fn predictor_names(&self) -> Vec<String> {
        self.predictors.iter().map(|t| t.name.clone()).collect()
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.predictors.iter().find(|t| t.name == name)
    }

    /// Every term, intercept first.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.intercept.iter().chain(self.predictors.iter())
    }

    pub fn predict(&self, x: &[Series<'_>], i: usize) -> f64 {
        self.intercept_value()
            + self
                .predictors
                .iter()
                .zip(x)
                .map(|(t, s)| t.estimate * s.values[i])
                .sum::<f64>()
    }

    pub fn residuals(&self, y: &[f64], x: &[Series<'_>]) -> Vec<f64> {
        (0..y.len()).map(|i| y[i] - self.predict(x, i)).collect()
    }
}

/// Ordinary least squares via an equilibrated Cholesky solve of the normal equations.
///
/// p-values are two-sided Student-t with `n − terms` degrees of freedom.
pub fn ols_fit(
    y: Series<'_>,
    x: &[Series<'_>],
    include_intercept: bool,
) -> Result<RegressionFit, StatsError> {
    let n = y.values.len();
    if let Some(bad) = x.iter().find(|s| s.values.len() != n) {
        return Err(StatsError::DimensionMismatch(format!(
            "predictor {} has {} rows, response has {n}",
            bad.name,
            bad.values.len()
        )));
    }
    let offset = usize::from(include_intercept);
    let terms = x.len() + offset;
    if terms == 0 || n <= terms {
        return Err(StatsError::InsufficientObservations { n, terms });
    }

    let design = Matrix::from_fn(n, terms, |i, j| {
        if include_intercept && j == 0 {
            1.0
        } else {
            x[j - offset].values[i]
        }
    });
    let xtx = design.gram();
    let xty: Vec<f64> = (0..terms)
        .map(|j| (0..n).map(|i| design[(i, j)] * y.values[i]).sum())
        .collect();

    // Equilibrate so the conditioning guard is insensitive to column units.
    let scale: Vec<f64> = (0..terms)
        .map(|j| {
            let d = xtx[(j, j)];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    if scale.contains(&0.0) {
        return Err(StatsError::RankDeficient { rcond: 0.0 });
    }
    let scaled = Matrix::from_fn(terms, terms, |i, j| xtx[(i, j)] * scale[i] * scale[j]);
    let eig = eigen_sym(&scaled).map_err(|_| StatsError::RankDeficient { rcond: 0.0 })?;
    let rcond = eig.values[terms - 1] / eig.values[0];
    if !(rcond >= RCOND_TOL) {
        return Err(StatsError::RankDeficient { rcond });
    }
    let chol = cholesky(&scaled).map_err(|_| StatsError::RankDeficient { rcond })?;
    let rhs: Vec<f64> = xty.iter().zip(&scale).map(|(v, s)| v * s).collect();
    let beta: Vec<f64> = chol
        .solve(&rhs)
        .iter()
        .zip(&scale)
        .map(|(b, s)| b * s)
        .collect();
    let scaled_inv = chol.inverse();

    let fitted = design.matvec(&beta).expect("design width matches");
    let sse: f64 = y
        .values
        .iter()
        .zip(&fitted)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let y_mean = mean(y.values);
    let sst: f64 = if include_intercept {
        y.values.iter().map(|v| (v - y_mean) * (v - y_mean)).sum()
    } else {
        y.values.iter().map(|v| v * v).sum()
    };
    let df = n - terms;
    let sigma2 = sse / df as f64;
    let r_squared = if sst > 0.0 {
        (1.0 - sse / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let denom_df = if include_intercept { n - 1 } else { n } as f64;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * denom_df / df as f64;

    let y_sd = sample_sd(y.values);
    let make_term = |j: usize, name: &str, std_beta: Option<f64>| {
        let var = sigma2 * scaled_inv[(j, j)] * scale[j] * scale[j];
        let se = var.max(0.0).sqrt();
        let estimate = beta[j];
        let t_stat = if se > 0.0 {
            estimate / se
        } else if estimate == 0.0 {
            0.0
        } else {
            estimate.signum() * f64::INFINITY
        };
        Term {
            name: name.to_string(),
            estimate,
            std_error: se,
            t_stat,
            p_value: student_t_two_sided_p(t_stat, df as u64),
            std_beta,
        }
    };

    let intercept = include_intercept.then(|| make_term(0, "(Constant)", None));
    let predictors = x
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let j = k + offset;
            let std_beta = beta[j] * sample_sd(s.values) / y_sd;
            make_term(j, s.name, Some(std_beta))
        })
        .collect();

    Ok(RegressionFit {
        response: y.name.to_string(),
        n,
        df_residual: df,
        intercept,
        predictors,
        r_squared,
        adj_r_squared,
        residual_se: sigma2.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepAction {
    Enter,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub action: StepAction,
    pub variable: String,
    pub p_value: f64,
    pub r_squared_after: f64,
}

/// Audit trail of a stepwise selection.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepwiseTrace {
    pub steps: Vec<Step>,
}

impl StepwiseTrace {
    /// Variables entered and not subsequently removed, in entry order.
    pub fn selected(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.steps {
            match s.action {
                StepAction::Enter => out.push(s.variable.clone()),
                StepAction::Remove => out.retain(|v| v != &s.variable),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepwiseThresholds {
    pub p_enter: f64,
    pub p_remove: f64,
}

impl Default for StepwiseThresholds {
    fn default() -> Self {
        StepwiseThresholds {
            p_enter: 0.05,
            p_remove: 0.10,
        }
    }
}

/// Bidirectional stepwise selection on p-values.
///
/// Each round enters the best candidate below `p_enter` (ties go to the
/// earlier column), then removes included predictors above `p_remove`, worst
/// first, one refit at a time. The returned fit lists predictors in column
/// order. Stops after at most `2·p·(p+1)` actions.
pub fn stepwise_fit(
    y: Series<'_>,
    x: &[Series<'_>],
    thresholds: StepwiseThresholds,
) -> Result<(RegressionFit, StepwiseTrace), StatsError> {
    let StepwiseThresholds { p_enter, p_remove } = thresholds;
    if !(p_enter < p_remove) {
        return Err(StatsError::InvalidThresholds { p_enter, p_remove });
    }
    let p = x.len();
    let max_actions = 2 * p * (p + 1);
    let mut included = vec![false; p];
    let mut trace = StepwiseTrace::default();

    let fit_set = |included: &[bool]| -> Result<(RegressionFit, Vec<usize>), StatsError> {
        let idx: Vec<usize> = (0..p).filter(|&j| included[j]).collect();
        let cols: Vec<Series<'_>> = idx.iter().map(|&j| x[j]).collect();
        ols_fit(y, &cols, true).map(|f| (f, idx))
    };

    while trace.steps.len() < max_actions {
        let mut acted = false;

        let mut best: Option<(usize, f64, f64)> = None;
        for j in (0..p).filter(|&j| !included[j]) {
            let mut trial = included.clone();
            trial[j] = true;
            let (fit, idx) = match fit_set(&trial) {
                Ok(f) => f,
                Err(
                    StatsError::RankDeficient { .. } | StatsError::InsufficientObservations { .. },
                ) => continue,
                Err(e) => return Err(e),
            };
            let pos = idx.iter().position(|&k| k == j).expect("candidate in fit");
            let pv = fit.predictors[pos].p_value;
            if best.is_none_or(|(_, b, _)| pv < b) {
                best = Some((j, pv, fit.r_squared));
            }
        }
        if let Some((j, pv, r2)) = best.filter(|&(_, pv, _)| pv < p_enter) {
            included[j] = true;
            trace.steps.push(Step {
                action: StepAction::Enter,
                variable: x[j].name.to_string(),
                p_value: pv,
                r_squared_after: r2,
            });
            acted = true;
        }

        while trace.steps.len() < max_actions {
            let (fit, idx) = fit_set(&included)?;
            let worst = fit
                .predictors
                .iter()
                .zip(&idx)
                .filter(|(t, _)| t.p_value > p_remove)
                .fold(None::<(&Term, usize)>, |acc, (t, &j)| match acc {
                    Some((a, _)) if a.p_value >= t.p_value => acc,
                    _ => Some((t, j)),
                });
            let Some((term, j)) = worst else { break };
            let pv = term.p_value;
            included[j] = false;
            let r2 = fit_set(&included)?.0.r_squared;
            trace.steps.push(Step {
                action: StepAction::Remove,
                variable: x[j].name.to_string(),
                p_value: pv,
                r_squared_after: r2,
            });
            acted = true;
        }

        if !acted {
            break;
        }
    }

    let (fit, _) = fit_set(&included)?;
    Ok((fit, trace))
}
