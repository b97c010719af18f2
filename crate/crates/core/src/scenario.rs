//! What-if allocation scenarios against a fixed objective.
//!
//! This is the request/response logic behind `POST /api/v1/optimize`; the
//! HTTP layer and the browser demo only translate to and from JSON.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::VariableMeta;
use crate::example;
use crate::mixopt::{
    allocation_report, solve_lp, AllocationReport, LinearConstraint, LpError, LpProblem,
    LpSolution, LpStatus, ObjectiveSpec, Sense,
};

/// A constraint stated by variable name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintConfig {
    /// `Σ w_j z_j {sense} bound` in Z-score units; weights default to 1.
    ZSum {
        label: String,
        sense: Sense,
        bound: f64,
        #[serde(default)]
        weights: Option<BTreeMap<String, f64>>,
    },
    /// `Σ cost_j · level_j {sense} bound` in natural units, with
    /// `level_j = mean_j + z_j·sd_j`. Variables without a cost are free.
    NaturalBudget {
        label: String,
        sense: Sense,
        bound: f64,
        unit_costs: BTreeMap<String, f64>,
    },
}

impl ConstraintConfig {
    pub fn z_sum(label: &str, sense: Sense, bound: f64) -> Self {
        ConstraintConfig::ZSum {
            label: label.to_string(),
            sense,
            bound,
            weights: None,
        }
    }

    /// Resolves names against `meta` into Z-score weights.
    pub fn to_linear(&self, meta: &[VariableMeta]) -> Result<LinearConstraint, String> {
        let index = |name: &str| {
            meta.iter()
                .position(|m| m.name == name)
                .ok_or_else(|| format!("unknown variable {name:?} in constraint"))
        };
        match self {
            ConstraintConfig::ZSum {
                label,
                sense,
                bound,
                weights,
            } => {
                let w = match weights {
                    None => vec![1.0; meta.len()],
                    Some(map) => {
                        let mut w = vec![0.0; meta.len()];
                        for (name, v) in map {
                            w[index(name)?] = *v;
                        }
                        w
                    }
                };
                Ok(LinearConstraint {
                    label: label.clone(),
                    weights: w,
                    sense: *sense,
                    bound: *bound,
                })
            }
            ConstraintConfig::NaturalBudget {
                label,
                sense,
                bound,
                unit_costs,
            } => {
                let mut w = vec![0.0; meta.len()];
                let mut fixed = 0.0;
                for (name, cost) in unit_costs {
                    let j = index(name)?;
                    w[j] = cost * meta[j].sd;
                    fixed += cost * meta[j].mean;
                }
                Ok(LinearConstraint {
                    label: label.clone(),
                    weights: w,
                    sense: *sense,
                    bound: bound - fixed,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("malformed scenario: {0}")]
    Malformed(String),
    #[error("variable {variable}: lower bound {lower} exceeds upper bound {upper}")]
    InfeasibleBounds {
        variable: String,
        lower: f64,
        upper: f64,
    },
    #[error("no allocation satisfies the bounds and constraints")]
    Infeasible,
    #[error("objective is unbounded under the given bounds")]
    Unbounded,
    #[error(transparent)]
    Solver(LpError),
}

impl ScenarioError {
    /// HTTP status: 400 for malformed input, 422 for unsolvable scenarios.
    pub fn http_status(&self) -> u16 {
        match self {
            ScenarioError::Malformed(_) => 400,
            ScenarioError::Solver(_) => 500,
            _ => 422,
        }
    }

    pub fn body(&self) -> ErrorBody {
        let (status, reason, variable) = match self {
            ScenarioError::Malformed(_) => ("malformed", "Malformed", None),
            ScenarioError::InfeasibleBounds { variable, .. } => {
                ("infeasible", "InfeasibleBounds", Some(variable.clone()))
            }
            ScenarioError::Infeasible => ("infeasible", "Infeasible", None),
            ScenarioError::Unbounded => ("unbounded", "Unbounded", None),
            ScenarioError::Solver(_) => ("error", "SolverFailure", None),
        };
        ErrorBody {
            status: status.to_string(),
            reason: reason.to_string(),
            variable,
            message: self.to_string(),
        }
    }
}

/// Machine-readable error payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub status: String,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub variable: Option<String>,
    pub message: String,
}

/// Per-variable overrides plus an optional replacement constraint list.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRequest {
    #[serde(default)]
    pub lower: BTreeMap<String, f64>,
    #[serde(default)]
    pub upper: BTreeMap<String, f64>,
    /// `None` keeps the model's default constraints; `Some([])` drops them.
    #[serde(default)]
    pub constraints: Option<Vec<ConstraintConfig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResponse {
    pub status: LpStatus,
    pub solution: LpSolution,
    pub allocation: AllocationReport,
    pub predicted_volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableView {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub coefficient: f64,
}

/// Payload of `GET /api/v1/model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelView {
    pub response: String,
    pub intercept: f64,
    pub variables: Vec<VariableView>,
    pub default_lower: Vec<f64>,
    pub default_upper: Vec<f64>,
    pub default_constraints: Vec<ConstraintConfig>,
}

/// An objective with its metadata and default scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioModel {
    pub response: String,
    /// Metadata aligned with `objective.names`.
    pub meta: Vec<VariableMeta>,
    pub objective: ObjectiveSpec,
    pub default_lower: Vec<f64>,
    pub default_upper: Vec<f64>,
    pub default_constraints: Vec<ConstraintConfig>,
}

impl ScenarioModel {
    pub fn new(
        response: &str,
        meta: Vec<VariableMeta>,
        objective: ObjectiveSpec,
        default_lower: Vec<f64>,
        default_upper: Vec<f64>,
        default_constraints: Vec<ConstraintConfig>,
    ) -> Result<Self, ScenarioError> {
        let p = objective.len();
        if meta.len() != p || default_lower.len() != p || default_upper.len() != p {
            return Err(ScenarioError::Malformed(
                "metadata, bounds and objective must align".into(),
            ));
        }
        if meta.iter().zip(&objective.names).any(|(m, n)| &m.name != n) {
            return Err(ScenarioError::Malformed(
                "metadata order differs from objective".into(),
            ));
        }
        Ok(ScenarioModel {
            response: response.to_string(),
            meta,
            objective,
            default_lower,
            default_upper,
            default_constraints,
        })
    }

    /// The published eleven-channel objective with bounds [−2, 4] and Σz ≤ 30.
    pub fn published_example() -> Self {
        let meta = example::predictor_meta();
        let objective = ObjectiveSpec {
            names: meta.iter().map(|m| m.name.clone()).collect(),
            coefficients: example::OBJECTIVE_COEFFICIENTS.to_vec(),
            intercept: example::FACTOR_INTERCEPT,
        };
        let p = meta.len();
        ScenarioModel::new(
            example::RESPONSE,
            meta,
            objective,
            vec![example::Z_LOWER; p],
            vec![example::Z_UPPER; p],
            vec![ConstraintConfig::z_sum(
                "sum_z",
                Sense::Le,
                example::Z_SUM_LIMIT,
            )],
        )
        .expect("aligned example")
    }

    pub fn view(&self) -> ModelView {
        ModelView {
            response: self.response.clone(),
            intercept: self.objective.intercept,
            variables: self
                .meta
                .iter()
                .zip(&self.objective.coefficients)
                .map(|(m, &c)| VariableView {
                    name: m.name.clone(),
                    mean: m.mean,
                    sd: m.sd,
                    min: m.min,
                    max: m.max,
                    coefficient: c,
                })
                .collect(),
            default_lower: self.default_lower.clone(),
            default_upper: self.default_upper.clone(),
            default_constraints: self.default_constraints.clone(),
        }
    }

    pub fn default_problem(&self) -> Result<LpProblem, ScenarioError> {
        self.build_problem(&ScenarioRequest::default())
    }

    pub fn build_problem(&self, req: &ScenarioRequest) -> Result<LpProblem, ScenarioError> {
        let names = &self.objective.names;
        let mut lower = self.default_lower.clone();
        let mut upper = self.default_upper.clone();
        for (map, target) in [(&req.lower, &mut lower), (&req.upper, &mut upper)] {
            for (name, &v) in map {
                let j = names.iter().position(|n| n == name).ok_or_else(|| {
                    ScenarioError::Malformed(format!("unknown variable {name:?}"))
                })?;
                if !v.is_finite() {
                    return Err(ScenarioError::Malformed(format!(
                        "bound for {name} must be finite"
                    )));
                }
                target[j] = v;
            }
        }
        for j in 0..names.len() {
            if lower[j] > upper[j] {
                return Err(ScenarioError::InfeasibleBounds {
                    variable: names[j].clone(),
                    lower: lower[j],
                    upper: upper[j],
                });
            }
        }
        let constraints = req
            .constraints
            .as_ref()
            .unwrap_or(&self.default_constraints)
            .iter()
            .map(|c| c.to_linear(&self.meta))
            .collect::<Result<Vec<_>, _>>()
            .map_err(ScenarioError::Malformed)?;
        Ok(LpProblem {
            objective: self.objective.clone(),
            lower,
            upper,
            linear_constraints: constraints,
        })
    }

    pub fn optimize(&self, req: &ScenarioRequest) -> Result<ScenarioResponse, ScenarioError> {
        let problem = self.build_problem(req)?;
        let solution = solve_lp(&problem).map_err(|e| match e {
            LpError::InfeasibleBounds {
                variable,
                lower,
                upper,
            } => ScenarioError::InfeasibleBounds {
                variable,
                lower,
                upper,
            },
            other => ScenarioError::Solver(other),
        })?;
        match solution.status {
            LpStatus::Infeasible => return Err(ScenarioError::Infeasible),
            LpStatus::Unbounded => return Err(ScenarioError::Unbounded),
            LpStatus::Optimal => {}
        }
        let allocation = allocation_report(&problem, &solution, &self.meta);
        Ok(ScenarioResponse {
            status: solution.status,
            predicted_volume: allocation.predicted_volume,
            allocation,
            solution,
        })
    }
}
