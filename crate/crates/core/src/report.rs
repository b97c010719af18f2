//! Report tables with full-precision values and rounded display strings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::causal::CpdagRecord;
use crate::data::{mean, sample_sd, Dataset};
use crate::factor::{FactorSolution, SumsOfSquares};
use crate::linalg::Matrix;
use crate::mixopt::{AllocationReport, LpProblem, LpSolution, LpStatus, Sense};
use crate::stats::{RegressionFit, StepwiseTrace, Term};

/// A number plus its rounded rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub value: f64,
    pub display: String,
}

impl Cell {
    pub fn new(value: f64, decimals: usize) -> Self {
        let mut display = format!("{value:.decimals$}");
        if display.starts_with('-') && display[1..].chars().all(|c| c == '0' || c == '.') {
            display.remove(0);
        }
        Cell { value, display }
    }
}

const DECIMALS: usize = 3;
const MONEY_DECIMALS: usize = 2;

fn c3(v: f64) -> Cell {
    Cell::new(v, DECIMALS)
}

fn c2(v: f64) -> Cell {
    Cell::new(v, MONEY_DECIMALS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variable: String,
    pub n: usize,
    pub minimum: Cell,
    pub maximum: Cell,
    pub mean: Cell,
    pub std_deviation: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn from_dataset(data: &Dataset) -> Self {
        let rows = data
            .names()
            .into_iter()
            .enumerate()
            .map(|(j, variable)| {
                let col = data.column(j);
                let (lo, hi) = col
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                SummaryRow {
                    variable,
                    n: col.len(),
                    minimum: c2(lo),
                    maximum: c2(hi),
                    mean: c2(mean(&col)),
                    std_deviation: c2(sample_sd(&col)),
                }
            })
            .collect();
        SummaryTable { rows }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub term: String,
    pub b: Cell,
    pub std_error: Cell,
    #[serde(default)]
    pub beta: Option<Cell>,
    pub t: Cell,
    pub sig: Cell,
}

impl CoefficientRow {
    fn from_term(t: &Term) -> Self {
        CoefficientRow {
            term: t.name.clone(),
            b: c3(t.estimate),
            std_error: c3(t.std_error),
            beta: t.std_beta.map(c3),
            t: c3(t.t_stat),
            sig: c3(t.p_value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTable {
    pub response: String,
    pub n: usize,
    pub r_squared: Cell,
    pub adj_r_squared: Cell,
    pub residual_se: Cell,
    pub rows: Vec<CoefficientRow>,
}

impl RegressionTable {
    pub fn from_fit(fit: &RegressionFit) -> Self {
        RegressionTable {
            response: fit.response.clone(),
            n: fit.n,
            r_squared: c3(fit.r_squared),
            adj_r_squared: c3(fit.adj_r_squared),
            residual_se: c3(fit.residual_se),
            rows: fit.terms().map(CoefficientRow::from_term).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseTable {
    pub fit: RegressionTable,
    pub trace: StepwiseTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumsCells {
    pub total: Cell,
    pub pct_variance: Cell,
    pub cumulative_pct: Cell,
}

impl SumsCells {
    fn new(total: f64, pct: f64, cum: f64) -> Self {
        SumsCells {
            total: c3(total),
            pct_variance: c3(pct),
            cumulative_pct: c3(cum),
        }
    }

    fn from_sums(s: &SumsOfSquares) -> Self {
        Self::new(s.total, s.pct_variance, s.cumulative_pct)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceTableRow {
    pub component: usize,
    pub initial: SumsCells,
    #[serde(default)]
    pub extraction: Option<SumsCells>,
    #[serde(default)]
    pub rotation: Option<SumsCells>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceTable {
    pub retained: usize,
    pub sweeps_used: usize,
    pub rotation_converged: bool,
    pub rows: Vec<VarianceTableRow>,
}

impl VarianceTable {
    pub fn from_solution(sol: &FactorSolution) -> Self {
        VarianceTable {
            retained: sol.k,
            sweeps_used: sol.sweeps_used,
            rotation_converged: sol.rotation_converged,
            rows: sol
                .variance_table
                .iter()
                .map(|r| VarianceTableRow {
                    component: r.component,
                    initial: SumsCells::new(r.eigenvalue, r.pct_variance, r.cumulative_pct),
                    extraction: r.extraction.as_ref().map(SumsCells::from_sums),
                    rotation: r.rotation.as_ref().map(SumsCells::from_sums),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub variable: String,
    pub values: Vec<Cell>,
}

/// Variables × components, used for loadings and score coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentTable {
    pub components: Vec<String>,
    pub rows: Vec<MatrixRow>,
}

impl ComponentTable {
    pub fn new(names: &[String], m: &Matrix) -> Self {
        ComponentTable {
            components: component_names(m.cols()),
            rows: names
                .iter()
                .enumerate()
                .map(|(i, variable)| MatrixRow {
                    variable: variable.clone(),
                    values: m.row(i).iter().map(|&v| c3(v)).collect(),
                })
                .collect(),
        }
    }
}

/// `Factor1`, `Factor2`, … used for factor-score regressors.
pub fn component_names(k: usize) -> Vec<String> {
    (1..=k).map(|c| format!("Factor{c}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRow {
    pub variable: String,
    pub coefficient: Cell,
    pub optimal_z: Cell,
    pub level: Cell,
    pub contribution: Cell,
    pub lower: Cell,
    pub upper: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub label: String,
    pub sense: Sense,
    pub bound: Cell,
    pub activity: Cell,
    pub binding: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTable {
    pub status: LpStatus,
    pub rows: Vec<OptimizationRow>,
    pub constraints: Vec<ConstraintRow>,
    pub objective: Cell,
    pub intercept: Cell,
    pub predicted_volume: Cell,
}

impl OptimizationTable {
    pub fn new(problem: &LpProblem, sol: &LpSolution, alloc: Option<&AllocationReport>) -> Self {
        let rows = match alloc {
            Some(a) => a
                .rows
                .iter()
                .map(|r| OptimizationRow {
                    variable: r.name.clone(),
                    coefficient: c2(r.coefficient),
                    optimal_z: c2(r.z),
                    level: c2(r.level),
                    contribution: c2(r.contribution),
                    lower: c2(r.lower),
                    upper: c2(r.upper),
                })
                .collect(),
            None => Vec::new(),
        };
        let constraints = problem
            .linear_constraints
            .iter()
            .enumerate()
            .map(|(i, c)| ConstraintRow {
                label: c.label.clone(),
                sense: c.sense,
                bound: c2(c.bound),
                activity: c2(sol.constraint_activity.get(i).copied().unwrap_or(0.0)),
                binding: sol.binding_constraints.contains(&c.label),
            })
            .collect();
        let intercept = problem.objective.intercept;
        OptimizationTable {
            status: sol.status,
            rows,
            constraints,
            objective: c2(sol.objective_value),
            intercept: c2(intercept),
            predicted_volume: c2(intercept + sol.objective_value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportError {
    pub stage: String,
    pub message: String,
}

/// Every table the pipeline emits. Stages that did not complete are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: ReportProvenance,
    pub summary: Option<SummaryTable>,
    pub full_regression: Option<RegressionTable>,
    pub stepwise: Option<StepwiseTable>,
    pub variance_explained: Option<VarianceTable>,
    pub rotated_loadings: Option<ComponentTable>,
    pub score_coefficients: Option<ComponentTable>,
    pub factor_regression: Option<RegressionTable>,
    pub optimization: Option<OptimizationTable>,
    pub causal: Option<CpdagRecord>,
    #[serde(default)]
    pub error: Option<ReportError>,
}

impl Report {
    pub fn empty(provenance: ReportProvenance) -> Self {
        Report {
            provenance,
            summary: None,
            full_regression: None,
            stepwise: None,
            variance_explained: None,
            rotated_loadings: None,
            score_coefficients: None,
            factor_regression: None,
            optimization: None,
            causal: None,
            error: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plain-text rendering of every completed table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        if let Some(t) = &self.summary {
            out.push_str(&render_summary(t));
        }
        if let Some(t) = &self.full_regression {
            out.push_str(&render_regression("Full regression", t));
        }
        if let Some(t) = &self.stepwise {
            out.push_str(&render_regression("Stepwise regression", &t.fit));
            for s in &t.trace.steps {
                let _ = writeln!(
                    out,
                    "  {:?} {:<8} p = {:.4}  R² = {:.3}",
                    s.action, s.variable, s.p_value, s.r_squared_after
                );
            }
            out.push('\n');
        }
        if let Some(t) = &self.variance_explained {
            out.push_str(&render_variance(t));
        }
        if let Some(t) = &self.rotated_loadings {
            out.push_str(&render_components("Rotated component matrix", t));
        }
        if let Some(t) = &self.score_coefficients {
            out.push_str(&render_components("Component score coefficients", t));
        }
        if let Some(t) = &self.factor_regression {
            out.push_str(&render_regression("Regression on factor scores", t));
        }
        if let Some(t) = &self.optimization {
            out.push_str(&render_optimization(t));
        }
        if let Some(g) = &self.causal {
            let _ = writeln!(out, "Causal pattern");
            for e in &g.edges {
                let arrow = match e.mark {
                    crate::causal::EdgeMark::Directed => "-->",
                    crate::causal::EdgeMark::Undirected => "---",
                };
                let _ = writeln!(out, "  {} {} {}", e.a, arrow, e.b);
            }
            out.push('\n');
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "FAILED at stage {}: {}", e.stage, e.message);
        }
        out
    }
}

fn render_summary(t: &SummaryTable) -> String {
    let mut out = String::from("Descriptive statistics\n");
    let _ = writeln!(
        out,
        "  {:<8} {:>5} {:>16} {:>16} {:>16} {:>16}",
        "", "N", "Minimum", "Maximum", "Mean", "Std. Dev."
    );
    for r in &t.rows {
        let _ = writeln!(
            out,
            "  {:<8} {:>5} {:>16} {:>16} {:>16} {:>16}",
            r.variable,
            r.n,
            r.minimum.display,
            r.maximum.display,
            r.mean.display,
            r.std_deviation.display
        );
    }
    out.push('\n');
    out
}

fn render_regression(title: &str, t: &RegressionTable) -> String {
    let mut out = format!(
        "{title} (dependent: {}, n = {}, R² = {}, adj. R² = {})\n",
        t.response, t.n, t.r_squared.display, t.adj_r_squared.display
    );
    let _ = writeln!(
        out,
        "  {:<11} {:>16} {:>14} {:>8} {:>9} {:>6}",
        "", "B", "Std. Error", "Beta", "t", "Sig."
    );
    for r in &t.rows {
        let beta = r.beta.as_ref().map_or("", |b| b.display.as_str());
        let _ = writeln!(
            out,
            "  {:<11} {:>16} {:>14} {:>8} {:>9} {:>6}",
            r.term, r.b.display, r.std_error.display, beta, r.t.display, r.sig.display
        );
    }
    out.push('\n');
    out
}

fn render_variance(t: &VarianceTable) -> String {
    let mut out = String::from("Total variance explained\n");
    let _ = writeln!(
        out,
        "  {:>4} | {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8}",
        "", "Initial", "% Var", "Cum. %", "Extract", "% Var", "Cum. %", "Rotate", "% Var", "Cum. %"
    );
    let blank = || format!("{:>8} {:>8} {:>8}", "", "", "");
    let fmt = |s: &SumsCells| {
        format!(
            "{:>8} {:>8} {:>8}",
            s.total.display, s.pct_variance.display, s.cumulative_pct.display
        )
    };
    for r in &t.rows {
        let _ = writeln!(
            out,
            "  {:>4} | {} | {} | {}",
            r.component,
            fmt(&r.initial),
            r.extraction.as_ref().map_or_else(blank, fmt),
            r.rotation.as_ref().map_or_else(blank, fmt),
        );
    }
    let _ = writeln!(
        out,
        "  retained {}, rotation sweeps {}{}\n",
        t.retained,
        t.sweeps_used,
        if t.rotation_converged {
            ""
        } else {
            " (not converged)"
        }
    );
    out
}

fn render_components(title: &str, t: &ComponentTable) -> String {
    let mut out = format!("{title}\n  {:<8}", "");
    for c in &t.components {
        let _ = write!(out, " {c:>9}");
    }
    out.push('\n');
    for r in &t.rows {
        let _ = write!(out, "  {:<8}", r.variable);
        for v in &r.values {
            let _ = write!(out, " {:>9}", v.display);
        }
        out.push('\n');
    }
    out.push('\n');
    out
}

fn render_optimization(t: &OptimizationTable) -> String {
    let mut out = format!("Optimization ({:?})\n", t.status);
    let _ = writeln!(
        out,
        "  {:<8} {:>14} {:>9} {:>14} {:>8} {:>8}",
        "", "Coefficient", "Opt. Z", "Contribution", "Lower", "Upper"
    );
    for r in &t.rows {
        let _ = writeln!(
            out,
            "  {:<8} {:>14} {:>9} {:>14} {:>8} {:>8}",
            r.variable,
            r.coefficient.display,
            r.optimal_z.display,
            r.contribution.display,
            r.lower.display,
            r.upper.display
        );
    }
    let _ = writeln!(
        out,
        "  {:<8} {:>14} {:>9} {:>14}",
        "Objective", "", "", t.objective.display
    );
    for c in &t.constraints {
        let _ = writeln!(
            out,
            "  constraint {}: activity {} vs bound {}{}",
            c.label,
            c.activity.display,
            c.bound.display,
            if c.binding { " (binding)" } else { "" }
        );
    }
    let _ = writeln!(
        out,
        "  intercept {}, predicted volume {}\n",
        t.intercept.display, t.predicted_volume.display
    );
    out
}
