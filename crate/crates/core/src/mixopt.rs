//! Z-score objective composition, bounded linear programming and
//! contribution decomposition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::VariableMeta;
use crate::linalg::Matrix;

/// Absolute feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-9;
/// Reduced-cost tolerance, scaled by `max(1, max|c|)`.
pub const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("variable {variable}: lower bound {lower} exceeds upper bound {upper}")]
    InfeasibleBounds {
        variable: String,
        lower: f64,
        upper: f64,
    },
    #[error("variable {0}: lower bound must be finite")]
    UnboundedBelow(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("simplex exceeded {0} iterations")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub names: Vec<String>,
    /// Objective units per Z-score unit, one per promotional variable.
    pub coefficients: Vec<f64>,
    /// Baseline volume at z = 0.
    pub intercept: f64,
}

impl ObjectiveSpec {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn evaluate(&self, z: &[f64]) -> f64 {
        self.coefficients.iter().zip(z).map(|(c, z)| c * z).sum()
    }
}

/// `coefficient_j = Σ_k beta_k · W_jk`.
pub fn compose_objective(
    names: &[String],
    betas: &[f64],
    w: &Matrix,
    intercept: f64,
) -> Result<ObjectiveSpec, LpError> {
    if betas.len() != w.cols() {
        return Err(LpError::DimensionMismatch(format!(
            "{} betas for {} factor columns",
            betas.len(),
            w.cols()
        )));
    }
    if names.len() != w.rows() {
        return Err(LpError::DimensionMismatch(format!(
            "{} names for {} coefficient rows",
            names.len(),
            w.rows()
        )));
    }
    let coefficients = (0..w.rows())
        .map(|j| w.row(j).iter().zip(betas).map(|(w, b)| w * b).sum())
        .collect();
    Ok(ObjectiveSpec {
        names: names.to_vec(),
        coefficients,
        intercept,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub label: String,
    pub weights: Vec<f64>,
    pub sense: Sense,
    pub bound: f64,
}

impl LinearConstraint {
    /// `Σ z_j {sense} bound`.
    pub fn sum(label: impl Into<String>, p: usize, sense: Sense, bound: f64) -> Self {
        LinearConstraint {
            label: label.into(),
            weights: vec![1.0; p],
            sense,
            bound,
        }
    }

    pub fn activity(&self, z: &[f64]) -> f64 {
        self.weights.iter().zip(z).map(|(w, z)| w * z).sum()
    }

    pub fn is_satisfied(&self, z: &[f64], tol: f64) -> bool {
        let a = self.activity(z);
        match self.sense {
            Sense::Le => a <= self.bound + tol,
            Sense::Ge => a >= self.bound - tol,
            Sense::Eq => (a - self.bound).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: ObjectiveSpec,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub linear_constraints: Vec<LinearConstraint>,
}

impl LpProblem {
    /// Uniform box bounds and no linear constraints.
    pub fn boxed(objective: ObjectiveSpec, lower: f64, upper: f64) -> Self {
        let p = objective.len();
        LpProblem {
            objective,
            lower: vec![lower; p],
            upper: vec![upper; p],
            linear_constraints: Vec::new(),
        }
    }

    pub fn with_constraint(mut self, c: LinearConstraint) -> Self {
        self.linear_constraints.push(c);
        self
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let p = self.objective.len();
        if self.objective.names.len() != p || self.lower.len() != p || self.upper.len() != p {
            return Err(LpError::DimensionMismatch(format!(
                "{p} coefficients, {} names, {} lower and {} upper bounds",
                self.objective.names.len(),
                self.lower.len(),
                self.upper.len()
            )));
        }
        for c in &self.linear_constraints {
            if c.weights.len() != p {
                return Err(LpError::DimensionMismatch(format!(
                    "constraint {} has {} weights for {p} variables",
                    c.label,
                    c.weights.len()
                )));
            }
        }
        for j in 0..p {
            let name = &self.objective.names[j];
            if !self.lower[j].is_finite() {
                return Err(LpError::UnboundedBelow(name.clone()));
            }
            if self.lower[j] > self.upper[j] {
                return Err(LpError::InfeasibleBounds {
                    variable: name.clone(),
                    lower: self.lower[j],
                    upper: self.upper[j],
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundState {
    AtLower,
    AtUpper,
    /// Lower and upper coincide.
    Fixed,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub names: Vec<String>,
    pub z_star: Vec<f64>,
    pub objective_value: f64,
    pub contributions: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub bound_states: Vec<BoundState>,
    pub constraint_activity: Vec<f64>,
    pub binding_constraints: Vec<String>,
    pub iterations: usize,
}

impl LpSolution {
    fn without_point(status: LpStatus, names: Vec<String>, iterations: usize) -> Self {
        LpSolution {
            status,
            names,
            z_star: Vec::new(),
            objective_value: 0.0,
            contributions: Vec::new(),
            reduced_costs: Vec::new(),
            bound_states: Vec::new(),
            constraint_activity: Vec::new(),
            binding_constraints: Vec::new(),
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Dense bounded-variable tableau. Every column has lower bound 0.
struct Tableau {
    t: Matrix,
    values: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    blocked: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn is_basic(&self, j: usize) -> Option<usize> {
        self.basis.iter().position(|&b| b == j)
    }

    fn value_of(&self, j: usize) -> f64 {
        match self.is_basic(j) {
            Some(r) => self.values[r],
            None if self.at_upper[j] => self.upper[j],
            None => 0.0,
        }
    }

    fn reduced_costs(&self, c: &[f64]) -> Vec<f64> {
        let n = self.t.cols();
        (0..n)
            .map(|j| {
                c[j] - self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| c[b] * self.t[(i, j)])
                    .sum::<f64>()
            })
            .collect()
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let n = self.t.cols();
        let piv = self.t[(r, j)];
        for k in 0..n {
            self.t[(r, k)] /= piv;
        }
        for i in 0..self.t.rows() {
            if i == r {
                continue;
            }
            let f = self.t[(i, j)];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                let v = self.t[(r, k)];
                self.t[(i, k)] -= f * v;
            }
            self.t[(i, j)] = 0.0;
        }
        self.basis[r] = j;
    }

    /// Primal simplex maximizing `c·x` with Bland's rule on both choices.
    fn optimize(&mut self, c: &[f64], tol: f64) -> Result<Outcome, LpError> {
        let m = self.t.rows();
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit(self.max_iterations));
            }
            let d = self.reduced_costs(c);
            let entering = (0..self.t.cols()).find(|&j| {
                !self.blocked[j]
                    && self.is_basic(j).is_none()
                    && self.upper[j] > 0.0
                    && ((!self.at_upper[j] && d[j] > tol) || (self.at_upper[j] && d[j] < -tol))
            });
            let Some(j) = entering else {
                return Ok(Outcome::Optimal);
            };
            self.iterations += 1;
            let delta = if self.at_upper[j] { -1.0 } else { 1.0 };

            // (step, leaving row or None for a bound flip, leaves at upper)
            let mut best: Option<(f64, Option<usize>, bool)> = None;
            let mut consider = |step: f64, row: Option<usize>, to_upper: bool, key: usize| {
                let better = match best {
                    None => true,
                    Some((s, r, _)) => {
                        let cur_key = r.map_or(j, |r| self.basis[r]);
                        step < s - 1e-12 * s.abs().max(1.0)
                            || (step <= s + 1e-12 * s.abs().max(1.0) && key < cur_key)
                    }
                };
                if better {
                    best = Some((step, row, to_upper));
                }
            };
            if self.upper[j].is_finite() {
                consider(self.upper[j], None, false, j);
            }
            for i in 0..m {
                let alpha = delta * self.t[(i, j)];
                let b = self.basis[i];
                if alpha > PIVOT_TOL {
                    consider((self.values[i] / alpha).max(0.0), Some(i), false, b);
                } else if alpha < -PIVOT_TOL && self.upper[b].is_finite() {
                    consider(
                        ((self.upper[b] - self.values[i]) / -alpha).max(0.0),
                        Some(i),
                        true,
                        b,
                    );
                }
            }
            let Some((step, row, to_upper)) = best else {
                return Ok(Outcome::Unbounded);
            };

            let start = if self.at_upper[j] { self.upper[j] } else { 0.0 };
            for i in 0..m {
                self.values[i] -= delta * self.t[(i, j)] * step;
            }
            match row {
                None => self.at_upper[j] = !self.at_upper[j],
                Some(r) => {
                    let leaving = self.basis[r];
                    self.at_upper[leaving] = to_upper;
                    self.at_upper[j] = false;
                    self.pivot(r, j);
                    self.values[r] = start + delta * step;
                }
            }
            for i in 0..m {
                let u = self.upper[self.basis[i]];
                self.values[i] = self.values[i].clamp(0.0, u);
            }
        }
    }
}

/// Maximizes `Σ c_j z_j` over box bounds and linear constraints.
///
/// Bounded-variable primal simplex with a phase-one artificial start and
/// Bland's smallest-index rule for entering and leaving variables.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution, LpError> {
    problem.validate()?;
    let p = problem.objective.len();
    let names = problem.objective.names.clone();
    let cons = &problem.linear_constraints;
    let m = cons.len();

    // Column layout: shifted structurals, one slack per inequality, one artificial per row.
    let n_slack = cons.iter().filter(|c| c.sense != Sense::Eq).count();
    let n = p + n_slack + m;
    let mut t = Matrix::zeros(m, n);
    let mut rhs = vec![0.0; m];
    let mut basis = vec![0; m];
    let mut upper = vec![f64::INFINITY; n];
    for j in 0..p {
        upper[j] = problem.upper[j] - problem.lower[j];
    }
    let mut slack = p;
    let mut artificials = Vec::new();
    for (i, c) in cons.iter().enumerate() {
        let shift: f64 = c
            .weights
            .iter()
            .zip(&problem.lower)
            .map(|(w, l)| w * l)
            .sum();
        let b = c.bound - shift;
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..p {
            t[(i, j)] = sign * c.weights[j];
        }
        rhs[i] = sign * b;
        let slack_col = match c.sense {
            Sense::Le => Some((slack, sign)),
            Sense::Ge => Some((slack, -sign)),
            Sense::Eq => None,
        };
        if let Some((col, coef)) = slack_col {
            t[(i, col)] = coef;
            slack += 1;
        }
        let art = p + n_slack + i;
        t[(i, art)] = 1.0;
        match slack_col {
            Some((col, coef)) if coef > 0.0 => {
                basis[i] = col;
                upper[art] = 0.0;
            }
            _ => {
                basis[i] = art;
                artificials.push(art);
            }
        }
    }
    // The starting basis is made of unit columns, so the tableau is already B⁻¹A.
    debug_assert!(basis.iter().enumerate().all(|(i, &b)| t[(i, b)] == 1.0));

    let mut blocked = vec![false; n];
    for i in 0..m {
        let art = p + n_slack + i;
        if !artificials.contains(&art) {
            blocked[art] = true;
        }
    }
    let mut tab = Tableau {
        t,
        values: rhs,
        basis,
        upper,
        at_upper: vec![false; n],
        blocked,
        iterations: 0,
        max_iterations: 50 * (n + m + 10),
    };

    if !artificials.is_empty() {
        let mut phase1 = vec![0.0; n];
        for &a in &artificials {
            phase1[a] = -1.0;
        }
        tab.optimize(&phase1, COST_TOL)?;
        let infeas: f64 = artificials.iter().map(|&a| tab.value_of(a)).sum();
        let scale = 1.0 + cons.iter().map(|c| c.bound.abs()).fold(0.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return Ok(LpSolution::without_point(
                LpStatus::Infeasible,
                names,
                tab.iterations,
            ));
        }
        for &a in &artificials {
            tab.upper[a] = 0.0;
            tab.blocked[a] = true;
            if let Some(r) = tab.is_basic(a) {
                let swap = (0..n)
                    .filter(|&j| !tab.blocked[j] && tab.is_basic(j).is_none())
                    .find(|&j| tab.t[(r, j)].abs() > 1e-9);
                if let Some(j) = swap {
                    let v = tab.value_of(j);
                    tab.at_upper[j] = false;
                    tab.pivot(r, j);
                    tab.values[r] = v;
                }
            }
        }
    }

    let cmax = problem
        .objective
        .coefficients
        .iter()
        .fold(1.0f64, |m, c| m.max(c.abs()));
    let mut costs = vec![0.0; n];
    costs[..p].copy_from_slice(&problem.objective.coefficients);
    if let Outcome::Unbounded = tab.optimize(&costs, COST_TOL * cmax)? {
        return Ok(LpSolution::without_point(
            LpStatus::Unbounded,
            names,
            tab.iterations,
        ));
    }

    let d = tab.reduced_costs(&costs);
    let mut z = Vec::with_capacity(p);
    let mut states = Vec::with_capacity(p);
    for j in 0..p {
        let (lo, hi) = (problem.lower[j], problem.upper[j]);
        let mut v = lo + tab.value_of(j);
        let snap = FEAS_TOL * v.abs().max(1.0);
        let state = if lo == hi {
            v = lo;
            BoundState::Fixed
        } else if (v - lo).abs() <= snap {
            v = lo;
            BoundState::AtLower
        } else if (v - hi).abs() <= snap {
            v = hi;
            BoundState::AtUpper
        } else {
            BoundState::Interior
        };
        z.push(v);
        states.push(state);
    }
    let contributions: Vec<f64> = problem
        .objective
        .coefficients
        .iter()
        .zip(&z)
        .map(|(c, z)| c * z)
        .collect();
    let activity: Vec<f64> = cons.iter().map(|c| c.activity(&z)).collect();
    let binding = cons
        .iter()
        .zip(&activity)
        .filter(|(c, a)| (*a - c.bound).abs() <= FEAS_TOL * c.bound.abs().max(1.0))
        .map(|(c, _)| c.label.clone())
        .collect();

    Ok(LpSolution {
        status: LpStatus::Optimal,
        names,
        objective_value: contributions.iter().sum(),
        contributions,
        z_star: z,
        reduced_costs: d[..p].to_vec(),
        bound_states: states,
        constraint_activity: activity,
        binding_constraints: binding,
        iterations: tab.iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationRow {
    pub name: String,
    pub coefficient: f64,
    pub z: f64,
    /// `mean + z·sd` in natural units.
    pub level: f64,
    pub contribution: f64,
    /// Fraction of the objective value.
    pub share: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationReport {
    pub rows: Vec<AllocationRow>,
    pub objective_value: f64,
    pub intercept: f64,
    pub predicted_volume: f64,
}

/// Natural-unit levels and contribution decomposition of an optimal solution.
///
/// Variables without matching metadata get `level = z`.
pub fn allocation_report(
    problem: &LpProblem,
    solution: &LpSolution,
    meta: &[VariableMeta],
) -> AllocationReport {
    let obj = solution.objective_value;
    let rows = solution
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let z = solution.z_star.get(j).copied().unwrap_or(0.0);
            let contribution = solution.contributions.get(j).copied().unwrap_or(0.0);
            let level = meta
                .iter()
                .find(|m| &m.name == name)
                .map_or(z, |m| m.level(z));
            AllocationRow {
                name: name.clone(),
                coefficient: problem.objective.coefficients[j],
                z,
                level,
                contribution,
                share: if obj != 0.0 { contribution / obj } else { 0.0 },
                lower: problem.lower[j],
                upper: problem.upper[j],
            }
        })
        .collect();
    AllocationReport {
        rows,
        objective_value: obj,
        intercept: problem.objective.intercept,
        predicted_volume: problem.objective.intercept + obj,
    }
}
