//! PC-pattern structure discovery for Gaussian data.
//!
//! Conditional independence is judged by Fisher's z on partial correlations
//! read off the correlation matrix. The search runs in three phases:
//! skeleton removal by growing conditioning-set size, collider orientation
//! on unshielded triples, and propagation of orientations (Meek rules 1–3)
//! until nothing changes. Edges the rules cannot orient stay undirected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::linalg::{cholesky, Matrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CausalError {
    #[error("correlation submatrix over {0:?} is singular")]
    SingularSubmatrix(Vec<usize>),
    #[error("sample size {n} too small for conditioning set of size {s}")]
    InsufficientSample { n: usize, s: usize },
    #[error("invalid partial-correlation query: {0}")]
    InvalidQuery(String),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("{names} names for a {p}x{p} matrix")]
    DimensionMismatch { names: usize, p: usize },
}

/// Partial correlation of `x` and `y` given `s`, from the inverse of the
/// correlation submatrix over `{x, y} ∪ s`: `−P_xy / √(P_xx·P_yy)`.
pub fn partial_correlation(
    r: &Matrix,
    x: usize,
    y: usize,
    s: &[usize],
) -> Result<f64, CausalError> {
    if x == y || s.contains(&x) || s.contains(&y) {
        return Err(CausalError::InvalidQuery(format!(
            "x = {x}, y = {y}, conditioning set {s:?}"
        )));
    }
    if s.is_empty() {
        return Ok(r[(x, y)]);
    }
    let mut idx = vec![x, y];
    idx.extend_from_slice(s);
    let sub = r.select(&idx);
    let chol = cholesky(&sub).map_err(|_| CausalError::SingularSubmatrix(idx.clone()))?;
    // Only the leading 2×2 block of the precision matrix is needed.
    let mut e0 = vec![0.0; idx.len()];
    e0[0] = 1.0;
    let mut e1 = vec![0.0; idx.len()];
    e1[1] = 1.0;
    let c0 = chol.solve(&e0);
    let c1 = chol.solve(&e1);
    let (pxx, pxy, pyy) = (c0[0], c0[1], c1[1]);
    Ok((-pxy / (pxx * pyy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiOutcome {
    pub independent: bool,
    pub p_value: f64,
    pub statistic: f64,
}

/// Standard-normal two-sided tail `P(|N(0,1)| > z)`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Fisher-z test of a (partial) correlation `r` from `n` observations with a
/// conditioning set of size `s`. Independent when `p > alpha`.
pub fn ci_test(r: f64, n: usize, s: usize, alpha: f64) -> Result<CiOutcome, CausalError> {
    if n < s + 4 {
        return Err(CausalError::InsufficientSample { n, s });
    }
    let statistic = r.atanh().abs() * ((n - s - 3) as f64).sqrt();
    let p_value = if statistic.is_finite() {
        normal_two_sided_p(statistic)
    } else {
        0.0
    };
    Ok(CiOutcome {
        independent: p_value > alpha,
        p_value,
        statistic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausalConfig {
    pub alpha: f64,
    /// Largest conditioning set tried; `None` means `p − 2`.
    pub max_cond_size: Option<usize>,
    /// Freeze adjacencies at the start of each level (order-independent skeleton).
    #[serde(default)]
    pub stable: bool,
}

impl Default for CausalConfig {
    fn default() -> Self {
        CausalConfig {
            alpha: 0.05,
            max_cond_size: None,
            stable: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMark {
    Undirected,
    /// `a → b`.
    Directed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub mark: EdgeMark,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub a: String,
    pub b: String,
    pub sepset: Vec<String>,
}

/// Mixed graph over the variables: directed edges shared by every member of
/// the equivalence class, undirected edges where members disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cpdag {
    names: Vec<String>,
    adjacent: Vec<Vec<bool>>,
    /// `arrow[i][j]`: the edge between i and j points into j.
    arrow: Vec<Vec<bool>>,
    sepsets: BTreeMap<(usize, usize), Vec<usize>>,
}

impl Cpdag {
    /// Graph with no edges.
    pub fn empty(names: Vec<String>) -> Self {
        let p = names.len();
        Cpdag {
            names,
            adjacent: vec![vec![false; p]; p],
            arrow: vec![vec![false; p]; p],
            sepsets: BTreeMap::new(),
        }
    }

    pub fn complete(names: Vec<String>) -> Self {
        let mut g = Cpdag::empty(names);
        let p = g.p();
        for i in 0..p {
            for j in 0..p {
                g.adjacent[i][j] = i != j;
            }
        }
        g
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacent[i][j]
    }

    /// `i → j`.
    pub fn is_directed(&self, i: usize, j: usize) -> bool {
        self.adjacent[i][j] && self.arrow[i][j] && !self.arrow[j][i]
    }

    pub fn is_undirected(&self, i: usize, j: usize) -> bool {
        self.adjacent[i][j] && !self.arrow[i][j] && !self.arrow[j][i]
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.p()).filter(|&j| self.adjacent[i][j]).collect()
    }

    pub fn edge_count(&self) -> usize {
        let p = self.p();
        (0..p)
            .map(|i| (i + 1..p).filter(|&j| self.adjacent[i][j]).count())
            .sum()
    }

    pub fn directed_count(&self) -> usize {
        let p = self.p();
        (0..p)
            .map(|i| (0..p).filter(|&j| self.is_directed(i, j)).count())
            .sum()
    }

    pub fn sepset(&self, i: usize, j: usize) -> Option<&[usize]> {
        self.sepsets.get(&(i.min(j), i.max(j))).map(Vec::as_slice)
    }

    pub fn add_undirected(&mut self, i: usize, j: usize) {
        self.adjacent[i][j] = true;
        self.adjacent[j][i] = true;
        self.arrow[i][j] = false;
        self.arrow[j][i] = false;
    }

    pub fn add_directed(&mut self, i: usize, j: usize) {
        self.add_undirected(i, j);
        self.arrow[i][j] = true;
    }

    fn remove(&mut self, i: usize, j: usize, mut sepset: Vec<usize>) {
        sepset.sort_unstable();
        self.adjacent[i][j] = false;
        self.adjacent[j][i] = false;
        self.arrow[i][j] = false;
        self.arrow[j][i] = false;
        self.sepsets.insert((i.min(j), i.max(j)), sepset);
    }

    /// Whether a directed path `from ⇝ to` exists over directed edges only.
    pub fn has_directed_path(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.p()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend((0..self.p()).filter(|&w| self.is_directed(v, w) && !seen[w]));
        }
        false
    }

    /// Orients an undirected `i – j` as `i → j` unless that would close a directed cycle.
    fn try_orient(&mut self, i: usize, j: usize) -> bool {
        if !self.is_undirected(i, j) || self.has_directed_path(j, i) {
            return false;
        }
        self.arrow[i][j] = true;
        true
    }

    /// Kahn's algorithm over directed edges.
    pub fn directed_part_is_acyclic(&self) -> bool {
        let p = self.p();
        let mut indeg: Vec<usize> = (0..p)
            .map(|j| (0..p).filter(|&i| self.is_directed(i, j)).count())
            .collect();
        let mut queue: Vec<usize> = (0..p).filter(|&j| indeg[j] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for w in 0..p {
                if self.is_directed(v, w) {
                    indeg[w] -= 1;
                    if indeg[w] == 0 {
                        queue.push(w);
                    }
                }
            }
        }
        seen == p
    }

    /// Edges sorted lexicographically by endpoint names; undirected edges
    /// list the lexicographically smaller name first.
    pub fn edges(&self) -> Vec<Edge> {
        let p = self.p();
        let mut out = Vec::new();
        for i in 0..p {
            for j in i + 1..p {
                if !self.adjacent[i][j] {
                    continue;
                }
                let (a, b, mark) = if self.is_directed(i, j) {
                    (i, j, EdgeMark::Directed)
                } else if self.is_directed(j, i) {
                    (j, i, EdgeMark::Directed)
                } else if self.names[i] <= self.names[j] {
                    (i, j, EdgeMark::Undirected)
                } else {
                    (j, i, EdgeMark::Undirected)
                };
                out.push(Edge {
                    a: self.names[a].clone(),
                    b: self.names[b].clone(),
                    mark,
                });
            }
        }
        out.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        out
    }

    pub fn separations(&self) -> Vec<Separation> {
        let mut out: Vec<Separation> = self
            .sepsets
            .iter()
            .map(|(&(i, j), s)| {
                let (a, b) = if self.names[i] <= self.names[j] {
                    (i, j)
                } else {
                    (j, i)
                };
                let mut sepset: Vec<String> = s.iter().map(|&k| self.names[k].clone()).collect();
                sepset.sort();
                Separation {
                    a: self.names[a].clone(),
                    b: self.names[b].clone(),
                    sepset,
                }
            })
            .collect();
        out.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        out
    }

    pub fn to_record(&self) -> CpdagRecord {
        CpdagRecord {
            nodes: self.names.clone(),
            edges: self.edges(),
            sepsets: self.separations(),
        }
    }
}

/// JSON form of a [`Cpdag`]: nodes in variable order, sorted edge list with marks, and sepsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpdagRecord {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub sepsets: Vec<Separation>,
}

impl TryFrom<CpdagRecord> for Cpdag {
    type Error = String;

    fn try_from(rec: CpdagRecord) -> Result<Self, Self::Error> {
        let mut g = Cpdag::empty(rec.nodes);
        let idx = |g: &Cpdag, n: &str| g.index_of(n).ok_or_else(|| format!("unknown node {n:?}"));
        for e in &rec.edges {
            let (a, b) = (idx(&g, &e.a)?, idx(&g, &e.b)?);
            match e.mark {
                EdgeMark::Undirected => g.add_undirected(a, b),
                EdgeMark::Directed => g.add_directed(a, b),
            }
        }
        for s in &rec.sepsets {
            let (a, b) = (idx(&g, &s.a)?, idx(&g, &s.b)?);
            let mut set = s
                .sepset
                .iter()
                .map(|n| idx(&g, n))
                .collect::<Result<Vec<_>, _>>()?;
            set.sort_unstable();
            g.sepsets.insert((a.min(b), a.max(b)), set);
        }
        Ok(g)
    }
}

impl Serialize for Cpdag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cpdag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rec = CpdagRecord::deserialize(d)?;
        Cpdag::try_from(rec).map_err(serde::de::Error::custom)
    }
}

/// One conditional-independence decision made during the skeleton search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiRecord {
    pub x: usize,
    pub y: usize,
    pub cond: Vec<usize>,
    pub partial_correlation: f64,
    pub outcome: CiOutcome,
}

/// Diagnostics from a PC run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PcTrace {
    /// Edge count after each conditioning level (first entry: complete graph).
    pub edges_per_level: Vec<usize>,
    pub tests: Vec<CiRecord>,
    /// Skeleton adjacency before orientation.
    pub skeleton_edges: usize,
}

pub fn pc_pattern(
    names: &[String],
    r: &Matrix,
    n: usize,
    config: &CausalConfig,
) -> Result<Cpdag, CausalError> {
    pc_pattern_traced(names, r, n, config).map(|(g, _)| g)
}

/// All k-subsets of `items` in lexicographic order.
fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

pub fn pc_pattern_traced(
    names: &[String],
    r: &Matrix,
    n: usize,
    config: &CausalConfig,
) -> Result<(Cpdag, PcTrace), CausalError> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(CausalError::InvalidAlpha(config.alpha));
    }
    let p = r.rows();
    if names.len() != p || !r.is_square() {
        return Err(CausalError::DimensionMismatch {
            names: names.len(),
            p,
        });
    }
    let max_cond = config.max_cond_size.unwrap_or(p.saturating_sub(2));
    let mut g = Cpdag::complete(names.to_vec());
    let mut trace = PcTrace {
        edges_per_level: vec![g.edge_count()],
        ..Default::default()
    };

    // Phase 1: skeleton.
    let mut level = 0;
    loop {
        let frozen: Option<Vec<Vec<usize>>> = config
            .stable
            .then(|| (0..p).map(|i| g.neighbors(i)).collect());
        let mut any_testable = false;
        for x in 0..p {
            for y in 0..p {
                if x == y || !g.is_adjacent(x, y) {
                    continue;
                }
                let pool: Vec<usize> = match &frozen {
                    Some(f) => f[x].iter().copied().filter(|&v| v != y).collect(),
                    None => g.neighbors(x).into_iter().filter(|&v| v != y).collect(),
                };
                if pool.len() < level {
                    continue;
                }
                any_testable = true;
                for cond in subsets(&pool, level) {
                    let pc = partial_correlation(r, x, y, &cond)?;
                    let outcome = ci_test(pc, n, cond.len(), config.alpha)?;
                    trace.tests.push(CiRecord {
                        x,
                        y,
                        cond: cond.clone(),
                        partial_correlation: pc,
                        outcome,
                    });
                    if outcome.independent {
                        g.remove(x, y, cond);
                        break;
                    }
                }
            }
        }
        trace.edges_per_level.push(g.edge_count());
        level += 1;
        if !any_testable || level > max_cond {
            break;
        }
    }
    trace.skeleton_edges = g.edge_count();

    // Phase 2: colliders on unshielded triples x – y – z with y outside sepset(x, z).
    for y in 0..p {
        let nb = g.neighbors(y);
        for (a, &x) in nb.iter().enumerate() {
            for &z in &nb[a + 1..] {
                if g.is_adjacent(x, z) {
                    continue;
                }
                let separated_by_y = g.sepset(x, z).is_some_and(|s| s.contains(&y));
                if !separated_by_y {
                    g.try_orient(x, y);
                    g.try_orient(z, y);
                }
            }
        }
    }

    // Phase 3: propagation.
    while meek_pass(&mut g) {}

    Ok((g, trace))
}

/// One pass over Meek rules 1–3; true when any edge was oriented.
fn meek_pass(g: &mut Cpdag) -> bool {
    let p = g.p();
    let mut changed = false;
    for a in 0..p {
        for b in 0..p {
            if !g.is_undirected(a, b) {
                continue;
            }
            // R1: c → a, c not adjacent to b  ⇒  a → b.
            let r1 = (0..p).any(|c| c != b && g.is_directed(c, a) && !g.is_adjacent(c, b));
            // R2: a → c → b  ⇒  a → b.
            let r2 = (0..p).any(|c| g.is_directed(a, c) && g.is_directed(c, b));
            // R3: a – c → b and a – d → b with c, d non-adjacent  ⇒  a → b.
            let r3 = {
                let cs: Vec<usize> = (0..p)
                    .filter(|&c| g.is_undirected(a, c) && g.is_directed(c, b))
                    .collect();
                cs.iter()
                    .enumerate()
                    .any(|(i, &c)| cs[i + 1..].iter().any(|&d| !g.is_adjacent(c, d)))
            };
            if (r1 || r2 || r3) && g.try_orient(a, b) {
                changed = true;
            }
        }
    }
    changed
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph with lexicographically ordered nodes and edges; undirected
/// edges carry `dir=none`.
pub fn export_dot(g: &Cpdag) -> String {
    let mut nodes = g.names().to_vec();
    nodes.sort();
    let mut out = String::from("digraph pattern {\n");
    for n in &nodes {
        let _ = writeln!(out, "  {};", dot_id(n));
    }
    for e in g.edges() {
        let attr = match e.mark {
            EdgeMark::Directed => "",
            EdgeMark::Undirected => " [dir=none]",
        };
        let _ = writeln!(out, "  {} -> {}{};", dot_id(&e.a), dot_id(&e.b), attr);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn partial_correlation_examples() {
        let r = Matrix::from_rows(&[[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]]);
        assert_eq!(partial_correlation(&r, 0, 1, &[]).unwrap(), 0.5);
        let pc = partial_correlation(&r, 0, 1, &[2]).unwrap();
        assert!((pc - 1.0 / 3.0).abs() < 1e-14);

        let r = Matrix::from_rows(&[[1.0, 0.42, 0.0], [0.42, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!((partial_correlation(&r, 0, 1, &[2]).unwrap() - 0.42).abs() < 1e-14);
    }

    #[test]
    fn partial_correlation_errors() {
        let r = Matrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(
            partial_correlation(&r, 0, 2, &[1]),
            Err(CausalError::SingularSubmatrix(_))
        ));
        assert!(matches!(
            partial_correlation(&r, 0, 0, &[]),
            Err(CausalError::InvalidQuery(_))
        ));
        assert!(matches!(
            partial_correlation(&r, 0, 1, &[1]),
            Err(CausalError::InvalidQuery(_))
        ));
    }

    #[test]
    fn ci_test_examples() {
        let zero = ci_test(0.0, 50, 0, 0.01).unwrap();
        assert_eq!(zero.p_value, 1.0);
        assert!(zero.independent);

        let strong = ci_test(0.5, 30, 0, 0.05).unwrap();
        assert!((strong.statistic - 0.5f64.atanh() * 27f64.sqrt()).abs() < 1e-12);
        assert!((strong.statistic - 2.854).abs() < 1e-3);
        assert!((strong.p_value - 0.0043).abs() < 1e-4);
        assert!(!strong.independent);

        let weak = ci_test(0.1, 20, 2, 0.05).unwrap();
        assert!((weak.statistic - 0.389).abs() < 1e-3);
        assert!((weak.p_value - 0.70).abs() < 0.01);
        assert!(weak.independent);

        assert_eq!(
            ci_test(0.1, 5, 2, 0.05).unwrap_err(),
            CausalError::InsufficientSample { n: 5, s: 2 }
        );
        assert!(ci_test(0.1, 6, 2, 0.05).is_ok());
    }

    #[test]
    fn two_weakly_correlated_variables() {
        let r = Matrix::from_rows(&[[1.0, 0.01], [0.01, 1.0]]);
        let g = pc_pattern(&names(&["a", "b"]), &r, 71, &CausalConfig::default()).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.sepset(0, 1), Some(&[][..]));
    }

    #[test]
    fn population_collider_and_chain() {
        // x → z ← y with x ⟂ y, population correlations.
        let c = 0.6;
        let r = Matrix::from_rows(&[[1.0, 0.0, c], [0.0, 1.0, c], [c, c, 1.0]]);
        let g = pc_pattern(&names(&["x", "y", "z"]), &r, 5000, &CausalConfig::default()).unwrap();
        assert!(g.is_directed(0, 2) && g.is_directed(1, 2));
        assert!(!g.is_adjacent(0, 1));

        // chain x → y → z: corr(x,z) = corr(x,y)·corr(y,z).
        let r = Matrix::from_rows(&[[1.0, 0.7, 0.49], [0.7, 1.0, 0.7], [0.49, 0.7, 1.0]]);
        let g = pc_pattern(&names(&["x", "y", "z"]), &r, 5000, &CausalConfig::default()).unwrap();
        assert!(g.is_undirected(0, 1) && g.is_undirected(1, 2));
        assert!(!g.is_adjacent(0, 2));
        assert_eq!(g.sepset(0, 2), Some(&[1][..]));
    }

    #[test]
    fn meek_rule_one_propagates_from_collider() {
        // a → c ← b, c – d, with d adjacent to c only: R1 orients c → d.
        let mut g = Cpdag::empty(names(&["a", "b", "c", "d"]));
        g.add_directed(0, 2);
        g.add_directed(1, 2);
        g.add_undirected(2, 3);
        while meek_pass(&mut g) {}
        assert!(g.is_directed(2, 3));
    }

    #[test]
    fn meek_rule_two_and_three() {
        let mut g = Cpdag::empty(names(&["a", "b", "c"]));
        g.add_directed(0, 2);
        g.add_directed(2, 1);
        g.add_undirected(0, 1);
        while meek_pass(&mut g) {}
        assert!(g.is_directed(0, 1));

        // a – c → b, a – d → b, c and d non-adjacent, a – b  ⇒  a → b.
        let mut g = Cpdag::empty(names(&["a", "b", "c", "d"]));
        g.add_undirected(0, 2);
        g.add_undirected(0, 3);
        g.add_undirected(0, 1);
        g.add_directed(2, 1);
        g.add_directed(3, 1);
        while meek_pass(&mut g) {}
        assert!(g.is_directed(0, 1));
        assert!(g.is_undirected(0, 2) && g.is_undirected(0, 3));
    }

    #[test]
    fn orientation_refuses_cycles() {
        let mut g = Cpdag::empty(names(&["a", "b", "c"]));
        g.add_directed(0, 1);
        g.add_directed(1, 2);
        g.add_undirected(2, 0);
        assert!(!g.try_orient(2, 0));
        assert!(g.try_orient(0, 2));
        assert!(g.directed_part_is_acyclic());
    }

    #[test]
    fn dot_output() {
        let g = Cpdag::empty(names(&["c", "a", "b"]));
        let dot = export_dot(&g);
        assert_eq!(dot, "digraph pattern {\n  \"a\";\n  \"b\";\n  \"c\";\n}\n");

        let mut g = Cpdag::empty(names(&["a", "b"]));
        g.add_directed(0, 1);
        let dot = export_dot(&g);
        assert!(dot.contains("  \"a\" -> \"b\";\n"));
        assert!(!dot.contains("dir=none"));

        let mut g = Cpdag::empty(names(&["a", "b", "c"]));
        g.add_directed(0, 1);
        g.add_undirected(2, 1);
        let dot = export_dot(&g);
        assert_eq!(dot.matches("dir=none").count(), 1);
        assert!(dot.contains("\"b\" -> \"c\" [dir=none];"));
    }

    #[test]
    fn record_round_trip() {
        let r = Matrix::from_rows(&[[1.0, 0.7, 0.49], [0.7, 1.0, 0.7], [0.49, 0.7, 1.0]]);
        let g = pc_pattern(&names(&["x", "y", "z"]), &r, 500, &CausalConfig::default()).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        let back: Cpdag = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn subsets_lexicographic() {
        assert_eq!(
            subsets(&[1, 3, 5], 2),
            vec![vec![1, 3], vec![1, 5], vec![3, 5]]
        );
        assert_eq!(subsets(&[1, 2], 0), vec![Vec::<usize>::new()]);
    }
}
