//! Principal-component extraction, quartimax rotation with optional Kaiser
//! normalization, and regression-method component scores.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{cholesky, LinalgError, Matrix};
use crate::stats::ZMatrix;

pub use crate::linalg::{eigen_sym, SymEigen};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FactorError {
    #[error("Kaiser criterion retained no components (no eigenvalue above 1)")]
    ZeroComponents,
    #[error("cannot retain {k} components from {p} variables")]
    TooManyComponents { k: usize, p: usize },
    #[error("row {0} has zero communality; Kaiser normalization is undefined")]
    ZeroCommunality(usize),
    #[error("correlation matrix is not positive definite (leading minor {0})")]
    NotPositiveDefinite(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Linalg(LinalgError),
}

impl From<LinalgError> for FactorError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NotPositiveDefinite {
                leading_minor_index,
            } => FactorError::NotPositiveDefinite(leading_minor_index),
            LinalgError::DimensionMismatch(s) => FactorError::DimensionMismatch(s),
            other => FactorError::Linalg(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Retain components with eigenvalue above one.
    #[default]
    Kaiser,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSettings {
    pub kaiser_normalize: bool,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for RotationSettings {
    fn default() -> Self {
        RotationSettings {
            kaiser_normalize: true,
            tol: 1e-6,
            max_sweeps: 100,
        }
    }
}

/// One row of the variance-explained table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub component: usize,
    pub eigenvalue: f64,
    pub pct_variance: f64,
    pub cumulative_pct: f64,
    /// Present for retained components only.
    pub extraction: Option<SumsOfSquares>,
    pub rotation: Option<SumsOfSquares>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumsOfSquares {
    pub total: f64,
    pub pct_variance: f64,
    pub cumulative_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSolution {
    pub names: Vec<String>,
    pub eigenvalues: Vec<f64>,
    pub k: usize,
    pub loadings_unrotated: Matrix,
    pub loadings_rotated: Matrix,
    pub rotation: Matrix,
    /// Empty until [`score_coefficients`] has been applied.
    pub score_coefficients: Matrix,
    pub variance_table: Vec<VarianceRow>,
    pub sweeps_used: usize,
    pub rotation_converged: bool,
}

impl FactorSolution {
    pub fn p(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn communalities(&self) -> Vec<f64> {
        row_communalities(&self.loadings_rotated)
    }

    fn rebuild_variance_table(&mut self) {
        let p = self.p() as f64;
        let mut cum = 0.0;
        let mut ext_cum = 0.0;
        let mut rot_cum = 0.0;
        let rot_totals = column_sums_of_squares(&self.loadings_rotated);
        self.variance_table = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &ev)| {
                let pct = 100.0 * ev / p;
                cum += pct;
                let (extraction, rotation) = if i < self.k {
                    ext_cum += pct;
                    let rpct = 100.0 * rot_totals[i] / p;
                    rot_cum += rpct;
                    (
                        Some(SumsOfSquares {
                            total: ev,
                            pct_variance: pct,
                            cumulative_pct: ext_cum,
                        }),
                        Some(SumsOfSquares {
                            total: rot_totals[i],
                            pct_variance: rpct,
                            cumulative_pct: rot_cum,
                        }),
                    )
                } else {
                    (None, None)
                };
                VarianceRow {
                    component: i + 1,
                    eigenvalue: ev,
                    pct_variance: pct,
                    cumulative_pct: cum,
                    extraction,
                    rotation,
                }
            })
            .collect();
    }
}

pub fn row_communalities(loadings: &Matrix) -> Vec<f64> {
    (0..loadings.rows())
        .map(|i| loadings.row(i).iter().map(|l| l * l).sum())
        .collect()
}

pub fn column_sums_of_squares(loadings: &Matrix) -> Vec<f64> {
    (0..loadings.cols())
        .map(|j| loadings.column(j).iter().map(|l| l * l).sum())
        .collect()
}

/// Sum of fourth powers of all loadings.
pub fn quartimax_criterion(loadings: &Matrix) -> f64 {
    loadings.as_slice().iter().map(|l| l.powi(4)).sum()
}

/// Principal-component extraction. Loading column `i` is `v_i·√λ_i`.
///
/// The returned solution is unrotated: `loadings_rotated` equals
/// `loadings_unrotated` and `rotation` is the identity.
pub fn pca_extract(
    names: &[String],
    r: &Matrix,
    selection: Selection,
) -> Result<FactorSolution, FactorError> {
    let eig = eigen_sym(r)?;
    let p = eig.values.len();
    if names.len() != p {
        return Err(FactorError::DimensionMismatch(format!(
            "{} names for a {p}x{p} matrix",
            names.len()
        )));
    }
    let k = match selection {
        Selection::Kaiser => eig.values.iter().take_while(|&&v| v > 1.0).count(),
        Selection::Fixed(k) => k,
    };
    if k == 0 {
        return Err(FactorError::ZeroComponents);
    }
    if k > p {
        return Err(FactorError::TooManyComponents { k, p });
    }
    let loadings = Matrix::from_fn(p, k, |i, j| {
        eig.vectors[(i, j)] * eig.values[j].max(0.0).sqrt()
    });
    let mut sol = FactorSolution {
        names: names.to_vec(),
        eigenvalues: eig.values,
        k,
        loadings_unrotated: loadings.clone(),
        loadings_rotated: loadings,
        rotation: Matrix::identity(k),
        score_coefficients: Matrix::zeros(0, 0),
        variance_table: Vec::new(),
        sweeps_used: 0,
        rotation_converged: true,
    };
    sol.rebuild_variance_table();
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rotated {
    pub loadings: Matrix,
    /// Orthogonal `k × k` matrix with `loadings = input · rotation`.
    pub rotation: Matrix,
    pub sweeps_used: usize,
    pub converged: bool,
    /// Criterion of the working (possibly normalized) loadings before the
    /// first sweep and after each sweep.
    pub criterion_trace: Vec<f64>,
}

/// Quartimax rotation by successive pairwise planar rotations.
///
/// Each plane gets the closed-form angle `θ = ¼·atan2(Σ2uv, Σ(u² − v²))`
/// with `u = x² − y²`, `v = 2xy`, which maximizes that pair's fourth-power
/// sum exactly. Sweeps visit column pairs lexicographically and stop once a
/// sweep gains less than `tol`. Columns are then signed to have a positive
/// sum and ordered by descending variance.
pub fn quartimax_rotate(
    loadings: &Matrix,
    settings: RotationSettings,
) -> Result<Rotated, FactorError> {
    let p = loadings.rows();
    let k = loadings.cols();
    if k < 2 {
        return Ok(Rotated {
            loadings: loadings.clone(),
            rotation: Matrix::identity(k),
            sweeps_used: 0,
            converged: true,
            criterion_trace: vec![quartimax_criterion(loadings)],
        });
    }

    let norms: Vec<f64> = if settings.kaiser_normalize {
        let h2 = row_communalities(loadings);
        if let Some(i) = h2.iter().position(|&h| !(h > 0.0)) {
            return Err(FactorError::ZeroCommunality(i));
        }
        h2.iter().map(|h| h.sqrt()).collect()
    } else {
        vec![1.0; p]
    };
    let mut work = Matrix::from_fn(p, k, |i, j| loadings[(i, j)] / norms[i]);
    let mut rotation = Matrix::identity(k);

    let mut q = quartimax_criterion(&work);
    let mut trace = vec![q];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < settings.max_sweeps {
        for a in 0..k {
            for b in a + 1..k {
                let (mut num, mut den) = (0.0, 0.0);
                for i in 0..p {
                    let x = work[(i, a)];
                    let y = work[(i, b)];
                    let u = x * x - y * y;
                    let v = 2.0 * x * y;
                    num += 2.0 * u * v;
                    den += u * u - v * v;
                }
                let theta = 0.25 * num.atan2(den);
                if theta == 0.0 {
                    continue;
                }
                let (s, c) = theta.sin_cos();
                rotate_columns(&mut work, a, b, c, s);
                rotate_columns(&mut rotation, a, b, c, s);
            }
        }
        sweeps += 1;
        let next = quartimax_criterion(&work);
        trace.push(next);
        let gain = next - q;
        q = next;
        if gain < settings.tol {
            converged = true;
            break;
        }
    }

    // Sign so each column sums positive, then order by descending variance.
    for j in 0..k {
        if work.column(j).iter().sum::<f64>() < 0.0 {
            for i in 0..p {
                work[(i, j)] = -work[(i, j)];
            }
            for i in 0..k {
                rotation[(i, j)] = -rotation[(i, j)];
            }
        }
    }
    let mut rotated = Matrix::from_fn(p, k, |i, j| work[(i, j)] * norms[i]);
    let ss = column_sums_of_squares(&rotated);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| ss[y].total_cmp(&ss[x]).then(x.cmp(&y)));
    rotated = Matrix::from_fn(p, k, |i, j| rotated[(i, order[j])]);
    let rotation = Matrix::from_fn(k, k, |i, j| rotation[(i, order[j])]);

    Ok(Rotated {
        loadings: rotated,
        rotation,
        sweeps_used: sweeps,
        converged,
        criterion_trace: trace,
    })
}

fn rotate_columns(m: &mut Matrix, a: usize, b: usize, c: f64, s: f64) {
    for i in 0..m.rows() {
        let x = m[(i, a)];
        let y = m[(i, b)];
        m[(i, a)] = c * x + s * y;
        m[(i, b)] = -s * x + c * y;
    }
}

/// Regression-method score coefficients `W = R⁻¹·Λ`.
pub fn score_coefficients(r: &Matrix, rotated: &Matrix) -> Result<Matrix, FactorError> {
    if r.rows() != rotated.rows() {
        return Err(FactorError::DimensionMismatch(format!(
            "{}x{} correlation against {} loading rows",
            r.rows(),
            r.cols(),
            rotated.rows()
        )));
    }
    let l = cholesky(r)?;
    Ok(l.solve_matrix(rotated))
}

/// Factor scores `Z·W`.
pub fn factor_scores(z: &ZMatrix, w: &Matrix) -> Result<Matrix, FactorError> {
    Ok(z.matrix().matmul(w)?)
}

/// Extraction, rotation and score coefficients in one pass.
pub fn factor_analysis(
    names: &[String],
    r: &Matrix,
    selection: Selection,
    settings: RotationSettings,
) -> Result<FactorSolution, FactorError> {
    let mut sol = pca_extract(names, r, selection)?;
    let rot = quartimax_rotate(&sol.loadings_unrotated, settings)?;
    sol.loadings_rotated = rot.loadings;
    sol.rotation = rot.rotation;
    sol.sweeps_used = rot.sweeps_used;
    sol.rotation_converged = rot.converged;
    sol.score_coefficients = score_coefficients(r, &sol.loadings_rotated)?;
    sol.rebuild_variance_table();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn pca_two_by_two() {
        let r = Matrix::from_rows(&[[1.0, 0.8], [0.8, 1.0]]);
        let sol = pca_extract(&names(2), &r, Selection::Kaiser).unwrap();
        assert_eq!(sol.k, 1);
        let expect = 0.9f64.sqrt();
        assert!((sol.loadings_unrotated[(0, 0)] - expect).abs() < 1e-12);
        assert!((sol.loadings_unrotated[(1, 0)] - expect).abs() < 1e-12);
        assert!((sol.loadings_unrotated[(0, 0)] - 0.9487).abs() < 1e-4);
        assert!((sol.variance_table[0].pct_variance - 90.0).abs() < 1e-10);
    }

    #[test]
    fn kaiser_on_identity_retains_nothing() {
        let err = pca_extract(&names(5), &Matrix::identity(5), Selection::Kaiser).unwrap_err();
        assert_eq!(err, FactorError::ZeroComponents);
    }

    #[test]
    fn fixed_k_bounds() {
        let err = pca_extract(&names(3), &Matrix::identity(3), Selection::Fixed(4)).unwrap_err();
        assert_eq!(err, FactorError::TooManyComponents { k: 4, p: 3 });
    }

    #[test]
    fn simple_structure_is_a_fixed_point() {
        let l = Matrix::from_rows(&[[0.9, 0.0], [0.0, 0.9]]);
        for kaiser in [false, true] {
            let rot = quartimax_rotate(
                &l,
                RotationSettings {
                    kaiser_normalize: kaiser,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(rot.loadings.max_abs_diff(&l) < 1e-15);
            assert!(rot.rotation.max_abs_diff(&Matrix::identity(2)) < 1e-15);
            assert!((quartimax_criterion(&rot.loadings) - quartimax_criterion(&l)).abs() < 1e-15);
        }
    }

    #[test]
    fn single_column_unchanged() {
        let l = Matrix::from_rows(&[[0.5], [-0.7]]);
        let rot = quartimax_rotate(&l, RotationSettings::default()).unwrap();
        assert_eq!(rot.loadings, l);
        assert_eq!(rot.sweeps_used, 0);
    }

    #[test]
    fn zero_communality_with_kaiser() {
        let l = Matrix::from_rows(&[[0.5, 0.1], [0.0, 0.0]]);
        assert_eq!(
            quartimax_rotate(&l, RotationSettings::default()).unwrap_err(),
            FactorError::ZeroCommunality(1)
        );
    }

    #[test]
    fn scores_on_identity() {
        let lam = Matrix::from_rows(&[[0.7, 0.1], [0.2, 0.6], [0.5, 0.5]]);
        let w = score_coefficients(&Matrix::identity(3), &lam).unwrap();
        assert_eq!(w, lam);
    }

    #[test]
    fn scores_two_variable_by_hand() {
        // R⁻¹ = [[1, -0.6], [-0.6, 1]] / 0.64; W = R⁻¹Λ = 0.4·Λ/0.64 = 0.625·Λ.
        let r = Matrix::from_rows(&[[1.0, 0.6], [0.6, 1.0]]);
        let lam = Matrix::from_rows(&[[0.8944], [0.8944]]);
        let w = score_coefficients(&r, &lam).unwrap();
        assert!((w[(0, 0)] - 0.559).abs() < 1e-12);
        assert!((w[(1, 0)] - 0.559).abs() < 1e-12);
    }

    #[test]
    fn factor_scores_direct_multiply() {
        let z = ZMatrix::from_standardized(
            names(3),
            Matrix::from_rows(&[
                [1.0, -0.5, 0.0],
                [-1.0, 0.5, 1.0],
                [0.5, 1.0, -1.0],
                [0.0, -1.0, 0.5],
                [-0.5, 0.0, -0.5],
            ]),
        );
        let w = Matrix::from_rows(&[[0.5, 1.0], [0.25, -1.0], [2.0, 0.0]]);
        let s = factor_scores(&z, &w).unwrap();
        // Row 1: (-1)(0.5) + 0.5(0.25) + 1(2) = 1.625 ; (-1)(1) + 0.5(-1) = -1.5
        assert!((s[(1, 0)] - 1.625).abs() < 1e-15);
        assert!((s[(1, 1)] + 1.5).abs() < 1e-15);
        // Row 2: 0.25 + 0.25 - 2 = -1.5 ; 0.5 - 1 = -0.5
        assert!((s[(2, 0)] + 1.5).abs() < 1e-15);
        assert!((s[(2, 1)] + 0.5).abs() < 1e-15);
        for j in 0..2 {
            let m: f64 = s.column(j).iter().sum::<f64>() / 5.0;
            assert!(m.abs() < 1e-12);
        }
        let id = factor_scores(&z, &Matrix::identity(3)).unwrap();
        assert_eq!(&id, z.matrix());
        assert!(factor_scores(&z, &Matrix::identity(2)).is_err());
    }
}
