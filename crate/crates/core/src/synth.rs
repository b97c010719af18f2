//! Correlation-faithful synthetic data from variable summaries and a target
//! correlation matrix.
//!
//! Rows are drawn as `mean + sd ⊙ (L·g)` where `L` is the Cholesky factor of
//! the target correlation and `g` is a vector of independent standard normals
//! from a seeded ChaCha stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset, VariableMeta};
use crate::linalg::{cholesky, eigen_sym, LinalgError, Matrix};

pub use crate::linalg::LowerTriangular;

/// Default eigenvalue floor for [`nearest_pd_repair`].
pub const PD_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("correlation matrix is not positive definite (leading minor {0})")]
    NotPositiveDefinite(usize),
    #[error("no in-bounds draw for row {row} after {attempts} attempts")]
    ResampleExhausted { row: usize, attempts: u32 },
    #[error("loading row {0} has communality of at least one")]
    CommunalityExceedsOne(usize),
    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Linalg(LinalgError),
}

impl From<LinalgError> for SynthError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NotPositiveDefinite {
                leading_minor_index,
            } => SynthError::NotPositiveDefinite(leading_minor_index),
            other => SynthError::Linalg(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum ClipPolicy {
    None,
    #[default]
    ClipToBounds,
    ResampleViolations {
        max_attempts: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub meta: Vec<VariableMeta>,
    pub target_correlation: Matrix,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub clip_policy: ClipPolicy,
}

impl SynthesisSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let p = self.meta.len();
        let r = &self.target_correlation;
        if r.rows() != p || r.cols() != p {
            return Err(SynthError::InvalidCorrelation(format!(
                "expected {p}x{p}, got {}x{}",
                r.rows(),
                r.cols()
            )));
        }
        validate_correlation(r)?;
        if self.n == 0 {
            return Err(SynthError::InvalidCorrelation(
                "n must be at least 1".into(),
            ));
        }
        for m in &self.meta {
            m.validate()?;
        }
        Ok(())
    }
}

/// Checks symmetry, unit diagonal and the [−1, 1] range.
pub fn validate_correlation(r: &Matrix) -> Result<(), SynthError> {
    if !r.is_symmetric(1e-12) {
        return Err(SynthError::InvalidCorrelation("not symmetric".into()));
    }
    for i in 0..r.rows() {
        if (r[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(SynthError::InvalidCorrelation(format!(
                "diagonal entry {i} is {}",
                r[(i, i)]
            )));
        }
    }
    if r.as_slice().iter().any(|v| !(v.abs() <= 1.0)) {
        return Err(SynthError::InvalidCorrelation(
            "entries must lie in [-1, 1]".into(),
        ));
    }
    Ok(())
}

/// Cholesky factor of a positive-definite correlation matrix.
pub fn cholesky_pd(r: &Matrix) -> Result<LowerTriangular, SynthError> {
    if !r.is_symmetric(1e-12) {
        return Err(SynthError::InvalidCorrelation("not symmetric".into()));
    }
    Ok(cholesky(r)?)
}

/// Clips eigenvalues below `floor`, reassembles and rescales to a unit diagonal.
///
/// Matrices whose eigenvalues already clear the floor are returned as-is.
pub fn nearest_pd_repair(r: &Matrix, floor: f64) -> Result<Matrix, SynthError> {
    let eig = eigen_sym(r)?;
    if eig.values.iter().all(|&v| v >= floor) {
        return Ok(r.clone());
    }
    let clipped = crate::linalg::SymEigen {
        values: eig.values.iter().map(|&v| v.max(floor)).collect(),
        vectors: eig.vectors,
    };
    let m = clipped.reassemble();
    let p = m.rows();
    let d: Vec<f64> = (0..p).map(|i| m[(i, i)].sqrt()).collect();
    Ok(Matrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            (m[(i, j)] / (d[i] * d[j])).clamp(-1.0, 1.0)
        }
    }))
}

/// Correlation matrix implied by a loading matrix: `ΛΛᵀ` off the diagonal,
/// ones on it. Every row communality must be strictly below one.
pub fn reconstruct_correlation(loadings: &Matrix) -> Result<Matrix, SynthError> {
    let p = loadings.rows();
    for i in 0..p {
        let h2: f64 = loadings.row(i).iter().map(|l| l * l).sum();
        if !(h2 < 1.0) {
            return Err(SynthError::CommunalityExceedsOne(i));
        }
    }
    let ll = loadings.matmul(&loadings.transpose())?;
    Ok(Matrix::from_fn(
        p,
        p,
        |i, j| if i == j { 1.0 } else { ll[(i, j)] },
    ))
}

/// Draws a dataset. Deterministic for a fixed spec (including the seed).
pub fn synthesize(spec: &SynthesisSpec) -> Result<Dataset, SynthError> {
    spec.validate()?;
    let l = cholesky_pd(&spec.target_correlation)?;
    let p = spec.meta.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut g = vec![0.0; p];
    let mut z = vec![0.0; p];
    let mut rows = Matrix::zeros(spec.n, p);

    let mut draw = |rng: &mut ChaCha8Rng, out: &mut [f64]| {
        for v in g.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        l.mul_vec(&g, &mut z);
        for (j, m) in spec.meta.iter().enumerate() {
            out[j] = m.level(z[j]);
        }
    };
    let in_bounds = |row: &[f64]| {
        spec.meta
            .iter()
            .zip(row)
            .all(|(m, &v)| v >= m.min && v <= m.max)
    };

    for i in 0..spec.n {
        let row = rows.row_mut(i);
        match spec.clip_policy {
            ClipPolicy::None => draw(&mut rng, row),
            ClipPolicy::ClipToBounds => {
                draw(&mut rng, row);
                for (v, m) in row.iter_mut().zip(&spec.meta) {
                    *v = v.clamp(m.min, m.max);
                }
            }
            ClipPolicy::ResampleViolations { max_attempts } => {
                let mut ok = false;
                for _ in 0..max_attempts {
                    draw(&mut rng, row);
                    if in_bounds(row) {
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    return Err(SynthError::ResampleExhausted {
                        row: i,
                        attempts: max_attempts,
                    });
                }
            }
        }
    }
    Ok(Dataset::new(spec.meta.clone(), rows)?)
}
