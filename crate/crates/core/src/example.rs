//! Bundled reference numbers for the antibiotic brand example: variable
//! summaries, published rotated loadings, score coefficients, factor
//! regression and the linear-programming allocation.
//!
//! The raw correlation matrix behind these tables was never released, so
//! [`derived_correlation`] rebuilds a positive-definite stand-in from the
//! published two-factor loadings. It is a derived matrix, not the original.

use crate::data::VariableMeta;
use crate::linalg::Matrix;
use crate::synth::reconstruct_correlation;

pub const N_MONTHS: usize = 71;
pub const RESPONSE: &str = "nrx";

/// Predictors in table order.
pub const PREDICTORS: [&str; 11] = [
    "con", "cal", "coc", "cpc", "min", "jas", "ads", "adp", "sam", "eus", "rvs",
];

// name, min, max, mean, sd
const SUMMARY: [(&str, f64, f64, f64, f64); 12] = [
    ("con", 7657.00, 99188.00, 54113.88, 21606.72),
    ("cal", 5361.00, 77657.00, 38964.52, 17162.88),
    ("coc", 737297.00, 8041793.00, 4357317.52, 1740648.34),
    ("cpc", 62.00, 114.00, 87.92, 10.67),
    ("min", 32682.00, 334945.00, 182602.33, 72862.46),
    ("jas", 0.00, 486943.00, 217926.80, 112177.79),
    ("ads", 0.00, 30.00, 14.12, 6.57),
    ("adp", 0.00, 82.00, 39.16, 20.22),
    ("sam", 615.00, 2614948.00, 1094355.12, 627396.75),
    ("eus", 1230.00, 8204439.00, 3556610.79, 1743431.60),
    ("rvs", 6660.00, 18502700.00, 8582259.60, 3820827.20),
    ("nrx", 84895.00, 2466777.00, 1080544.09, 512578.60),
];

/// Quartimax-rotated two-factor loadings of the eleven predictors.
pub const ROTATED_LOADINGS: [[f64; 2]; 11] = [
    [0.988, 0.046],
    [0.984, 0.053],
    [0.964, 0.066],
    [-0.768, 0.098],
    [0.979, 0.031],
    [0.437, 0.873],
    [0.594, 0.787],
    [0.539, 0.828],
    [0.958, 0.169],
    [0.921, 0.193],
    [0.951, 0.137],
];

/// Component score coefficients (predictor Z scores -> factors).
pub const SCORE_COEFFICIENTS: [[f64; 2]; 11] = [
    [0.151, -0.109],
    [0.149, -0.105],
    [0.144, -0.094],
    [-0.135, 0.162],
    [0.151, -0.117],
    [-0.051, 0.446],
    [-0.014, 0.375],
    [-0.028, 0.406],
    [0.129, -0.034],
    [0.120, -0.015],
    [0.132, -0.051],
];

/// Regression of nrx on the two factor scores.
pub const FACTOR_INTERCEPT: f64 = 1080544.093;
pub const FACTOR_BETAS: [f64; 2] = [470291.077, 106415.943];
pub const FACTOR_STD_BETAS: [f64; 2] = [0.918, 0.208];

/// Published objective coefficients per predictor Z score.
pub const OBJECTIVE_COEFFICIENTS: [f64; 11] = [
    59167.95, 58912.58, 57713.02, -46433.24, 58693.49, 23596.74, 33295.52, 29855.06, 56987.67,
    54746.69, 56685.92,
];
pub const OPTIMAL_Z: [f64; 11] = [4.0, 4.0, 4.0, -2.0, 4.0, -2.0, 4.0, 2.0, 4.0, 4.0, 4.0];
pub const OPTIMAL_OBJECTIVE: f64 = 1850194.49;
pub const Z_LOWER: f64 = -2.0;
pub const Z_UPPER: f64 = 4.0;
pub const Z_SUM_LIMIT: f64 = 30.0;

pub const EIGENVALUES: [f64; 11] = [
    8.487, 1.611, 0.476, 0.220, 0.097, 0.051, 0.022, 0.021, 0.009, 0.003, 0.002,
];

/// Summary statistics for all twelve variables (predictors then nrx).
pub fn variable_meta() -> Vec<VariableMeta> {
    SUMMARY
        .iter()
        .map(|&(name, min, max, mean, sd)| VariableMeta::new(name, mean, sd, min, max))
        .collect()
}

pub fn predictor_meta() -> Vec<VariableMeta> {
    variable_meta().into_iter().take(PREDICTORS.len()).collect()
}

pub fn rotated_loadings() -> Matrix {
    Matrix::from_rows(&ROTATED_LOADINGS)
}

pub fn score_coefficients() -> Matrix {
    Matrix::from_rows(&SCORE_COEFFICIENTS)
}

/// 11 × 11 predictor correlation implied by the published loadings.
pub fn derived_predictor_correlation() -> Matrix {
    reconstruct_correlation(&rotated_loadings()).expect("published communalities are below one")
}

/// 12 × 12 correlation over the predictors and nrx.
///
/// nrx joins the loading matrix with its standardized factor-regression
/// betas as its loading row, which puts its implied correlations at
/// `Σ_k beta_k · loading_jk` and keeps the matrix positive definite.
pub fn derived_correlation() -> Matrix {
    let mut rows: Vec<[f64; 2]> = ROTATED_LOADINGS.to_vec();
    rows.push(FACTOR_STD_BETAS);
    reconstruct_correlation(&Matrix::from_rows(&rows))
        .expect("published communalities are below one")
}
