//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the library's numerical code: solves are plain
//! Gauss-Jordan with partial pivoting, tails are Simpson quadrature.

#![allow(dead_code)]

use mmx_core::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

/// Inverse of a square matrix by Gauss-Jordan elimination with partial pivoting.
pub fn gj_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        assert!(d.abs() > 1e-300, "singular oracle matrix");
        for v in m[col].iter_mut() {
            *v /= d;
        }
        let pivot_row = m[col].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != col {
                let f = row[col];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// OLS by explicit inversion of XᵀX. Returns (coefficients, (XᵀX)⁻¹, SSE).
pub fn normal_equations(design: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
    let k = design[0].len();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, &yi) in design.iter().zip(y) {
        for a in 0..k {
            xty[a] += row[a] * yi;
            for b in 0..k {
                xtx[a][b] += row[a] * row[b];
            }
        }
    }
    let inv = gj_inverse(&xtx);
    let beta = mat_vec(&inv, &xty);
    let sse = design
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let fit: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (yi - fit).powi(2)
        })
        .sum();
    (beta, inv, sse)
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Random correlation matrix: normalized Gram matrix of a p × (p + extra) Gaussian draw.
pub fn random_correlation(rng: &mut ChaCha8Rng, p: usize, extra: usize) -> Matrix {
    let m = p + extra;
    let a: Vec<Vec<f64>> = (0..p).map(|_| normals(rng, m)).collect();
    let mut s = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            s[(i, j)] = a[i].iter().zip(&a[j]).map(|(x, y)| x * y).sum();
        }
    }
    let d: Vec<f64> = (0..p).map(|i| s[(i, i)].sqrt()).collect();
    Matrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            s[(i, j)] / (d[i] * d[j])
        }
    })
}

/// Composite Simpson rule on [a, b] with `m` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    assert!(m % 2 == 0);
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Γ((ν+1)/2) / Γ(ν/2) for integer ν by the two-step recursion.
fn t_gamma_ratio(df: u64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut r = if df % 2 == 1 {
        1.0 / pi.sqrt()
    } else {
        pi.sqrt() / 2.0
    };
    let mut nu = if df % 2 == 1 { 1 } else { 2 };
    while nu < df {
        r *= (nu as f64 + 1.0) / nu as f64;
        nu += 2;
    }
    r
}

/// Two-sided Student-t tail by quadrature of the density over [0, |t|].
pub fn t_two_sided_oracle(t: f64, df: u64) -> f64 {
    let nu = df as f64;
    let c = t_gamma_ratio(df) / (nu * std::f64::consts::PI).sqrt();
    let density = |x: f64| c * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0);
    let central = simpson(density, 0.0, t.abs(), 20_000);
    (1.0 - 2.0 * central).max(0.0)
}

pub fn normal_two_sided_oracle(z: f64) -> f64 {
    let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let central = simpson(|x| c * (-0.5 * x * x).exp(), 0.0, z.abs(), 20_000);
    (1.0 - 2.0 * central).max(0.0)
}

/// Continuous knapsack with one `Σz ≤ budget` row: start every variable at its
/// lower bound, then raise positive-coefficient variables in descending order.
pub fn greedy_knapsack(c: &[f64], lo: &[f64], hi: &[f64], budget: f64) -> Vec<f64> {
    let mut z = lo.to_vec();
    let mut room = budget - lo.iter().sum::<f64>();
    let mut order: Vec<usize> = (0..c.len()).filter(|&j| c[j] > 0.0).collect();
    order.sort_by(|&a, &b| c[b].total_cmp(&c[a]).then(a.cmp(&b)));
    for j in order {
        if room <= 0.0 {
            break;
        }
        let step = (hi[j] - lo[j]).min(room);
        z[j] += step;
        room -= step;
    }
    z
}

/// Columns of a linear SEM sample for the given generator.
pub fn simulate(
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
    row: impl Fn(&[f64]) -> Vec<f64>,
) -> Vec<Vec<f64>> {
    let mut cols = vec![Vec::with_capacity(n); p];
    for _ in 0..n {
        let e = normals(rng, p);
        for (c, v) in cols.iter_mut().zip(row(&e)) {
            c.push(v);
        }
    }
    cols
}

/// Pearson correlation matrix of column data.
pub fn correlation_of(cols: &[Vec<f64>]) -> Matrix {
    let p = cols.len();
    Matrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            pearson(&cols[i], &cols[j])
        }
    })
}
