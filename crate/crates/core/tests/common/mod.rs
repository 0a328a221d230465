#![allow(dead_code)]

use ctreg::dataio::Dataset;
use ctreg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Nuclear norm from the eigenvalues of the smaller Gram matrix. Zero
/// singular values come back near `√ε ‖a‖`, so compare loosely when `a`
/// is rank deficient.
pub fn nuclear_norm_oracle(a: &Matrix) -> f64 {
    let gram = if a.rows() < a.cols() { a.matmul_t(a) } else { a.t_matmul(a) };
    jacobi_eigenvalues(&gram.unwrap())
        .into_iter()
        .map(|e| e.max(0.0).sqrt())
        .sum()
}

/// Central differences of `f` at `w`, one entry at a time.
pub fn finite_diff(w: &Matrix, h: f64, mut f: impl FnMut(&Matrix) -> f64) -> Matrix {
    let mut out = Matrix::zeros(w.rows(), w.cols());
    for i in 0..w.rows() {
        for j in 0..w.cols() {
            let mut wp = w.clone();
            wp[(i, j)] += h;
            let mut wm = w.clone();
            wm[(i, j)] -= h;
            out[(i, j)] = (f(&wp) - f(&wm)) / (2.0 * h);
        }
    }
    out
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().max_abs()
}

/// Two classes on either side of the line x₁ = 0, away from it.
pub fn separable(n: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let side = if i % 2 == 0 { 1.0 } else { -1.0 };
        rows.push(vec![side * r.gen_range(1.0..3.0), r.gen_range(-1.0..1.0)]);
        labels.push(i % 2);
    }
    Dataset::from_labels(Matrix::from_rows(&rows).unwrap(), &labels, 2).unwrap()
}

pub fn labels_mod(n: usize, c: usize) -> Vec<usize> {
    (0..n).map(|i| i % c).collect()
}
