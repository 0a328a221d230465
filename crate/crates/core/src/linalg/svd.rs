use faer::Mat;

use super::Matrix;
use crate::error::{Error, Result};

/// Relative cutoff for the numerical rank: singular values at or below
/// `DEFAULT_RANK_TOL * σ_max` are dropped.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Thin SVD `a = u · diag(singulars) · vᵀ` truncated to the numerical rank.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `n × r`, orthonormal columns.
    pub u: Matrix,
    /// Strictly positive, nonincreasing.
    pub singulars: Vec<f64>,
    /// `p × r`, orthonormal columns.
    pub v: Matrix,
    pub rank_tolerance: f64,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        self.singulars.len()
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.singulars.iter().sum()
    }

    pub fn reconstruct(&self) -> Matrix {
        let us = self.u.scale_columns(&self.singulars);
        us.matmul_t(&self.v).expect("factor shapes are consistent")
    }
}

pub fn thin_svd(a: &Matrix, rank_tolerance: f64) -> Result<ThinSvd> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("thin_svd: matrix has non-finite entries".into()));
    }
    if !(rank_tolerance >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "thin_svd: rank tolerance must be >= 0, got {rank_tolerance}"
        )));
    }
    let (n, p) = a.shape();
    if n == 0 || p == 0 || a.max_abs() == 0.0 {
        return Ok(ThinSvd {
            u: Matrix::zeros(n, 0),
            singulars: Vec::new(),
            v: Matrix::zeros(p, 0),
            rank_tolerance,
        });
    }

    let fa = Mat::<f64>::from_fn(n, p, |i, j| a[(i, j)]);
    let svd = fa.thin_svd();
    let s = svd.s_diagonal();
    let k = n.min(p);
    let mut order: Vec<usize> = (0..k).collect();
    // faer returns nonincreasing values; sort anyway so callers never depend on it.
    order.sort_by(|&i, &j| s.read(j).total_cmp(&s.read(i)));

    let sigma_max = s.read(order[0]);
    if !sigma_max.is_finite() {
        return Err(Error::Numerical("thin_svd: SVD did not converge".into()));
    }
    let cutoff = rank_tolerance * sigma_max;
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| {
            let v = s.read(i);
            v > cutoff && v > 0.0
        })
        .collect();

    let (fu, fv) = (svd.u(), svd.v());
    let u = Matrix::from_fn(n, keep.len(), |i, j| fu.read(i, keep[j]));
    let v = Matrix::from_fn(p, keep.len(), |i, j| fv.read(i, keep[j]));
    let singulars: Vec<f64> = keep.iter().map(|&i| s.read(i)).collect();
    if !u.is_finite() || !v.is_finite() {
        return Err(Error::Numerical("thin_svd: non-finite singular vectors".into()));
    }
    Ok(ThinSvd {
        u,
        singulars,
        v,
        rank_tolerance,
    })
}

/// Sum of singular values.
pub fn nuclear_norm(a: &Matrix) -> Result<f64> {
    Ok(thin_svd(a, DEFAULT_RANK_TOL)?.nuclear_norm())
}

/// The minimal-norm element `U Vᵀ` of `∂‖a‖_*` (the `Z = 0` choice).
pub fn nuclear_norm_subgrad(a: &Matrix) -> Result<Matrix> {
    let svd = thin_svd(a, DEFAULT_RANK_TOL)?;
    svd.u.matmul_t(&svd.v)
}
