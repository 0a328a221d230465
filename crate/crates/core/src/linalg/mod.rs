//! Dense kernels: matrices, thin SVD, nuclear norms and tensor unfoldings.

pub(crate) mod matrix;
mod svd;
mod tensor;

pub use matrix::Matrix;
pub use svd::{nuclear_norm, nuclear_norm_subgrad, thin_svd, ThinSvd, DEFAULT_RANK_TOL};
pub use tensor::{coupled_tensor_norm, mode_n_fold, mode_n_unfold, DenseTensor};

/// All singular values of `a` (including zeros), nonincreasing.
pub fn singular_values(a: &Matrix) -> crate::Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(crate::Error::InvalidInput("singular_values: non-finite entries".into()));
    }
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let fa = faer::Mat::<f64>::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)]);
    let mut s = fa.singular_values();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}
