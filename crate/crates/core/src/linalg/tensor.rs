//! N-way tensors and their mode-n unfoldings.
//!
//! Entries are stored with the first index varying fastest. The unfolding
//! `X₍ₙ₎` places entry `(i₁,…,i_N)` at row `iₙ` and column
//! `Σ_{k≠n} i_k · J_k`, where `J_k` is the product of the sizes of the modes
//! below `k` other than `n` (the Kolda–Bader convention). Modes are zero-based
//! in this API.

use serde::{Deserialize, Serialize};

use super::{nuclear_norm, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::InvalidInput("tensor needs at least one mode".into()));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::shape(
                "DenseTensor::new",
                format!("{len} entries for shape {shape:?}"),
                format!("{}", data.len()),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("tensor has non-finite entries".into()));
        }
        Ok(Self { shape, data })
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(len);
        for lin in 0..len {
            multi_index(lin, &shape, &mut idx);
            data.push(f(&idx));
        }
        Self::new(shape, data)
    }

    /// Stacks samples along a new leading mode: row `i` of `x` holds sample
    /// `i` vectorized with its first index fastest. The mode-0 unfolding of
    /// the result is `x` itself.
    pub fn from_samples(x: &Matrix, sample_shape: &[usize]) -> Result<Self> {
        let m: usize = sample_shape.iter().product();
        if m != x.cols() {
            return Err(Error::shape(
                "DenseTensor::from_samples",
                format!("{m} features for sample shape {sample_shape:?}"),
                format!("{}", x.cols()),
            ));
        }
        let mut shape = vec![x.rows()];
        shape.extend_from_slice(sample_shape);
        mode_n_fold(x, 0, &shape)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[linear_index(idx, &self.shape)]
    }
}

fn multi_index(mut lin: usize, shape: &[usize], out: &mut [usize]) {
    for (o, &s) in out.iter_mut().zip(shape) {
        *o = lin % s;
        lin /= s;
    }
}

fn linear_index(idx: &[usize], shape: &[usize]) -> usize {
    debug_assert_eq!(idx.len(), shape.len());
    let mut lin = 0;
    let mut stride = 1;
    for (&i, &s) in idx.iter().zip(shape) {
        debug_assert!(i < s);
        lin += i * stride;
        stride *= s;
    }
    lin
}

/// Column strides of the mode-`mode` unfolding, zero at `mode` itself.
fn unfolding_strides(shape: &[usize], mode: usize) -> Vec<usize> {
    let mut strides = vec![0; shape.len()];
    let mut acc = 1;
    for (k, &s) in shape.iter().enumerate() {
        if k != mode {
            strides[k] = acc;
            acc *= s;
        }
    }
    strides
}

pub fn mode_n_unfold(t: &DenseTensor, mode: usize) -> Result<Matrix> {
    let shape = t.shape();
    if mode >= shape.len() {
        return Err(Error::InvalidMode {
            mode,
            ndim: shape.len(),
        });
    }
    let rows = shape[mode];
    let cols = if rows == 0 { 0 } else { t.data.len() / rows };
    let strides = unfolding_strides(shape, mode);
    let mut out = Matrix::zeros(rows, cols);
    let mut idx = vec![0usize; shape.len()];
    for (lin, &v) in t.data.iter().enumerate() {
        multi_index(lin, shape, &mut idx);
        let col: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        out[(idx[mode], col)] = v;
    }
    Ok(out)
}

/// Inverse of [`mode_n_unfold`].
pub fn mode_n_fold(m: &Matrix, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
    if mode >= shape.len() {
        return Err(Error::InvalidMode {
            mode,
            ndim: shape.len(),
        });
    }
    let len: usize = shape.iter().product();
    let rows = shape[mode];
    let cols = if rows == 0 { 0 } else { len / rows };
    if m.shape() != (rows, cols) {
        return Err(Error::InvalidInput(format!(
            "cannot fold a {}x{} matrix into shape {shape:?} along mode {mode}",
            m.rows(),
            m.cols()
        )));
    }
    let strides = unfolding_strides(shape, mode);
    let mut data = vec![0.0; len];
    let mut idx = vec![0usize; shape.len()];
    for (lin, slot) in data.iter_mut().enumerate() {
        multi_index(lin, shape, &mut idx);
        let col: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        *slot = m[(idx[mode], col)];
    }
    DenseTensor::new(shape.to_vec(), data)
}

/// `‖[X₍ₙ₎, a]‖_* + Σ_{i≠n} ‖X₍ᵢ₎‖_*` for a matrix `a` coupled to `t` at `mode`.
pub fn coupled_tensor_norm(t: &DenseTensor, a: &Matrix, mode: usize) -> Result<f64> {
    let coupled = mode_n_unfold(t, mode)?;
    if a.rows() != coupled.rows() {
        return Err(Error::InvalidInput(format!(
            "coupled matrix has {} rows but mode {mode} has size {}",
            a.rows(),
            coupled.rows()
        )));
    }
    let mut total = nuclear_norm(&coupled.hcat(a)?)?;
    for i in (0..t.ndim()).filter(|&i| i != mode) {
        total += nuclear_norm(&mode_n_unfold(t, i)?)?;
    }
    Ok(total)
}
