//! Benchmarks for the ctreg kernels; see `benches/`.

use ctreg::dataio::{Dataset, SyntheticSpec};
use ctreg::linalg::Matrix;

/// Training split of the default synthetic problem (c = 4, m = 400, R = 5).
pub fn synthetic(n_per_class: usize) -> Dataset {
    SyntheticSpec::new(n_per_class, 4, 400, 5, 0.1, 7)
        .generate()
        .expect("valid synthetic spec")
}

/// Deterministic dense matrix with entries in [-0.5, 0.5).
pub fn filled(rows: usize, cols: usize, salt: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |i, j| ((i * 7919 + j * 104729 + salt * 13) % 1000) as f64 / 1000.0 - 0.5)
}
