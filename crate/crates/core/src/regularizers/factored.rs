//! Nuclear norm of `[X, ξ]` for a fixed left block `X`, without a dense SVD
//! per evaluation.
//!
//! With the thin SVD `X = U_x D V_xᵀ` computed once and `ξ` in the column
//! space of `X`, write `Q = U_xᵀ ξ`. Then
//!
//! ```text
//! ‖[X, ξ]‖_*         = tr (D² + QQᵀ)^{1/2}
//! U V₂ᵀ (min-norm ∂) = U_x (D² + QQᵀ)^{-1/2} Q
//! ```
//!
//! Both matrix functions of `H = D² + QQᵀ` are evaluated from
//! `H^{-1/2} = (2/π) ∫₀^∞ (t² + H)⁻¹ dt`, where every resolvent applied to `Q`
//! reduces by Woodbury to a `c × c` solve:
//! `(t² + H)⁻¹ Q = Λ⁻¹ Q (I + QᵀΛ⁻¹Q)⁻¹` with `Λ = t² + D²` diagonal.
//! The integral is taken with the trapezoidal rule in `s = ln t` after a
//! sinh substitution, which gives double-exponential decay in the tails
//! while keeping the integrand analytic in a strip. One evaluation costs `O(nodes · r · c²)` instead of an SVD
//! of the `n × (m + c)` concatenation.

use std::f64::consts::FRAC_2_PI;

use super::ConcatSubgradient;
use crate::error::{Error, Result};
use crate::linalg::matrix::dot;
use crate::linalg::{thin_svd, Matrix, DEFAULT_RANK_TOL};

/// Trapezoidal rule after the substitution `s = s_c + a sinh u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Target error `exp(-depth)` relative to the integrand scale.
    pub depth: f64,
}

impl Default for Quadrature {
    /// Relative error near 1e-15.
    fn default() -> Self {
        Self { depth: 36.0 }
    }
}

impl Quadrature {
    /// Nodes `(s_k, w_k)` for `∫ F(s) ds` when `F` has its poles at
    /// `Re s ∈ [s1, s2]`, `Im s = ±π/2` and decays like `e^{-|s|}` outside.
    fn nodes(&self, s1: f64, s2: f64) -> Vec<(f64, f64)> {
        let centre = 0.5 * (s1 + s2);
        let half = 0.5 * (s2 - s1);
        let a = half.max(2.0);
        // half width of the analytic strip in u over the spectrum
        let v = (std::f64::consts::FRAC_PI_2 / (a * a + half * half).sqrt()).min(1.0);
        let h = 2.0 * std::f64::consts::PI * v / self.depth;
        let u_max = ((half + self.depth) / a).asinh();
        let k = (u_max / h).ceil() as i64;
        (-k..=k)
            .map(|i| {
                let u = i as f64 * h;
                (centre + a * u.sinh(), h * a * u.cosh())
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct CoupledFactor {
    rows: usize,
    cols: usize,
    u: Matrix,
    d: Vec<f64>,
    /// `D V_xᵀ`, `r × m`.
    dvt: Matrix,
    quad: Quadrature,
}

impl CoupledFactor {
    pub fn new(x: &Matrix) -> Result<Self> {
        Self::with_quadrature(x, Quadrature::default())
    }

    pub fn with_quadrature(x: &Matrix, quad: Quadrature) -> Result<Self> {
        let svd = thin_svd(x, DEFAULT_RANK_TOL)?;
        let dvt = svd.v.transpose().scale_rows(&svd.singulars);
        Ok(Self {
            rows: x.rows(),
            cols: x.cols(),
            u: svd.u,
            d: svd.singulars,
            dvt,
            quad,
        })
    }

    pub fn rank(&self) -> usize {
        self.d.len()
    }

    /// `[X, ξ]` stays in the span of `U_x` for every `ξ` only when `X` has
    /// full row rank.
    pub fn has_full_row_rank(&self) -> bool {
        self.rank() == self.rows
    }

    /// `g(ξ) = ‖[X, ξ]‖_*` and its minimal-norm subgradient. Requires `X` with
    /// full row rank.
    pub fn concat_value_and_subgrad(&self, xi: &Matrix) -> Result<ConcatSubgradient> {
        if xi.rows() != self.rows {
            return Err(Error::InvalidInput(format!(
                "xi has {} rows, x has {}",
                xi.rows(),
                self.rows
            )));
        }
        if !self.has_full_row_rank() {
            return Err(Error::InvalidInput(format!(
                "factored evaluation needs full row rank, x has rank {} < {}",
                self.rank(),
                self.rows
            )));
        }
        let q = self.u.t_matmul(xi)?;
        let (value, g) = sqrt_trace_and_grad(&self.d, &q, self.quad);
        Ok(ConcatSubgradient {
            value,
            subgrad: self.u.matmul(&g)?,
        })
    }

    /// `R(W) = ‖[X, X Wᵀ]‖_*` and `∇R(W)` for `W` of shape `c × m`.
    pub fn mlr_value_and_grad(&self, w: &Matrix) -> Result<(f64, Matrix)> {
        if w.cols() != self.cols {
            return Err(Error::shape(
                "CoupledFactor::mlr_value_and_grad",
                format!("{} columns in w", self.cols),
                format!("{}", w.cols()),
            ));
        }
        if self.rank() == 0 {
            return Ok((0.0, Matrix::zeros(w.rows(), w.cols())));
        }
        // U_xᵀ X Wᵀ = D V_xᵀ Wᵀ
        let q = self.dvt.matmul_t(w)?;
        let (value, g) = sqrt_trace_and_grad(&self.d, &q, self.quad);
        // (X Wᵀ ↦ R) pulled back through W: (U_x G)ᵀ X = Gᵀ D V_xᵀ
        Ok((value, g.t_matmul(&self.dvt)?))
    }
}

/// `(tr (D² + QQᵀ)^{1/2}, (D² + QQᵀ)^{-1/2} Q)` for positive `d`.
pub(crate) fn sqrt_trace_and_grad(d: &[f64], q: &Matrix, quad: Quadrature) -> (f64, Matrix) {
    let (r, c) = q.shape();
    debug_assert_eq!(r, d.len());
    let base: f64 = d.iter().sum();
    if r == 0 || c == 0 {
        return (base, Matrix::zeros(r, c));
    }
    let d2: Vec<f64> = d.iter().map(|v| v * v).collect();
    let lam_min = d2.iter().cloned().fold(f64::INFINITY, f64::min);
    let lam_max = d2.iter().cloned().fold(0.0, f64::max) + q.as_slice().iter().map(|v| v * v).sum::<f64>();
    let nodes = quad.nodes(0.5 * lam_min.ln(), 0.5 * lam_max.ln());

    // upper-triangle pairs (a, b), a ≤ b, and the column of q_ja q_jb per pair
    let pairs: Vec<(usize, usize)> = (0..c).flat_map(|a| (a..c).map(move |b| (a, b))).collect();
    let outer: Vec<Vec<f64>> = pairs
        .iter()
        .map(|&(a, b)| (0..r).map(|j| q[(j, a)] * q[(j, b)]).collect())
        .collect();
    // s[e][j] accumulates Σ_k ω_k t_k (t_k² + d_j²)⁻¹ (M_k⁻¹)_e
    let mut acc = vec![vec![0.0; r]; pairs.len()];
    let mut extra = 0.0;
    let mut l = vec![0.0; r];
    let mut l2 = vec![0.0; r];
    let mut m = vec![0.0; c * c];
    let mut p = vec![0.0; c * c];
    for &(s, weight) in &nodes {
        let t = s.exp();
        let t2 = t * t;
        for ((lv, l2v), &dv) in l.iter_mut().zip(l2.iter_mut()).zip(&d2) {
            *lv = 1.0 / (t2 + dv);
            *l2v = *lv * *lv;
        }
        // M = I + QᵀΛ⁻¹Q, P = QᵀΛ⁻²Q
        for (&(a, b), col) in pairs.iter().zip(&outer) {
            let mv = dot(col, &l);
            let pv = dot(col, &l2);
            m[a * c + b] = mv;
            m[b * c + a] = mv;
            p[a * c + b] = pv;
            p[b * c + a] = pv;
        }
        for a in 0..c {
            m[a * c + a] += 1.0;
        }
        let minv = spd_inverse(&mut m, c);
        // tr(M⁻¹ P)
        let tr: f64 = minv.iter().zip(&p).map(|(x, y)| x * y).sum();
        extra += weight * t2 * t * tr;
        let wt = weight * t;
        for (&(a, b), row) in pairs.iter().zip(acc.iter_mut()) {
            let coef = wt * minv[a * c + b];
            for (s, &lv) in row.iter_mut().zip(&l) {
                *s += coef * lv;
            }
        }
    }
    // grad_j = q_j S_j with S_j symmetric
    let mut grad = Matrix::zeros(r, c);
    for (&(a, b), row) in pairs.iter().zip(&acc) {
        for j in 0..r {
            let s = FRAC_2_PI * row[j];
            grad[(j, a)] += s * q[(j, b)];
            if a != b {
                grad[(j, b)] += s * q[(j, a)];
            }
        }
    }
    (base + FRAC_2_PI * extra, grad)
}

/// Inverse of a small symmetric positive definite matrix via Cholesky.
/// `a` is overwritten with its factor.
fn spd_inverse(a: &mut [f64], n: usize) -> Vec<f64> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        let l = diag.max(f64::MIN_POSITIVE).sqrt();
        a[j * n + j] = l;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / l;
        }
    }
    // columns of L⁻ᵀ L⁻¹ by solving against unit vectors
    let mut inv = vec![0.0; n * n];
    let mut y = vec![0.0; n];
    for col in 0..n {
        for i in 0..n {
            let mut v = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                v -= a[i * n + k] * y[k];
            }
            y[i] = v / a[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in i + 1..n {
                v -= a[k * n + i] * inv[k * n + col];
            }
            inv[i * n + col] = v / a[i * n + i];
        }
    }
    inv
}
