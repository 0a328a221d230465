use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// One affine layer, `out × in` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Fully connected network, ReLU between layers and identity on the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    sizes: Vec<usize>,
    layers: Vec<Layer>,
}

impl MlpParams {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidInput("network needs at least one layer".into()));
        }
        let mut sizes = vec![layers[0].weights.cols()];
        for (k, l) in layers.iter().enumerate() {
            if l.weights.cols() != *sizes.last().unwrap() || l.bias.len() != l.weights.rows() {
                return Err(Error::InvalidInput(format!("layer {k} does not chain with its input")));
            }
            if !l.weights.is_finite() || l.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::InvalidInput(format!("layer {k} has non-finite parameters")));
            }
            sizes.push(l.weights.rows());
        }
        Ok(Self { sizes, layers })
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidInput(format!("bad layer sizes {sizes:?}")));
        }
        let layers = sizes
            .windows(2)
            .map(|w| Layer {
                weights: Matrix::zeros(w[1], w[0]),
                bias: vec![0.0; w[1]],
            })
            .collect();
        Ok(Self {
            sizes: sizes.to_vec(),
            layers,
        })
    }

    /// He initialization: weights `N(0, 2 / fan_in)`, zero biases.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Self> {
        let mut p = Self::zeros(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in &mut p.layers {
            let normal = Normal::new(0.0, (2.0 / l.weights.cols() as f64).sqrt()).expect("positive fan-in");
            for w in l.weights.as_mut_slice() {
                *w = normal.sample(&mut rng);
            }
        }
        Ok(p)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.as_slice().len() + l.bias.len()).sum()
    }

    /// Layer by layer: weights row-major, then bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::shape(
                "MlpParams::set_flat",
                format!("{} parameters", self.num_params()),
                format!("{}", flat.len()),
            ));
        }
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.as_slice().len();
            l.weights.as_mut_slice().copy_from_slice(&flat[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[off..off + nb]);
            off += nb;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}

/// Inputs of each layer, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Matrix>,
}

fn affine(a: &Matrix, l: &Layer) -> Result<Matrix> {
    let mut z = a.matmul_t(&l.weights)?;
    for i in 0..z.rows() {
        for (v, b) in z.row_mut(i).iter_mut().zip(&l.bias) {
            *v += b;
        }
    }
    Ok(z)
}

fn check_input(theta: &MlpParams, x: &Matrix) -> Result<()> {
    if x.cols() != theta.sizes[0] {
        return Err(Error::InvalidInput(format!(
            "input has {} features, network expects {}",
            x.cols(),
            theta.sizes[0]
        )));
    }
    Ok(())
}

/// Logits `f_θ(X)`, `n × c`.
pub fn mlp_forward(theta: &MlpParams, x: &Matrix) -> Result<Matrix> {
    Ok(forward_cached(theta, x)?.0)
}

pub fn forward_cached(theta: &MlpParams, x: &Matrix) -> Result<(Matrix, ForwardCache)> {
    check_input(theta, x)?;
    let mut inputs = Vec::with_capacity(theta.layers.len());
    let mut a = x.clone();
    let last = theta.layers.len() - 1;
    for (k, l) in theta.layers.iter().enumerate() {
        let mut z = affine(&a, l)?;
        if k < last {
            z.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
        }
        inputs.push(a);
        a = z;
    }
    Ok((a, ForwardCache { inputs }))
}

/// Gradient of a loss with respect to the flattened parameters given its
/// gradient `dlogits` with respect to the logits. The ReLU derivative at 0
/// is taken as 0.
pub fn mlp_backward(theta: &MlpParams, cache: &ForwardCache, dlogits: &Matrix, out: &mut [f64]) -> Result<()> {
    if out.len() != theta.num_params() {
        return Err(Error::InvalidInput("gradient buffer has the wrong length".into()));
    }
    let mut offsets = Vec::with_capacity(theta.layers.len());
    let mut off = 0;
    for l in &theta.layers {
        offsets.push(off);
        off += l.weights.as_slice().len() + l.bias.len();
    }
    let mut delta = dlogits.clone();
    for k in (0..theta.layers.len()).rev() {
        let l = &theta.layers[k];
        let a = &cache.inputs[k];
        let dw = delta.t_matmul(a)?;
        let nw = dw.as_slice().len();
        let o = offsets[k];
        for (g, d) in out[o..o + nw].iter_mut().zip(dw.as_slice()) {
            *g += d;
        }
        for j in 0..delta.cols() {
            let s: f64 = (0..delta.rows()).map(|i| delta[(i, j)]).sum();
            out[o + nw + j] += s;
        }
        if k > 0 {
            let mut prev = delta.matmul(&l.weights)?;
            // the stored input is post-ReLU, so a zero entry marks an inactive unit
            for (p, &ai) in prev.as_mut_slice().iter_mut().zip(a.as_slice()) {
                if ai <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testing::random_matrix;

    #[test]
    fn zero_network_gives_zero_logits() {
        let p = MlpParams::zeros(&[3, 4, 2]).unwrap();
        let out = mlp_forward(&p, &random_matrix(5, 3, 1)).unwrap();
        assert_eq!(out, Matrix::zeros(5, 2));
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let p = MlpParams::new(vec![Layer {
            weights: Matrix::identity(3),
            bias: vec![0.0; 3],
        }])
        .unwrap();
        let x = random_matrix(4, 3, 2);
        assert_eq!(mlp_forward(&p, &x).unwrap(), x);
    }

    #[test]
    fn flat_round_trip() {
        let p = MlpParams::init(&[3, 4, 2], 5).unwrap();
        let mut q = MlpParams::zeros(&[3, 4, 2]).unwrap();
        q.set_flat(&p.to_flat()).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.num_params(), 3 * 4 + 4 + 4 * 2 + 2);
    }

    #[test]
    fn mismatched_layers_are_rejected() {
        let bad = vec![
            Layer {
                weights: Matrix::zeros(4, 3),
                bias: vec![0.0; 4],
            },
            Layer {
                weights: Matrix::zeros(2, 5),
                bias: vec![0.0; 2],
            },
        ];
        assert!(MlpParams::new(bad).is_err());
        let p = MlpParams::zeros(&[3, 2]).unwrap();
        assert!(mlp_forward(&p, &Matrix::zeros(1, 4)).is_err());
    }
}
