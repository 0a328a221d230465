mod common;

use common::{gaussian, nuclear_norm_oracle, rng};
use ctreg::linalg::{
    coupled_tensor_norm, mode_n_fold, mode_n_unfold, nuclear_norm, nuclear_norm_subgrad, thin_svd, DenseTensor, Matrix,
    DEFAULT_RANK_TOL,
};
use proptest::prelude::*;

fn cube() -> DenseTensor {
    // entry(i,j,k) = i + 2j + 4k + 1 with zero-based indices, values 1..8
    DenseTensor::from_fn(vec![2, 2, 2], |ix| (ix[0] + 2 * ix[1] + 4 * ix[2] + 1) as f64).unwrap()
}

/// Places every entry at (i_n, Σ_{k≠n} i_k J_k) with the lowest remaining
/// mode varying fastest.
fn brute_force_unfold(t: &DenseTensor, mode: usize) -> Matrix {
    let shape = t.shape().to_vec();
    let cols: usize = shape.iter().enumerate().filter(|(k, _)| *k != mode).map(|(_, s)| s).product();
    let mut out = Matrix::zeros(shape[mode], cols);
    let total: usize = shape.iter().product();
    for lin in 0..total {
        let mut idx = Vec::new();
        let mut rest = lin;
        for &s in &shape {
            idx.push(rest % s);
            rest /= s;
        }
        let mut col = 0;
        let mut jk = 1;
        for k in 0..shape.len() {
            if k == mode {
                continue;
            }
            col += idx[k] * jk;
            jk *= shape[k];
        }
        out[(idx[mode], col)] = t.get(&idx);
    }
    out
}

#[test]
fn svd_small_examples() {
    let s = thin_svd(&Matrix::identity(2), DEFAULT_RANK_TOL).unwrap();
    assert_eq!(s.rank(), 2);
    assert_eq!(s.singulars, vec![1.0, 1.0]);
    let s = thin_svd(&Matrix::from_diag(&[3.0, 0.0]), 1e-12).unwrap();
    assert_eq!(s.rank(), 1);
    assert!((s.singulars[0] - 3.0).abs() < 1e-14);
}

#[test]
fn svd_reconstructs_seeded_matrix() {
    for seed in 0..10 {
        let a = gaussian(4, 3, &mut rng(seed));
        let s = thin_svd(&a, DEFAULT_RANK_TOL).unwrap();
        let err = s.reconstruct().sub(&a).unwrap().frobenius_norm();
        assert!(err <= 1e-8 * a.frobenius_norm());
        let utu = s.u.t_matmul(&s.u).unwrap();
        let vtv = s.v.t_matmul(&s.v).unwrap();
        assert!(utu.sub(&Matrix::identity(s.rank())).unwrap().max_abs() < 1e-10 * 4.0);
        assert!(vtv.sub(&Matrix::identity(s.rank())).unwrap().max_abs() < 1e-10 * 4.0);
        assert!(s.singulars.windows(2).all(|p| p[0] >= p[1]));
    }
}

#[test]
fn nuclear_norm_examples() {
    assert!((nuclear_norm(&Matrix::identity(2)).unwrap() - 2.0).abs() < 1e-14);
    let a = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, -4.0]]).unwrap();
    assert!((nuclear_norm(&a).unwrap() - 7.0).abs() < 1e-14);
}

#[test]
fn nuclear_norm_matches_eigenvalue_oracle() {
    for seed in 0..10 {
        let a = gaussian(5, 3, &mut rng(100 + seed));
        let expected = nuclear_norm_oracle(&a);
        let got = nuclear_norm(&a).unwrap();
        assert!((got - expected).abs() <= 1e-8 * expected, "{got} vs {expected}");
    }
}

#[test]
fn subgradient_examples() {
    let g = nuclear_norm_subgrad(&Matrix::identity(2)).unwrap();
    assert!(g.sub(&Matrix::identity(2)).unwrap().max_abs() < 1e-14);
    let g = nuclear_norm_subgrad(&Matrix::zeros(3, 2)).unwrap();
    assert_eq!(g, Matrix::zeros(3, 2));
}

#[test]
fn subgradient_inequality_on_full_rank_square() {
    let mut r = rng(7);
    let a = gaussian(4, 4, &mut r);
    let g = nuclear_norm_subgrad(&a).unwrap();
    let na = nuclear_norm(&a).unwrap();
    for _ in 0..20 {
        let b = gaussian(4, 4, &mut r);
        let slack = nuclear_norm(&b).unwrap() - na - g.dot(&b.sub(&a).unwrap()).unwrap();
        assert!(slack >= -1e-9, "slack {slack}");
    }
}

#[test]
fn two_way_tensor_unfolds_to_itself() {
    let m = gaussian(3, 4, &mut rng(1));
    let t = DenseTensor::from_fn(vec![3, 4], |ix| m[(ix[0], ix[1])]).unwrap();
    assert_eq!(mode_n_unfold(&t, 0).unwrap(), m);
}

#[test]
fn cube_unfoldings_match_brute_force() {
    let t = cube();
    for mode in 0..3 {
        assert_eq!(mode_n_unfold(&t, mode).unwrap(), brute_force_unfold(&t, mode), "mode {mode}");
    }
    let m0 = mode_n_unfold(&t, 0).unwrap();
    assert_eq!(m0.row(0), &[1.0, 3.0, 5.0, 7.0]);
    let m2 = mode_n_unfold(&t, 2).unwrap();
    assert_eq!(m2.row(1), &[5.0, 6.0, 7.0, 8.0]);
}

#[test]
fn fold_round_trips_and_rejects_bad_shapes() {
    let t = cube();
    for mode in 0..3 {
        let back = mode_n_fold(&mode_n_unfold(&t, mode).unwrap(), mode, t.shape()).unwrap();
        assert_eq!(back, t);
    }
    let m = mode_n_unfold(&t, 0).unwrap();
    assert!(mode_n_fold(&m, 0, &[2, 2, 3]).is_err());
    assert!(mode_n_unfold(&t, 3).is_err());
}

#[test]
fn coupled_norm_examples() {
    let mut r = rng(5);
    let t = DenseTensor::from_fn(vec![3, 3, 3], |_| rand::Rng::sample(&mut r, rand_distr::StandardNormal)).unwrap();
    let unfold_norms: Vec<f64> = (0..3).map(|k| nuclear_norm(&brute_force_unfold(&t, k)).unwrap()).collect();
    let zero = Matrix::zeros(3, 2);
    let v = coupled_tensor_norm(&t, &zero, 1).unwrap();
    assert!((v - unfold_norms.iter().sum::<f64>()).abs() < 1e-10);

    let a = gaussian(3, 2, &mut r);
    for mode in 0..3 {
        let coupled = nuclear_norm(&brute_force_unfold(&t, mode).hcat(&a).unwrap()).unwrap();
        let others: f64 = (0..3).filter(|&k| k != mode).map(|k| unfold_norms[k]).sum();
        let v = coupled_tensor_norm(&t, &a, mode).unwrap();
        assert!((v - coupled - others).abs() < 1e-10);
    }
    assert!(coupled_tensor_norm(&t, &Matrix::zeros(2, 2), 0).is_err());

    let m = gaussian(3, 5, &mut r);
    let t2 = DenseTensor::from_fn(vec![3, 5], |ix| m[(ix[0], ix[1])]).unwrap();
    let v = coupled_tensor_norm(&t2, &Matrix::zeros(3, 0), 0).unwrap();
    assert!((v - 2.0 * nuclear_norm(&m).unwrap()).abs() < 1e-10);
}

fn small_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-10.0f64..10.0, r * c).prop_map(move |v| Matrix::from_vec(r, c, v).unwrap())
    })
}

fn tensor() -> impl Strategy<Value = DenseTensor> {
    proptest::collection::vec(1usize..=5, 1..=4).prop_flat_map(|shape| {
        let n: usize = shape.iter().product();
        proptest::collection::vec(-5.0f64..5.0, n).prop_map(move |v| DenseTensor::new(shape.clone(), v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nuclear_norm_is_a_norm(a in small_matrix(), s in -3.0f64..3.0, seed in 0u64..1000) {
        let b = gaussian(a.rows(), a.cols(), &mut rng(seed));
        let (na, nb) = (nuclear_norm(&a).unwrap(), nuclear_norm(&b).unwrap());
        let nab = nuclear_norm(&a.add(&b).unwrap()).unwrap();
        prop_assert!(nab <= na + nb + 1e-9 * (1.0 + na + nb));
        prop_assert!((nuclear_norm(&a.scaled(s)).unwrap() - s.abs() * na).abs() <= 1e-9 * (1.0 + na));
        prop_assert!(na >= 0.0);
    }

    #[test]
    fn zero_padding_preserves_nuclear_norm(a in small_matrix(), extra in 0usize..4) {
        let padded = a.hcat(&Matrix::zeros(a.rows(), extra)).unwrap();
        let (n0, n1) = (nuclear_norm(&a).unwrap(), nuclear_norm(&padded).unwrap());
        prop_assert!((n0 - n1).abs() <= 1e-10 * (1.0 + n0));
    }

    #[test]
    fn fold_inverts_unfold(t in tensor(), mode_pick in 0usize..4) {
        let mode = mode_pick % t.ndim();
        let m = mode_n_unfold(&t, mode).unwrap();
        prop_assert_eq!(m.rows(), t.shape()[mode]);
        prop_assert_eq!(mode_n_fold(&m, mode, t.shape()).unwrap(), t);
    }
}
