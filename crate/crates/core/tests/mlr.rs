mod common;

use common::{finite_diff, gaussian, labels_mod, max_abs_diff, rng, separable};
use ctreg::dataio::{one_hot, Dataset};
use ctreg::linalg::Matrix;
use ctreg::mlr::{
    accuracy, argmax_rows, fit, mlr_loss_and_grad, predict, softmax_probs, CoupledBackend, MlrObjective, WeightMatrix,
};
use ctreg::optim::{GdConfig, WolfeParams};
use ctreg::regularizers::{RegularizerKind, RegularizerSpec};

fn wm(m: Matrix) -> WeightMatrix {
    WeightMatrix::new(m).unwrap()
}

#[test]
fn softmax_examples() {
    let x = gaussian(5, 4, &mut rng(1));
    let p = softmax_probs(&WeightMatrix::zeros(3, 4), &x).unwrap();
    assert!(p.as_slice().iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));

    // logits (1000, 0) for a single sample
    let x1 = Matrix::from_rows(&[vec![1.0]]).unwrap();
    let w = wm(Matrix::from_rows(&[vec![1000.0], vec![0.0]]).unwrap());
    let p = softmax_probs(&w, &x1).unwrap();
    assert!(p.is_finite());
    assert!((p[(0, 0)] - 1.0).abs() < 1e-15 && p[(0, 1)] < 1e-300);

    let w = wm(gaussian(3, 4, &mut rng(2)).scaled(10.0));
    let p = softmax_probs(&w, &x).unwrap();
    for i in 0..5 {
        assert!((p.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn softmax_is_translation_invariant() {
    let mut r = rng(3);
    let x = gaussian(6, 4, &mut r);
    let w = gaussian(3, 4, &mut r);
    let shift = gaussian(1, 4, &mut r);
    let shifted = Matrix::from_fn(3, 4, |i, j| w[(i, j)] + shift[(0, j)]);
    let a = softmax_probs(&wm(w), &x).unwrap();
    let b = softmax_probs(&wm(shifted), &x).unwrap();
    assert!(max_abs_diff(&a, &b) < 1e-12);
}

#[test]
fn loss_examples() {
    let x = gaussian(10, 4, &mut rng(4));
    let y = one_hot(&labels_mod(10, 3), 3);
    let (l, _) = mlr_loss_and_grad(&WeightMatrix::zeros(3, 4), &x, &y).unwrap();
    assert!((l - 3f64.ln()).abs() < 1e-12);

    let w = gaussian(3, 4, &mut rng(5));
    let (l, g) = mlr_loss_and_grad(&wm(w.clone()), &x, &y).unwrap();
    assert!(l >= 0.0);
    let fd = finite_diff(&w, 1e-6, |w| mlr_loss_and_grad(&wm(w.clone()), &x, &y).unwrap().0);
    assert!(max_abs_diff(&g, &fd) < 1e-6);

    // identity features with margin 20 on the true class
    let xi = Matrix::identity(3);
    let yi = one_hot(&[0, 1, 2], 3);
    let (l, _) = mlr_loss_and_grad(&wm(Matrix::identity(3).scaled(20.0)), &xi, &yi).unwrap();
    assert!(l < 1e-3);
}

#[test]
fn objective_examples() {
    let mut r = rng(6);
    let x = gaussian(10, 4, &mut r);
    let y = one_hot(&labels_mod(10, 3), 3);
    let w = gaussian(3, 4, &mut r);

    let none = MlrObjective::new(&x, &y, RegularizerSpec::new(RegularizerKind::Coupled, 0.0).unwrap()).unwrap();
    assert_eq!(none.value_and_grad(&w).unwrap(), mlr_loss_and_grad(&wm(w.clone()), &x, &y).unwrap());

    let tik = MlrObjective::new(&x, &y, RegularizerSpec::new(RegularizerKind::Tikhonov, 0.3).unwrap()).unwrap();
    let zero = Matrix::zeros(3, 4);
    let (v, g) = tik.value_and_grad(&zero).unwrap();
    let (lv, lg) = mlr_loss_and_grad(&WeightMatrix::zeros(3, 4), &x, &y).unwrap();
    assert!((v - 3f64.ln()).abs() < 1e-12 && (v - lv).abs() < 1e-15);
    assert!(max_abs_diff(&g, &lg) < 1e-15);
}

#[test]
fn coupled_objective_gradient_matches_finite_differences() {
    for backend in [CoupledBackend::Factored, CoupledBackend::Dense] {
        let mut r = rng(7);
        // 4 samples, 6 features: X has full row rank
        let x = gaussian(4, 6, &mut r);
        let y = one_hot(&labels_mod(4, 2), 2);
        let spec = RegularizerSpec::new(RegularizerKind::Coupled, 0.4).unwrap();
        let obj = MlrObjective::with_backend(&x, &y, spec, backend).unwrap();
        let w = gaussian(2, 6, &mut r);
        let (_, g) = obj.value_and_grad(&w).unwrap();
        let fd = finite_diff(&w, 1e-5, |w| obj.value_and_grad(w).unwrap().0);
        assert!(max_abs_diff(&g, &fd) < 1e-5, "{backend:?}");
    }
}

#[test]
fn coupled_objective_is_convex_along_segments() {
    for seed in 0..50 {
        let mut r = rng(200 + seed);
        let x = gaussian(10, 6, &mut r);
        let y = one_hot(&labels_mod(10, 3), 3);
        let obj = MlrObjective::new(&x, &y, RegularizerSpec::new(RegularizerKind::Coupled, 0.5).unwrap()).unwrap();
        let (w1, w2) = (gaussian(3, 6, &mut r), gaussian(3, 6, &mut r));
        let t = rand::Rng::gen_range(&mut r, 0.0..1.0);
        let mut mid = w1.scaled(t);
        mid.axpy(1.0 - t, &w2).unwrap();
        let g = |w: &Matrix| obj.value_and_grad(w).unwrap().0;
        assert!(g(&mid) <= t * g(&w1) + (1.0 - t) * g(&w2) + 1e-9);
    }
}

#[test]
fn prediction_examples() {
    let x = gaussian(5, 3, &mut rng(8));
    assert_eq!(predict(&WeightMatrix::zeros(4, 3), &x).unwrap(), vec![0; 5]);
    let logits = Matrix::from_rows(&[vec![0.1, 0.9, 0.3], vec![2.0, -1.0, 0.0]]).unwrap();
    assert_eq!(argmax_rows(&logits), vec![1, 0]);
    assert_eq!(accuracy(&[0, 1, 1], &[0, 1, 0]), 2.0 / 3.0);
}

#[test]
fn separable_fit_reaches_full_training_accuracy() {
    for seed in 0..5 {
        let d: Dataset = separable(40, seed);
        let obj = MlrObjective::new(&d.x, &d.y, RegularizerSpec::none()).unwrap();
        let (w, rep) = fit(&obj, &GdConfig::default(), &WolfeParams::default()).unwrap();
        assert!(accuracy(&predict(&w, &d.x).unwrap(), &d.labels()) >= 0.99);
        assert!(rep.objective_trajectory.windows(2).all(|p| p[1] <= p[0] + 1e-10));
    }
}
