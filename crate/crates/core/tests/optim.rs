mod common;

use common::{gaussian, labels_mod, rng, separable};
use ctreg::dataio::one_hot;
use ctreg::dnn::{train_sgd, SgdTrainConfig};
use ctreg::linalg::{nuclear_norm, nuclear_norm_subgrad, Matrix};
use ctreg::mlr::{accuracy, fit, predict, MlrObjective};
use ctreg::optim::{
    gradient_descent, sgd_momentum, subgradient_descent, wolfe_linesearch, GdConfig, SgdConfig, StepDecay, StepRule,
    StopReason, SubgradConfig, WolfeParams,
};
use ctreg::regularizers::{RegularizerKind, RegularizerSpec};
use ctreg::Error;

fn quad(a: &Matrix, b: &[f64], x: &[f64]) -> (f64, Vec<f64>) {
    let n = b.len();
    let mut g = vec![0.0; n];
    let mut f = 0.0;
    for i in 0..n {
        let ax: f64 = (0..n).map(|j| a[(i, j)] * x[j]).sum();
        g[i] = ax - b[i];
        f += 0.5 * x[i] * ax - b[i] * x[i];
    }
    (f, g)
}

#[test]
fn wolfe_takes_unit_step_on_scalar_quadratic() {
    // φ(α) = ½(1 − α)²
    let r = wolfe_linesearch(|a| Ok((0.5 * (1.0 - a) * (1.0 - a), a - 1.0)), 0.5, -1.0, &WolfeParams::default()).unwrap();
    assert_eq!(r.step, 1.0);
    assert!(r.warning.is_none());
}

#[test]
fn wolfe_conditions_on_random_quadratics() {
    let p = WolfeParams::default();
    for seed in 0..30 {
        let mut r = rng(seed);
        let n = 6;
        let g = gaussian(n, n, &mut r);
        let mut a = g.t_matmul(&g).unwrap();
        for i in 0..n {
            a[(i, i)] += 0.1;
        }
        let b = gaussian(1, n, &mut r).into_vec();
        let x0 = gaussian(1, n, &mut r).scaled(3.0).into_vec();
        let (f0, g0) = quad(&a, &b, &x0);
        let d: Vec<f64> = g0.iter().map(|v| -v).collect();
        let slope0: f64 = g0.iter().zip(&d).map(|(u, v)| u * v).sum();
        let phi = |alpha: f64| {
            let x: Vec<f64> = x0.iter().zip(&d).map(|(x, d)| x + alpha * d).collect();
            let (f, g) = quad(&a, &b, &x);
            (f, g.iter().zip(&d).map(|(u, v)| u * v).sum::<f64>())
        };
        let res = wolfe_linesearch(|alpha| Ok(phi(alpha)), f0, slope0, &p).unwrap();
        let (f, s) = phi(res.step);
        assert!(res.step > 0.0);
        assert!(f <= f0 + p.c1 * res.step * slope0 + 1e-12 * f0.abs(), "seed {seed}");
        if res.warning.is_none() {
            assert!(s.abs() <= p.c2 * slope0.abs() + 1e-12, "seed {seed}: slope {s} vs {slope0}");
        }
    }
}

#[test]
fn wolfe_rejects_ascent_direction() {
    let err = wolfe_linesearch(|a| Ok((a, 1.0)), 0.0, 1.0, &WolfeParams::default()).unwrap_err();
    assert!(matches!(err, Error::NotDescent(_)));
    assert!(wolfe_linesearch(|a| Ok((a, 0.0)), 0.0, 0.0, &WolfeParams::default()).is_err());
}

#[test]
fn gd_minimizes_half_squared_norm() {
    let w0 = gaussian(3, 4, &mut rng(5));
    let (w, rep) = gradient_descent(
        |w| Ok((0.5 * w.dot(w)?, w.clone())),
        w0,
        &GdConfig::default(),
        &WolfeParams::default(),
    )
    .unwrap();
    assert_eq!(rep.stop_reason, StopReason::GradTol);
    assert!(w.frobenius_norm() <= 1e-4);
    assert!(rep.final_grad_norm <= 1e-4);
}

#[test]
fn gd_fits_separable_data() {
    let d = separable(60, 11);
    let obj = MlrObjective::new(&d.x, &d.y, RegularizerSpec::none()).unwrap();
    let (w, _) = fit(&obj, &GdConfig::default(), &WolfeParams::default()).unwrap();
    assert_eq!(accuracy(&predict(&w, &d.x).unwrap(), &d.labels()), 1.0);
}

#[test]
fn gd_trajectories_are_monotone() {
    for seed in 0..5 {
        let mut r = rng(100 + seed);
        let x = gaussian(12, 5, &mut r);
        let y = one_hot(&labels_mod(12, 3), 3);
        for kind in [RegularizerKind::Coupled, RegularizerKind::Tikhonov, RegularizerKind::None] {
            let obj = MlrObjective::new(&x, &y, RegularizerSpec::new(kind, 0.1).unwrap()).unwrap();
            let cfg = GdConfig {
                max_iters: 200,
                ..GdConfig::default()
            };
            let (_, rep) = fit(&obj, &cfg, &WolfeParams::default()).unwrap();
            for w in rep.objective_trajectory.windows(2) {
                assert!(w[1] <= w[0], "seed {seed} {kind:?}: {} then {}", w[0], w[1]);
            }
        }
    }
}

#[test]
fn subgradient_on_quadratic_is_monotone() {
    let x0 = gaussian(3, 3, &mut rng(8));
    let cfg = SubgradConfig {
        step_rule: StepRule::Harmonic { scale: 0.5 },
        grad_tol: 1e-12,
        max_iters: 40,
    };
    let (x, rep) = subgradient_descent(|x| Ok((0.5 * x.dot(x)?, x.clone())), x0.clone(), &cfg).unwrap();
    for w in rep.best_trajectory.windows(2) {
        assert!(w[1] <= w[0]);
    }
    assert!(x.frobenius_norm() < x0.frobenius_norm());
    assert_eq!(rep.best_value, 0.5 * x.dot(&x).unwrap());
}

/// Householder reflection `I − 2 v vᵀ / ‖v‖²`.
fn reflector(v: &[f64]) -> Matrix {
    let nn: f64 = v.iter().map(|a| a * a).sum();
    Matrix::from_fn(v.len(), v.len(), |i, j| f64::from(u8::from(i == j)) - 2.0 * v[i] * v[j] / nn)
}

#[test]
fn subgradient_reaches_singular_value_thresholding_optimum() {
    // min ‖X‖_* + ½‖X − A‖² is solved by shrinking the singular values of A by 1
    let s = [3.0, 1.5, 0.5];
    let u = reflector(&[1.0, -2.0, 0.5, 1.0]);
    let v = reflector(&[0.3, 1.0, -1.0]);
    let core = Matrix::from_fn(4, 3, |i, j| if i == j { s[i] } else { 0.0 });
    let a = u.matmul(&core).unwrap().matmul_t(&v).unwrap();
    let optimum: f64 = s.iter().map(|&x| (x - 1.0f64).max(0.0) + 0.5 * x.min(1.0).powi(2)).sum();

    let cfg = SubgradConfig {
        step_rule: StepRule::Harmonic { scale: 1.0 },
        grad_tol: 1e-10,
        max_iters: 500,
    };
    let (_, rep) = subgradient_descent(
        |x| {
            let d = x.sub(&a)?;
            let mut g = nuclear_norm_subgrad(x)?;
            g.axpy(1.0, &d)?;
            Ok((nuclear_norm(x)? + 0.5 * d.dot(&d)?, g))
        },
        Matrix::zeros(4, 3),
        &cfg,
    )
    .unwrap();
    assert!(rep.best_value >= optimum - 1e-9);
    assert!(rep.best_value <= 1.05 * optimum, "{} vs {optimum}", rep.best_value);
}

#[test]
fn subgradient_with_no_iterations_returns_start() {
    let x0 = gaussian(2, 3, &mut rng(9));
    let cfg = SubgradConfig {
        max_iters: 0,
        ..SubgradConfig::default()
    };
    let (x, rep) = subgradient_descent(|x| Ok((0.5 * x.dot(x)?, x.clone())), x0.clone(), &cfg).unwrap();
    assert_eq!(x, x0);
    assert_eq!(rep.iterations, 0);
}

#[test]
fn full_batch_sgd_without_momentum_is_gradient_descent() {
    let target = [1.0, -2.0, 0.5];
    let grad = |p: &[f64], _: &[usize], g: &mut [f64]| {
        let mut f = 0.0;
        for ((gi, pi), t) in g.iter_mut().zip(p).zip(&target) {
            *gi = pi - t;
            f += 0.5 * (pi - t) * (pi - t);
        }
        Ok(f)
    };
    let cfg = SgdConfig {
        schedule: StepDecay::constant(0.3),
        momentum: 0.0,
        batch_size: 10,
        epochs: 7,
        seed: 1,
    };
    let mut p = vec![0.0; 3];
    sgd_momentum(&mut p, 4, grad, &cfg, 0).unwrap();
    let mut q = vec![0.0; 3];
    for _ in 0..7 {
        for (qi, t) in q.iter_mut().zip(&target) {
            *qi -= 0.3 * (*qi - t);
        }
    }
    for (a, b) in p.iter().zip(&q) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn sgd_is_deterministic_in_seed() {
    let run = |seed: u64| {
        let mut seen = Vec::new();
        let mut p = vec![1.0];
        let cfg = SgdConfig {
            batch_size: 3,
            ..SgdConfig::new(4, seed)
        };
        sgd_momentum(
            &mut p,
            10,
            |p, batch, g| {
                seen.extend_from_slice(batch);
                g[0] = p[0] * batch.len() as f64;
                Ok(p[0])
            },
            &cfg,
            0,
        )
        .unwrap();
        (seen, p)
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3).0, run(4).0);
}

#[test]
fn mlp_sgd_halves_training_loss() {
    let d = separable(200, 21);
    let cfg = SgdTrainConfig {
        hidden: vec![16],
        epochs: 100,
        batch_size: 32,
        seed: 2,
        ..SgdTrainConfig::default()
    };
    let (_, rep) = train_sgd(&d.x, &d.y, &cfg).unwrap();
    let (first, last) = (rep.epoch_losses[0], *rep.epoch_losses.last().unwrap());
    assert!(last <= 0.5 * first, "{first} -> {last}");
}
