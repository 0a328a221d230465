//! Penalty-trained MLPs against plain SGD from the same initialization,
//! shuffling and schedule.

use ctreg::dataio::SyntheticSpec;
use ctreg::dnn::{alternating_minimize, mlp_predict, train_sgd, AltMinConfig, SgdTrainConfig};
use ctreg::mlr::accuracy;

#[test]
fn vanishing_penalty_tracks_plain_sgd() {
    let d = SyntheticSpec::new(20, 3, 50, 5, 0.1, 500).generate().unwrap();
    let truth = d.labels();
    let cfg = AltMinConfig {
        lambda: 1e-8,
        mu: 1e-8,
        hidden: vec![32],
        seed: 4,
        ..AltMinConfig::default()
    };
    let (theta, _, rep) = alternating_minimize(&d.x, &d.y, &cfg).unwrap();
    let (plain, _) = train_sgd(&d.x, &d.y, &SgdTrainConfig::matching(&cfg)).unwrap();
    let a = accuracy(&mlp_predict(&theta, &d.x).unwrap(), &truth);
    let b = accuracy(&mlp_predict(&plain, &d.x).unwrap(), &truth);
    eprintln!("train accuracy: penalty {a:.4} after {} outer iterations, sgd {b:.4}", rep.records.len());
    assert!((a - b).abs() <= 0.02, "penalty {a:.4} vs sgd {b:.4}");
}

/// Synthetic low-rank data, 100 samples per class, 400 features, 10 seeds.
#[test]
fn coupled_penalty_matches_or_beats_plain_sgd() {
    let seeds = 10;
    let (mut coupled, mut plain) = (0.0, 0.0);
    for seed in 0..seeds {
        let (train, test) = SyntheticSpec::new(100, 4, 400, 5, 0.1, seed).generate_split(200).unwrap();
        let truth = test.labels();
        let cfg = AltMinConfig {
            seed,
            ..AltMinConfig::default()
        };
        let (theta, _, _) = alternating_minimize(&train.x, &train.y, &cfg).unwrap();
        let (base, _) = train_sgd(&train.x, &train.y, &SgdTrainConfig::matching(&cfg)).unwrap();
        let a = accuracy(&mlp_predict(&theta, &test.x).unwrap(), &truth);
        let b = accuracy(&mlp_predict(&base, &test.x).unwrap(), &truth);
        eprintln!("seed {seed}: coupled {a:.4}, sgd {b:.4}");
        coupled += a;
        plain += b;
    }
    let (coupled, plain) = (coupled / seeds as f64, plain / seeds as f64);
    eprintln!("mean test accuracy: coupled {coupled:.4}, sgd {plain:.4}");
    assert!(coupled >= plain, "coupled {coupled:.4} < sgd {plain:.4}");
}
