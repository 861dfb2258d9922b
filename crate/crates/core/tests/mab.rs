use mints_core::mab::{
    mab_posterior, mints_step, profile_neg_loglik_all, run_episode, ArmLipschitz, ArmStats, BanditEnv, MabModel,
};
use mints_core::model::Belief;
use mints_core::RngStream;

fn random_stats(rng: &mut RngStream, k: usize) -> ArmStats<f64> {
    let pulls: Vec<u64> = (0..k).map(|_| rng.below(30) as u64).collect();
    let means = pulls
        .iter()
        .map(|&n| if n > 0 { rng.uniform_range(-2.0, 2.0) } else { 0.0 })
        .collect();
    ArmStats::from_parts(pulls, means).unwrap()
}

#[test]
fn posterior_is_translation_invariant() {
    let mut rng = RngStream::new(4);
    let plain = MabModel::new(1.2).unwrap();
    let smooth = MabModel::new(1.0)
        .unwrap()
        .with_lipschitz(ArmLipschitz::on_line(0.8, &[0.0, 0.3, 0.5, 1.0, 1.4]).unwrap());
    for _ in 0..200 {
        let stats = random_stats(&mut rng, 5);
        let prior = Belief::uniform((0..5).collect()).unwrap();
        let c = rng.uniform_range(-10.0, 10.0);
        for model in [&plain, &smooth] {
            let a = mab_posterior(&stats, &prior, model).unwrap();
            let b = mab_posterior(&stats.shifted(c), &prior, model).unwrap();
            for (x, y) in a.weights().iter().zip(b.weights()) {
                assert!((x - y).abs() < 1e-9, "{:?} vs {:?}", a.weights(), b.weights());
            }
        }
    }
}

#[test]
fn leader_profile_is_zero() {
    let mut rng = RngStream::new(5);
    let model = MabModel::new(1.2).unwrap();
    for _ in 0..300 {
        let stats = random_stats(&mut rng, 6);
        if let Some(best) = stats.empirical_best() {
            assert_eq!(profile_neg_loglik_all(&stats, &model).unwrap()[best], 0.0);
        }
    }
}

#[test]
fn mints_step_settles_on_the_best_arm() {
    let env = BanditEnv::gaussian(vec![1.0, 0.0], 0.0).unwrap();
    let model = MabModel::new(1.2).unwrap();
    let prior = Belief::uniform(vec![0, 1]).unwrap();
    let mut late_best = 0;
    for seed in [1, 2] {
        let mut rng = RngStream::new(seed);
        let mut stats = ArmStats::new(2);
        for t in 0..200 {
            let (next, arm, reward) = mints_step(&stats, &prior, &model, &env, &mut rng).unwrap();
            assert_eq!(reward, if arm == 0 { 1.0 } else { 0.0 });
            stats = next;
            if t >= 100 && arm == 0 {
                late_best += 1;
            }
        }
    }
    assert!(late_best >= 190, "{late_best}");
}

#[test]
fn regret_trace_recomputes_from_decisions() {
    let env = BanditEnv::bernoulli(vec![0.2, 0.5, 0.45]).unwrap();
    let prior = Belief::uniform(vec![0, 1, 2]).unwrap();
    let rec = run_episode(300, &prior, &MabModel::default(), &env, &mut RngStream::new(77)).unwrap();
    let mut total = 0.0f64;
    for (r, cum) in rec.rounds().iter().zip(rec.cumulative_regret()) {
        total += [0.3, 0.0, 0.05][r.decision];
        assert!((total - cum).abs() < 1e-12);
    }
}

#[test]
fn shifted_streams_give_identical_decisions() {
    let model = MabModel::default();
    let prior = Belief::uniform(vec![0, 1, 2]).unwrap();
    let base = run_episode(
        500,
        &prior,
        &model,
        &BanditEnv::gaussian(vec![0.2, 0.5, 0.4], 1.0).unwrap(),
        &mut RngStream::new(3),
    )
    .unwrap();
    let moved = run_episode(
        500,
        &prior,
        &model,
        &BanditEnv::gaussian(vec![-4.8, -4.5, -4.6], 1.0).unwrap(),
        &mut RngStream::new(3),
    )
    .unwrap();
    let a: Vec<usize> = base.rounds().iter().map(|r| r.decision).collect();
    let b: Vec<usize> = moved.rounds().iter().map(|r| r.decision).collect();
    assert_eq!(a, b);
}
