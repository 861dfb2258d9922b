use mints_core::solvers::{max_bernoulli_loglik, min_profile_ssq, solve_qp, ConstraintSet, QuadObjective};
use mints_core::RngStream;

fn random_objective(rng: &mut RngStream, k: usize) -> QuadObjective<f64> {
    let w = (0..k).map(|_| (rng.uniform() * 20.0).floor()).collect();
    let m = (0..k).map(|_| rng.uniform_range(-2.0, 2.0)).collect();
    QuadObjective::new(w, m).unwrap()
}

#[test]
fn breakpoint_scan_matches_generic_qp() {
    let mut rng = RngStream::new(101);
    let mut checked = 0;
    while checked < 1000 {
        let k = 2 + rng.below(7);
        let obj = random_objective(&mut rng, k);
        if obj.weights().iter().all(|&w| w == 0.0) {
            continue;
        }
        for j in 0..k {
            let (scan, _) = min_profile_ssq(&obj, j).unwrap();
            let qp = solve_qp(&obj, &ConstraintSet::arm_optimal(k, j))
                .unwrap()
                .require_optimal()
                .unwrap();
            assert!(
                (scan - qp.value).abs() <= 1e-8 * (1.0 + scan.abs()),
                "{obj:?} j={j}: {scan} vs {}",
                qp.value
            );
        }
        checked += 1;
    }
}

#[test]
fn empirical_leader_has_zero_profile() {
    let mut rng = RngStream::new(7);
    for _ in 0..500 {
        let k = 2 + rng.below(7);
        let obj = random_objective(&mut rng, k);
        let Some(best) = (0..k)
            .filter(|&j| obj.weights()[j] > 0.0)
            .max_by(|&a, &b| obj.targets()[a].total_cmp(&obj.targets()[b]).then(b.cmp(&a)))
        else {
            continue;
        };
        assert_eq!(min_profile_ssq(&obj, best).unwrap().0, 0.0);
    }
}

#[test]
fn profile_value_is_translation_invariant() {
    let mut rng = RngStream::new(8);
    for _ in 0..500 {
        let k = 2 + rng.below(7);
        let obj = random_objective(&mut rng, k);
        if obj.weights().iter().all(|&w| w == 0.0) {
            continue;
        }
        let c = rng.uniform_range(-50.0, 50.0);
        let moved = QuadObjective::new(obj.weights().to_vec(), obj.targets().iter().map(|m| m + c).collect()).unwrap();
        for j in 0..k {
            let (a, la) = min_profile_ssq(&obj, j).unwrap();
            let (b, lb) = min_profile_ssq(&moved, j).unwrap();
            assert!((a - b).abs() <= 1e-10 * (1.0 + a), "{a} vs {b}");
            assert!((la + c - lb).abs() <= 1e-9);
        }
    }
}

#[test]
fn dropping_a_row_never_lowers_the_bernoulli_value() {
    let mut rng = RngStream::new(9);
    for _ in 0..100 {
        let k = 2 + rng.below(4);
        let counts: Vec<f64> = (0..k).map(|_| 1.0 + rng.below(20) as f64).collect();
        let means: Vec<f64> = counts.iter().map(|&n| (rng.below(n as usize + 1) as f64) / n).collect();
        let mut full = ConstraintSet::new(k);
        for i in 0..k - 1 {
            full.diff_le(i + 1, i, 0.0);
        }
        full.diff_le(0, k - 1, 0.3);
        let drop = rng.below(full.len());
        let mut relaxed = ConstraintSet::new(k);
        for (_, row) in full.rows().iter().enumerate().filter(|&(r, _)| r != drop) {
            relaxed.push(row.coeffs.clone(), row.bound).unwrap();
        }
        let a = max_bernoulli_loglik(&counts, &means, &full)
            .unwrap()
            .require_optimal()
            .unwrap();
        let b = max_bernoulli_loglik(&counts, &means, &relaxed)
            .unwrap()
            .require_optimal()
            .unwrap();
        assert!(b.value >= a.value - 1e-9, "{} < {}", b.value, a.value);
    }
}
