use mints_core::lipschitz::{sample_gaussian, sample_noiseless, v_min, v_value, ContinuumDataset, LipschitzSpec};
use mints_core::solvers::{feasible, ConstraintSet};
use mints_core::{Error, RngStream};

fn data1(points: &[f64], values: &[f64]) -> ContinuumDataset<f64> {
    ContinuumDataset::from_parts(1, points.iter().map(|&p| vec![p]).collect(), values.to_vec()).unwrap()
}

/// Values of a random 1-Lipschitz sawtooth at random points.
fn consistent_data(rng: &mut RngStream, t: usize) -> ContinuumDataset<f64> {
    let knots: Vec<f64> = (0..4).map(|_| rng.uniform()).collect();
    let f = |x: f64| {
        knots
            .iter()
            .map(|k| 0.5 - (x - k).abs())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let points: Vec<f64> = (0..t).map(|_| rng.uniform()).collect();
    let values: Vec<f64> = points.iter().map(|&x| f(x)).collect();
    data1(&points, &values)
}

#[test]
fn noiseless_decision_matches_pinned_polytope() {
    let mut rng = RngStream::new(21);
    for _ in 0..10 {
        let t = 1 + rng.below(4);
        let d = consistent_data(&mut rng, t);
        for g in 0..512 {
            let x = g as f64 / 511.0;
            let mut c = ConstraintSet::new(t + 1);
            for i in 0..t {
                let (p, phi) = (d.points()[i][0], d.values()[i]);
                c.diff_le(i + 1, 0, 0.0).diff_le(0, i + 1, (x - p).abs());
                c.upper(i + 1, phi).lower(i + 1, phi);
                for j in i + 1..t {
                    c.abs_diff_le(i + 1, j + 1, (p - d.points()[j][0]).abs());
                }
            }
            let point = |_: &mut RngStream| vec![x];
            let accepted = match sample_noiseless(point, &d, 1.0, &mut rng, 1) {
                Ok(_) => true,
                Err(Error::MaxAttempts { .. }) => false,
                Err(e) => panic!("{e}"),
            };
            assert_eq!(accepted, feasible(&c), "x={x} data={d:?}");
        }
    }
}

/// Exhaustive grid over `(v_1, v_2)` with `v` eliminated exactly: for fixed
/// `v_i` the feasible `v` form the interval `[max v_i, min v_i + M|x − x_i|]`.
fn grid_v(x: f64, d: &ContinuumDataset<f64>, m: f64, sigma: f64, step: f64) -> f64 {
    assert_eq!(d.len(), 2);
    let (p, phi) = (d.points(), d.values());
    let n = (5.0 / step).round() as i64;
    let mut best = f64::INFINITY;
    for a in 0..=n {
        let v1 = -2.0 + a as f64 * step;
        for b in 0..=n {
            let v2 = -2.0 + b as f64 * step;
            if (v1 - v2).abs() > m * (p[0][0] - p[1][0]).abs() + 1e-12 {
                continue;
            }
            let lo = v1.max(v2);
            let hi = (v1 + m * (x - p[0][0]).abs()).min(v2 + m * (x - p[1][0]).abs());
            if lo > hi + 1e-12 {
                continue;
            }
            let f = ((v1 - phi[0]).powi(2) + (v2 - phi[1]).powi(2)) / (2.0 * sigma * sigma);
            best = best.min(f);
        }
    }
    best
}

#[test]
fn v_value_matches_a_fine_grid() {
    let mut rng = RngStream::new(22);
    for _ in 0..5 {
        let d = data1(&[rng.uniform(), rng.uniform()], &[rng.uniform(), rng.uniform()]);
        let spec = LipschitzSpec::new(0.5 + rng.uniform(), 0.5 + rng.uniform()).unwrap();
        let floor = v_min(&d, &spec).unwrap();
        for _ in 0..3 {
            let x = rng.uniform();
            let v = v_value(&[x], &d, &spec).unwrap();
            let g = grid_v(x, &d, spec.m(), spec.sigma(), 2e-3);
            assert!(g >= v - 1e-9 && g - v < 5e-3, "x={x}: {v} vs grid {g}");
            assert!(floor <= v + 1e-12);
        }
    }
}

#[test]
fn gaussian_sampler_targets_the_tilted_prior() {
    let d = data1(&[0.1, 0.8], &[0.0, 0.6]);
    let spec = LipschitzSpec::new(1.0, 0.3).unwrap();
    let floor = v_min(&d, &spec).unwrap();
    // Bin masses of exp(V_min − V(x)) on [0, 1] by midpoint quadrature.
    let bins = 10;
    let per_bin = 200;
    let mut mass = vec![0.0; bins];
    for b in 0..bins {
        for q in 0..per_bin {
            let x = (b as f64 + (q as f64 + 0.5) / per_bin as f64) / bins as f64;
            mass[b] += (floor - v_value(&[x], &d, &spec).unwrap()).exp() / (bins * per_bin) as f64;
        }
    }
    let rate: f64 = mass.iter().sum();
    let n = 20_000;
    let mut rng = RngStream::new(23);
    let mut counts = vec![0usize; bins];
    let mut attempts = 0u64;
    for _ in 0..n {
        let s = sample_gaussian(mints_core::lipschitz::uniform_prior(1), &d, &spec, &mut rng, 1_000_000).unwrap();
        counts[((s.x[0] * bins as f64) as usize).min(bins - 1)] += 1;
        attempts += s.attempts;
    }
    for b in 0..bins {
        let p = mass[b] / rate;
        let sd = (n as f64 * p * (1.0 - p)).sqrt().max(1.0);
        assert!(
            (counts[b] as f64 - n as f64 * p).abs() < 5.0 * sd,
            "bin {b}: {} vs {}",
            counts[b],
            n as f64 * p
        );
    }
    let observed = n as f64 / attempts as f64;
    assert!((observed / rate - 1.0).abs() < 0.05, "{observed} vs {rate}");
}
