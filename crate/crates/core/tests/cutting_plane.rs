use mints_core::cutting_plane::{
    centroid, clip_halfplane, cog_run, ellipsoid_kl_update, ellipsoid_run, halfellipsoid_cover_check, uniform_kl,
    volume_ratio, Ellipsoid, Polygon2D, QuadraticObjective,
};
use mints_core::linalg::Mat;
use mints_core::RngStream;

fn random_spd(rng: &mut RngStream, d: usize, floor: f64) -> Mat<f64> {
    let r = Mat::from_rows(
        &(0..d)
            .map(|_| (0..d).map(|_| rng.normal()).collect())
            .collect::<Vec<_>>(),
    );
    let mut m = r.transpose().matmul(&r);
    for i in 0..d {
        m[(i, i)] += floor;
    }
    m
}

fn random_quadratic(rng: &mut RngStream) -> QuadraticObjective<f64> {
    let q = random_spd(rng, 2, 0.05);
    QuadraticObjective::new(q, vec![rng.uniform(), rng.uniform()]).unwrap()
}

#[test]
fn clipped_region_equals_the_half_plane_intersection() {
    let mut rng = RngStream::new(12);
    for _ in 0..20 {
        let mut poly = Polygon2D::unit_square();
        let mut cuts = Vec::new();
        for _ in 0..6 {
            let x0 = [rng.uniform(), rng.uniform()];
            let g = [rng.normal(), rng.normal()];
            poly = clip_halfplane(&poly, g, x0);
            cuts.push((g, x0));
        }
        for i in 0..100 {
            for j in 0..100 {
                let p = [(i as f64 + 0.5) / 100.0, (j as f64 + 0.5) / 100.0];
                let slack: f64 = cuts
                    .iter()
                    .map(|(g, x0)| g[0] * (p[0] - x0[0]) + g[1] * (p[1] - x0[1]))
                    .fold(f64::NEG_INFINITY, f64::max);
                // Skip points within rounding of a cut line.
                if slack.abs() < 1e-9 {
                    continue;
                }
                assert_eq!(poly.contains(p, 1e-12), slack < 0.0, "{p:?}");
            }
        }
    }
}

#[test]
fn cuts_shrink_and_centroids_stay_inside() {
    let mut rng = RngStream::new(13);
    for _ in 0..50 {
        let f = random_quadratic(&mut rng);
        let steps = cog_run(|x| Ok(f.eval2(x)), &Polygon2D::unit_square(), 30).unwrap();
        let mut prev = Polygon2D::unit_square();
        for s in &steps {
            assert!(prev.contains(s.x, 1e-9));
            assert_eq!(centroid(&prev).unwrap(), s.x);
            assert!(s.region.area() <= prev.area());
            prev = s.region.clone();
        }
    }
}

#[test]
fn retained_area_obeys_grunbaum() {
    let mut rng = RngStream::new(14);
    for _ in 0..50 {
        let f = random_quadratic(&mut rng);
        let steps = cog_run(|x| Ok(f.eval2(x)), &Polygon2D::unit_square(), 40).unwrap();
        let mut area = 1.0;
        for s in &steps {
            let frac = s.region.area() / area;
            assert!((4.0 / 9.0 - 1e-9..=5.0 / 9.0 + 1e-9).contains(&frac), "{frac}");
            area = s.region.area();
        }
    }
}

#[test]
fn center_of_gravity_reaches_the_minimizer() {
    let f = QuadraticObjective::new(Mat::identity(2), vec![0.3, 0.7]).unwrap();
    let steps = cog_run(|x| Ok(f.eval2(x)), &Polygon2D::unit_square(), 40).unwrap();
    let last = steps.last().unwrap();
    assert!(last.value <= 1e-6, "{}", last.value);
}

fn rotation(theta: f64) -> Mat<f64> {
    Mat::from_rows(&[vec![theta.cos(), -theta.sin()], vec![theta.sin(), theta.cos()]])
}

#[test]
fn update_is_rotation_equivariant() {
    let mut rng = RngStream::new(15);
    for _ in 0..100 {
        let b = random_spd(&mut rng, 2, 0.1);
        let c = vec![rng.normal(), rng.normal()];
        let g = [rng.normal(), rng.normal()];
        let q = rotation(rng.uniform_range(0.0, std::f64::consts::TAU));
        let e = Ellipsoid::new(c.clone(), b.clone()).unwrap();
        let rotated = Ellipsoid::new(q.mul_vec(&c), q.matmul(&b).matmul(&q.transpose())).unwrap();
        let a = ellipsoid_kl_update(&e, &g).unwrap();
        let r = ellipsoid_kl_update(&rotated, &q.mul_vec(&g)).unwrap();
        let qc = q.mul_vec(a.center());
        assert!(qc.iter().zip(r.center()).all(|(x, y)| (x - y).abs() < 1e-10));
        let qb = q.matmul(a.shape_inv()).matmul(&q.transpose());
        assert!(qb.max_abs_diff(r.shape_inv()) < 1e-10);
    }
}

#[test]
fn volume_ratio_is_fixed_per_dimension() {
    let mut rng = RngStream::new(16);
    for d in 1..=5 {
        let mut e = Ellipsoid::new(vec![0.0; d], random_spd(&mut rng, d, 0.5)).unwrap();
        for _ in 0..20 {
            let g: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let next = ellipsoid_kl_update(&e, &g).unwrap();
            let ratio = (next.log_volume() - e.log_volume()).exp();
            assert!((ratio - volume_ratio(d)).abs() < 1e-9, "d={d}: {ratio}");
            assert!(ratio < 1.0);
            e = next;
        }
    }
    assert!((volume_ratio(2) - 0.769800).abs() < 5e-7);
}

#[test]
fn minimum_volume_spot_check() {
    let mut rng = RngStream::new(17);
    for _ in 0..20 {
        let e = Ellipsoid::new(vec![rng.normal(), rng.normal()], random_spd(&mut rng, 2, 0.2)).unwrap();
        let g = [rng.normal(), rng.normal()];
        let cover = ellipsoid_kl_update(&e, &g).unwrap();
        let mut pts = Vec::with_capacity(100_000);
        while pts.len() < 100_000 {
            let x = e.sample_uniform(&mut rng);
            if g[0] * (x[0] - e.center()[0]) + g[1] * (x[1] - e.center()[1]) <= 0.0 {
                pts.push(x);
            }
        }
        assert!(pts.iter().all(|x| cover.contains(x, 1e-9)));
        let scale = cover.shape_inv()[(0, 0)]
            .abs()
            .max(cover.shape_inv()[(1, 1)].abs())
            .sqrt();
        let mut candidates = vec![cover.clone(), e.clone()];
        for _ in 0..10 {
            let eps = 0.05;
            let c: Vec<f64> = cover.center().iter().map(|&c| c + eps * scale * rng.normal()).collect();
            let mut b = cover.shape_inv().clone();
            let (p, q) = (eps * rng.normal(), eps * rng.normal());
            b[(0, 0)] *= 1.0 + p;
            b[(1, 1)] *= 1.0 + q;
            let off = eps * rng.normal() * (b[(0, 0)] * b[(1, 1)]).sqrt() * 0.5;
            b[(0, 1)] += off;
            b[(1, 0)] += off;
            let Ok(trial) = Ellipsoid::new(c.clone(), b.clone()) else {
                continue;
            };
            // Grow about the new center until every sample is covered.
            let grow = pts.iter().map(|x| trial.gauge(x)).fold(0.0f64, f64::max);
            let covering = Ellipsoid::new(c, b.scale(grow.max(1.0))).unwrap();
            assert!(pts.iter().all(|x| covering.contains(x, 1e-9)));
            assert!(
                covering.log_volume() >= cover.log_volume() + (1.0f64 - 1e-3).ln(),
                "{} < {}",
                covering.log_volume(),
                cover.log_volume()
            );
            candidates.push(covering);
        }
        // Ranking covers by volume and by divergence from the half agree.
        let inner = e.log_volume() - 2f64.ln();
        let mut by_vol: Vec<usize> = (0..candidates.len()).collect();
        by_vol.sort_by(|&a, &b| candidates[a].log_volume().total_cmp(&candidates[b].log_volume()));
        let mut by_kl = by_vol.clone();
        by_kl.sort_by(|&a, &b| {
            uniform_kl(inner, candidates[a].log_volume()).total_cmp(&uniform_kl(inner, candidates[b].log_volume()))
        });
        assert_eq!(by_vol, by_kl);
        assert_eq!(by_vol[0], 0);
    }
}

#[test]
fn covering_check_at_full_sample_size() {
    let mut rng = RngStream::new(18);
    let e = Ellipsoid::new(vec![0.5, -1.0], random_spd(&mut rng, 2, 0.3)).unwrap();
    let g = [0.3, 1.1];
    let cover = ellipsoid_kl_update(&e, &g).unwrap();
    assert!(halfellipsoid_cover_check(&e, &g, &cover, 100_000, &mut rng).unwrap());
}

#[test]
fn ellipsoid_method_on_a_bowl() {
    let f = QuadraticObjective::new(Mat::identity(2), vec![0.0, 0.0]).unwrap();
    let e0 = Ellipsoid::<f64>::ball(vec![2.0, 2.0], 4.0).unwrap();
    let steps = ellipsoid_run(|x| Ok(f.eval(x)), &e0, 100).unwrap();
    let best = steps.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    assert!(best <= 1e-4, "{best}");
}

#[test]
fn constant_gradient_marches_at_a_fixed_ratio() {
    let e0 = Ellipsoid::<f64>::ball(vec![0.0, 0.0], 1.0).unwrap();
    let steps = ellipsoid_run(|_| Ok((0.0, vec![1.0, 0.0])), &e0, 10).unwrap();
    let mut prev = e0;
    for s in &steps {
        assert!(s.region.center()[0] < prev.center()[0]);
        assert!(s.region.center()[1].abs() < 1e-15);
        let ratio = (s.region.log_volume() - prev.log_volume()).exp();
        assert!((ratio - volume_ratio(2)).abs() < 1e-12);
        prev = s.region.clone();
    }
}

#[test]
fn one_dimension_bisects() {
    let f = QuadraticObjective::new(Mat::identity(1), vec![0.3]).unwrap();
    let e0 = Ellipsoid::<f64>::new(vec![0.5], Mat::diag(&[0.25])).unwrap();
    let steps = ellipsoid_run(|x| Ok(f.eval(x)), &e0, 30).unwrap();
    let mut width = 1.0;
    for s in &steps {
        let w = 2.0 * s.region.shape_inv()[(0, 0)].sqrt();
        assert!((w / width - 0.5).abs() < 1e-12);
        width = w;
        assert!((s.region.center()[0] - 0.3).abs() <= w / 2.0 + 1e-12);
    }
}
