//! Constrained Bernoulli maximum likelihood.
//!
//! The log-likelihood is separable, so its Hessian is diagonal and each
//! Newton step is a diagonal-weighted projection that [`solve_qp_with`]
//! solves exactly. Steps are damped by Armijo backtracking.

use super::qp::{solve_qp_warm, solve_qp_with};
use super::{ConstraintSet, QpOptions, QuadObjective, SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Distance kept from {0, 1}.
pub const BOUNDARY_DELTA: f64 = 1e-12;

const START_MARGIN: f64 = 1e-3;
/// Weight of unobserved coordinates relative to the largest curvature.
const PROXIMAL_WEIGHT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliOptions {
    pub max_iterations: usize,
    /// Stop once the predicted ascent `gᵀd` of the Newton step is below this.
    pub stationarity_tol: f64,
    pub boundary_delta: f64,
    pub qp: QpOptions,
}

impl Default for BernoulliOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            stationarity_tol: 1e-9,
            boundary_delta: BOUNDARY_DELTA,
            qp: QpOptions::default(),
        }
    }
}

/// `Σ n_k [μ_k ln θ_k + (1 − μ_k) ln(1 − θ_k)]` with `0 · ln 0 = 0`.
pub fn bernoulli_loglik<T: Real>(counts: &[T], means: &[T], theta: &[T]) -> T {
    counts
        .iter()
        .zip(means)
        .zip(theta)
        .map(|((&n, &m), &th)| {
            let ones = n * m;
            let zeros = n * (T::one() - m);
            let mut s = T::zero();
            if ones != T::zero() {
                s += ones * th.ln();
            }
            if zeros != T::zero() {
                s += zeros * (T::one() - th).ln();
            }
            s
        })
        .sum()
}

pub fn max_bernoulli_loglik<T: Real>(counts: &[T], means: &[T], cons: &ConstraintSet<T>) -> Result<SolveResult<T>> {
    max_bernoulli_loglik_with(counts, means, cons, &BernoulliOptions::default(), None)
}

/// As [`max_bernoulli_loglik`]; `start`, if given, seeds the iteration
/// (it is projected onto the feasible set first unless already inside).
pub fn max_bernoulli_loglik_with<T: Real>(
    counts: &[T],
    means: &[T],
    cons: &ConstraintSet<T>,
    opts: &BernoulliOptions,
    start: Option<&[T]>,
) -> Result<SolveResult<T>> {
    let k = counts.len();
    if means.len() != k {
        return Err(Error::LengthMismatch {
            what: "counts and means",
            left: k,
            right: means.len(),
        });
    }
    if cons.dim() != k {
        return Err(Error::LengthMismatch {
            what: "counts and constraint dimension",
            left: k,
            right: cons.dim(),
        });
    }
    if let Some(s) = start {
        if s.len() != k {
            return Err(Error::LengthMismatch {
                what: "counts and start point",
                left: k,
                right: s.len(),
            });
        }
    }
    for (&n, &m) in counts.iter().zip(means) {
        if !(n >= T::zero()) || !n.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "count {n} must be finite and nonnegative"
            )));
        }
        if !(m >= T::zero() && m <= T::one()) {
            return Err(Error::InvalidArgument(format!("mean {m} outside [0, 1]")));
        }
    }

    let full = boxed_set(cons, opts);
    maximize(counts, means, cons, &full, opts, start, &mut Vec::new())
}

/// `cons` intersected with the box `[δ, 1 − δ]^k`.
pub(crate) fn boxed_set<T: Real>(cons: &ConstraintSet<T>, opts: &BernoulliOptions) -> ConstraintSet<T> {
    let delta = T::c(opts.boundary_delta);
    let mut full = cons.clone();
    full.boxed(delta, T::one() - delta);
    full
}

/// As [`max_bernoulli_loglik_with`] on validated inputs, with `full` the
/// result of [`boxed_set`] on `cons`. `active` carries the binding rows of
/// `full` from one call to the next.
pub(crate) fn maximize<T: Real>(
    counts: &[T],
    means: &[T],
    cons: &ConstraintSet<T>,
    full: &ConstraintSet<T>,
    opts: &BernoulliOptions,
    start: Option<&[T]>,
    active: &mut Vec<usize>,
) -> Result<SolveResult<T>> {
    let k = counts.len();
    let delta = T::c(opts.boundary_delta);

    let infeasible = |iters| {
        let mut r = SolveResult::infeasible(iters);
        r.value = T::neg_infinity();
        r
    };

    // Starting point: count-weighted projection of the clipped means, kept
    // away from {0, 1} when possible because Newton steps only double the
    // distance to a boundary the likelihood pushes away from.
    // Points are kept inside the box exactly: a solver tolerance past it
    // can leave the domain of the logarithm.
    let in_box = |x: T| x.max(delta).min(T::one() - delta);
    let warm: Option<Vec<T>> = start.map(|s| s.iter().map(|&x| in_box(x)).collect());
    // A warm start that leaves an observed coordinate pinned to the edge
    // its data pushes away from (a fresh success at θ ≈ δ, say) puts the
    // Newton curvature near 1/δ² and the step QP out of reach.
    let margin = delta.max(T::c(START_MARGIN));
    let pinned = |s: &[T]| {
        (0..k).any(|i| {
            counts[i] > T::zero()
                && ((means[i] > T::zero() && s[i] < margin) || (means[i] < T::one() && s[i] > T::one() - margin))
        })
    };
    let mut theta = match warm {
        Some(s) if full.max_violation(&s) <= T::tol(opts.qp.feasibility_tol) / T::c(100.0) && !pinned(&s) => s,
        _ => {
            let clip = |x: T| x.max(margin).min(T::one() - margin);
            let init = match start {
                Some(s) => QuadObjective::least_distance(s.iter().map(|&x| clip(x)).collect())?,
                None => {
                    let top = counts.iter().copied().fold(T::zero(), T::max);
                    let w = counts
                        .iter()
                        .map(|&n| if n > T::zero() { n } else { top * T::c(PROXIMAL_WEIGHT) })
                        .collect();
                    QuadObjective::new(w, means.iter().map(|&m| clip(m)).collect())?
                }
            };
            let mut inner = cons.clone();
            inner.boxed(margin, T::one() - margin);
            match solve_qp_with(&init, &inner, &opts.qp) {
                Ok(r) if r.is_optimal() => r.argmin,
                _ => {
                    let proj = solve_qp_with(&init, full, &opts.qp)?;
                    match proj.status {
                        SolveStatus::Optimal => {}
                        SolveStatus::Infeasible => return Ok(infeasible(proj.iterations)),
                        SolveStatus::MaxIterations => return Ok(proj),
                    }
                    proj.argmin.into_iter().map(in_box).collect()
                }
            }
        }
    };
    let mut value = bernoulli_loglik(counts, means, &theta);
    let mut iterations = 0;
    let tol = T::tol(opts.stationarity_tol);
    let pulled: Vec<usize> = (0..k).filter(|&i| counts[i] > T::zero()).collect();
    if pulled.is_empty() {
        return Ok(finish(theta, value, 0, full, T::zero()));
    }

    loop {
        if iterations >= opts.max_iterations {
            let mut r = finish(theta, value, iterations, full, T::infinity());
            r.status = SolveStatus::MaxIterations;
            return Ok(r);
        }
        iterations += 1;
        let mut grad = vec![T::zero(); k];
        let mut hess = vec![T::zero(); k];
        for &i in &pulled {
            let (n, m, th) = (counts[i], means[i], theta[i]);
            let one_minus = T::one() - th;
            grad[i] = n * (m / th - (T::one() - m) / one_minus);
            hess[i] = n * (m / (th * th) + (T::one() - m) / (one_minus * one_minus));
        }
        // Unobserved coordinates get a small proximal weight instead of
        // none: the step stays an ascent direction and the QP avoids
        // eliminating free variables.
        let prox = hess.iter().copied().fold(T::zero(), T::max) * T::c(PROXIMAL_WEIGHT);
        let weights: Vec<T> = hess
            .iter()
            .map(|&h| if h > T::zero() { h / T::c(2.0) } else { prox })
            .collect();
        let targets: Vec<T> = (0..k)
            .map(|i| {
                if hess[i] > T::zero() {
                    theta[i] + grad[i] / hess[i]
                } else {
                    theta[i]
                }
            })
            .collect();
        let step = solve_qp_warm(&QuadObjective::new(weights, targets)?, full, &opts.qp, active)?;
        if step.status != SolveStatus::Optimal {
            let mut r = finish(theta, value, iterations, full, T::infinity());
            r.status = step.status;
            return Ok(r);
        }
        let dir: Vec<T> = step.argmin.iter().zip(&theta).map(|(&a, &b)| a - b).collect();
        let slope: T = pulled.iter().map(|&i| grad[i] * dir[i]).sum();
        if slope <= tol {
            return Ok(finish(theta, value, iterations, full, slope.max(T::zero())));
        }

        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<T> = theta.iter().zip(&dir).map(|(&a, &d)| in_box(a + t * d)).collect();
            let f = bernoulli_loglik(counts, means, &trial);
            if f >= value + T::c(1e-4) * t * slope {
                theta = trial;
                value = f;
                accepted = true;
                break;
            }
            t /= T::c(2.0);
        }
        if !accepted {
            // No ascent at rounding level: the current point is stationary.
            return Ok(finish(theta, value, iterations, full, slope));
        }
        // A full Newton step from a point whose predicted ascent was ε
        // leaves O(ε²): no need to solve another QP to confirm it.
        if t == T::one() && slope * slope <= tol {
            return Ok(finish(theta, value, iterations, full, slope * slope));
        }
    }
}

fn finish<T: Real>(
    theta: Vec<T>,
    value: T,
    iterations: usize,
    cons: &ConstraintSet<T>,
    kkt_residual: T,
) -> SolveResult<T> {
    SolveResult {
        max_violation: cons.max_violation(&theta),
        value,
        argmin: theta,
        status: SolveStatus::Optimal,
        iterations,
        kkt_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_recovers_means() {
        let counts = [5.0f64, 3.0, 8.0];
        let means = [0.2f64, 0.5, 0.75];
        let r = max_bernoulli_loglik(&counts, &means, &ConstraintSet::new(3)).unwrap();
        assert!(r.is_optimal());
        for (a, m) in r.argmin.iter().zip(&means) {
            assert!((a - m).abs() < 1e-12);
        }
        let expect: f64 = counts
            .iter()
            .zip(&means)
            .map(|(n, m)| n * (m * m.ln() + (1.0 - m) * (1.0 - m).ln()))
            .sum();
        assert!((r.value - expect).abs() < 1e-12);
    }

    #[test]
    fn order_constraint_pools() {
        let mut c = ConstraintSet::new(2);
        c.diff_le(1, 0, 0.0);
        let r = max_bernoulli_loglik(&[10.0f64, 10.0], &[0.8, 0.9], &c).unwrap();
        assert!((r.argmin[0] - 0.85).abs() < 1e-9 && (r.argmin[1] - 0.85).abs() < 1e-9);
        let pooled =
            10.0 * (0.8 * 0.85f64.ln() + 0.2 * 0.15f64.ln()) + 10.0 * (0.9 * 0.85f64.ln() + 0.1 * 0.15f64.ln());
        assert!((r.value - pooled).abs() < 1e-10);
        assert!((r.value - -8.454181756).abs() < 1e-8);
        // 1e-4 grid over the feasible triangle.
        let mut best = f64::NEG_INFINITY;
        for i in 1..10_000 {
            let a = i as f64 * 1e-4;
            for j in (1..=i).step_by(7).chain([i]) {
                let b = j as f64 * 1e-4;
                best = best.max(bernoulli_loglik(&[10.0, 10.0], &[0.8, 0.9], &[a, b]));
            }
        }
        assert!(r.value >= best - 1e-12 && r.value - best < 1e-6);
    }

    #[test]
    fn boundary_means_are_finite() {
        let r = max_bernoulli_loglik(&[4.0f64, 6.0], &[0.0, 1.0], &ConstraintSet::new(2)).unwrap();
        assert!(r.value.is_finite());
        assert!((r.argmin[0] - BOUNDARY_DELTA).abs() < 1e-15);
        assert!((r.argmin[1] - (1.0 - BOUNDARY_DELTA)).abs() < 1e-15);
        assert!(r.value > -1e-9);
    }

    #[test]
    fn zero_counts_only_need_feasibility() {
        let mut c = ConstraintSet::new(2);
        c.diff_le(0, 1, -0.5);
        let r = max_bernoulli_loglik(&[0.0, 0.0], &[0.0, 0.0], &c).unwrap();
        assert!(r.is_optimal());
        assert_eq!(r.value, 0.0);
        assert!(c.contains(&r.argmin, 1e-9));
    }

    #[test]
    fn infeasible_polytope() {
        let mut c = ConstraintSet::new(1);
        c.lower(0, 2.0);
        let r = max_bernoulli_loglik(&[1.0], &[0.5], &c).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert_eq!(r.value, f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = ConstraintSet::new(1);
        assert!(max_bernoulli_loglik(&[1.0], &[1.5], &c).is_err());
        assert!(max_bernoulli_loglik(&[-1.0], &[0.5], &c).is_err());
        assert!(max_bernoulli_loglik(&[1.0, 1.0], &[0.5], &c).is_err());
    }

    #[test]
    fn warm_start_reaches_same_optimum() {
        let mut c = ConstraintSet::new(3);
        c.diff_le(1, 0, 0.0).diff_le(2, 1, 0.0).abs_diff_le(0, 2, 0.1);
        let counts = [7.0f64, 2.0, 9.0];
        let means = [0.3, 0.6, 0.7];
        let cold = max_bernoulli_loglik(&counts, &means, &c).unwrap();
        let warm = max_bernoulli_loglik_with(
            &counts,
            &means,
            &c,
            &BernoulliOptions::default(),
            Some(&[0.9, 0.1, 0.5]),
        )
        .unwrap();
        assert!((cold.value - warm.value).abs() < 1e-10);
    }

    #[test]
    fn warm_start_just_past_the_box() {
        let mut c = ConstraintSet::new(5);
        for j in 0..4 {
            c.diff_le(j + 1, j, 0.0);
        }
        c.push_sparse(&[(0, 0.1), (1, -0.3)], 0.0)
            .push_sparse(&[(2, 0.5), (1, -0.3)], 0.0);
        let counts = [2.0f64, 1.0, 1.0, 2.0, 1.0];
        let means = [1.0, 0.0, 1.0, 0.5, 0.0];
        let cold = max_bernoulli_loglik(&counts, &means, &c).unwrap();
        // Within the warm-start tolerance of the box but outside [0, 1].
        let start = [1.0 - 1e-12, 1.0 + 6e-12, 0.6, 0.4, 1e-12];
        let warm = max_bernoulli_loglik_with(&counts, &means, &c, &BernoulliOptions::default(), Some(&start)).unwrap();
        assert!(warm.is_optimal() && warm.value.is_finite());
        assert!(
            (cold.value - warm.value).abs() < 1e-9,
            "{} vs {}",
            cold.value,
            warm.value
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn relaxing_never_lowers_value(
                counts in prop::collection::vec(0.0f64..30.0, 4),
                means in prop::collection::vec(0.0f64..=1.0, 4),
                caps in prop::collection::vec(0.0f64..0.3, 3),
                drop in 0usize..6,
            ) {
                let mut c = ConstraintSet::new(4);
                for j in 0..3 {
                    c.diff_le(j + 1, j, 0.0).diff_le(j, j + 1, caps[j]);
                }
                let full = max_bernoulli_loglik(&counts, &means, &c).unwrap();
                let mut fewer = ConstraintSet::new(4);
                for (i, r) in c.rows().iter().enumerate() {
                    if i != drop {
                        fewer.push(r.coeffs.clone(), r.bound).unwrap();
                    }
                }
                let relaxed = max_bernoulli_loglik(&counts, &means, &fewer).unwrap();
                prop_assert!(full.is_optimal() && relaxed.is_optimal());
                prop_assert!(relaxed.value >= full.value - 1e-9 * (1.0 + full.value.abs()));
            }
        }
    }
}
