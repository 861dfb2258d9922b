//! Posterior sampling for convex minimization with subgradient feedback.
//!
//! With a uniform prior the posterior over the minimizer is uniform on the
//! prior region intersected with every cut `gᵀ(x − x_t) ≤ 0`; playing its
//! mean is the center-of-gravity method. Projecting that posterior onto
//! uniform laws over ellipsoids gives the ellipsoid method.

mod ellipsoid;
mod polygon;

pub use ellipsoid::{
    ellipsoid_kl_update, ellipsoid_run, halfellipsoid_cover_check, ln_unit_ball_volume, uniform_kl, volume_ratio,
    Ellipsoid, EllipsoidStep, COVER_TOL, MIN_CUT_NORM, SYMMETRY_TOL,
};
pub use polygon::{centroid, clip_halfplane, cog_run, CogStep, Point2, Polygon2D, CONVEX_TOL, DEDUP_TOL, MIN_AREA};

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat};
use crate::model::EpisodeRecord;
use crate::scalar::Real;

/// `f(x) = (x − x*)ᵀ Q (x − x*)` with `Q` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective<T> {
    q: Mat<T>,
    minimizer: Vec<T>,
}

impl<T: Real> QuadraticObjective<T> {
    pub fn new(q: Mat<T>, minimizer: Vec<T>) -> Result<Self> {
        if q.rows() != minimizer.len() || q.cols() != minimizer.len() || minimizer.is_empty() {
            return Err(Error::LengthMismatch {
                what: "quadratic form and minimizer",
                left: q.rows(),
                right: minimizer.len(),
            });
        }
        if !q.is_symmetric(T::c(1e-12)) || q.cholesky().is_none() {
            return Err(Error::InvalidArgument(
                "quadratic form must be symmetric positive definite".into(),
            ));
        }
        if minimizer.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite minimizer".into()));
        }
        Ok(Self { q, minimizer })
    }

    pub fn dim(&self) -> usize {
        self.minimizer.len()
    }

    pub fn minimizer(&self) -> &[T] {
        &self.minimizer
    }

    /// Value and gradient `2Q(x − x*)`.
    pub fn eval(&self, x: &[T]) -> (T, Vec<T>) {
        let r: Vec<T> = x.iter().zip(&self.minimizer).map(|(&a, &b)| a - b).collect();
        let qr = self.q.mul_vec(&r);
        (dot(&r, &qr), qr.into_iter().map(|v| v + v).collect())
    }

    pub fn eval2(&self, x: Point2<T>) -> (T, Point2<T>) {
        let (f, g) = self.eval(&x);
        (f, [g[0], g[1]])
    }
}

/// Episode log of a center-of-gravity run. Regret is `f(x_t) − f*`; entropy
/// is the log-area of the region `x_t` was the mean of.
pub fn cog_record<T: Real>(poly0: &Polygon2D<T>, steps: &[CogStep<T>], f_star: T) -> EpisodeRecord<Vec<T>, T, Vec<T>> {
    let mut rec = EpisodeRecord::with_capacity(steps.len());
    let mut area = poly0.area();
    for s in steps {
        rec.record(s.x.to_vec(), s.gradient.to_vec(), s.value - f_star, Some(area.ln()));
        area = s.region.area();
    }
    rec
}

/// Episode log of an ellipsoid run; entropy is the log-volume of the region
/// `x_t` was the center of.
pub fn ellipsoid_record<T: Real>(
    e0: &Ellipsoid<T>,
    steps: &[EllipsoidStep<T>],
    f_star: T,
) -> EpisodeRecord<Vec<T>, T, Vec<T>> {
    let mut rec = EpisodeRecord::with_capacity(steps.len());
    let mut log_vol = e0.log_volume();
    for s in steps {
        rec.record(s.x.clone(), s.gradient.clone(), s.value - f_star, Some(log_vol));
        log_vol = s.region.log_volume();
    }
    rec
}
