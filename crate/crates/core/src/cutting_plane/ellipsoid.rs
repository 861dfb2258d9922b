//! Ellipsoid method as repeated minimum-volume covering of a half-ellipsoid.

use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky, Mat};
use crate::rng::RngStream;
use crate::scalar::Real;

/// Symmetry slack on the stored shape matrix, relative to its largest entry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// `gᵀBg` at or below this is treated as a cut through a flat ellipsoid.
pub const MIN_CUT_NORM: f64 = 1e-300;
/// Boundary slack for the Monte Carlo covering check.
pub const COVER_TOL: f64 = 1e-9;

/// `{v : (v − c)ᵀ B⁻¹ (v − c) ≤ 1}`, stored through `B = A⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid<T> {
    center: Vec<T>,
    shape_inv: Mat<T>,
    factor: Mat<T>,
}

impl<T: Real> Ellipsoid<T> {
    pub fn new(center: Vec<T>, shape_inv: Mat<T>) -> Result<Self> {
        let d = center.len();
        if d == 0 {
            return Err(Error::InvalidArgument("ellipsoid dimension must be at least 1".into()));
        }
        if shape_inv.rows() != d || shape_inv.cols() != d {
            return Err(Error::LengthMismatch {
                what: "ellipsoid center and shape",
                left: d,
                right: shape_inv.rows(),
            });
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite ellipsoid center".into()));
        }
        let scale = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|ij| shape_inv[ij].abs())
            .fold(T::zero(), T::max);
        if !shape_inv.is_symmetric(T::c(SYMMETRY_TOL) * scale.max(T::min_positive_value())) {
            return Err(Error::Geometry("ellipsoid shape is not symmetric".into()));
        }
        let factor = shape_inv
            .cholesky()
            .ok_or_else(|| Error::Geometry("ellipsoid shape is not positive definite".into()))?;
        Ok(Self {
            center,
            shape_inv,
            factor,
        })
    }

    /// `B = L Lᵀ` from a lower-triangular factor with positive diagonal.
    fn from_factor(center: Vec<T>, factor: Mat<T>) -> Self {
        let d = center.len();
        let mut shape_inv = Mat::zeros(d, d);
        for i in 0..d {
            for j in 0..=i {
                let v = (0..=j).map(|k| factor[(i, k)] * factor[(j, k)]).sum();
                shape_inv[(i, j)] = v;
                shape_inv[(j, i)] = v;
            }
        }
        Self {
            center,
            shape_inv,
            factor,
        }
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        let d = center.len();
        Self::new(center, Mat::identity(d).scale(radius * radius))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[T] {
        &self.center
    }

    pub fn shape_inv(&self) -> &Mat<T> {
        &self.shape_inv
    }

    /// `A = B⁻¹`.
    pub fn shape(&self) -> Mat<T> {
        Cholesky::new(&self.shape_inv)
            .expect("validated at construction")
            .inverse()
    }

    /// `(x − c)ᵀ A (x − c)`; at most one inside.
    pub fn gauge(&self, x: &[T]) -> T {
        let r: Vec<T> = x.iter().zip(&self.center).map(|(&a, &c)| a - c).collect();
        let n = r.len();
        let mut y = r;
        for i in 0..n {
            for k in 0..i {
                let lik = self.factor[(i, k)];
                let yk = y[k];
                y[i] -= lik * yk;
            }
            y[i] /= self.factor[(i, i)];
        }
        dot(&y, &y)
    }

    pub fn contains(&self, x: &[T], tol: T) -> bool {
        self.gauge(x) <= T::one() + tol
    }

    /// `ln vol = ln ω_d + ½ ln det B`, with `ω_d` the unit-ball volume.
    pub fn log_volume(&self) -> T {
        let half_log_det = (0..self.dim()).map(|i| self.factor[(i, i)].ln()).sum::<T>();
        T::c(ln_unit_ball_volume(self.dim())) + half_log_det
    }

    /// Uniform draw: `c + L u` with `B = L Lᵀ` and `u` uniform in the unit ball.
    pub fn sample_uniform(&self, rng: &mut RngStream) -> Vec<T> {
        let d = self.dim();
        let mut u: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = rng.uniform().powf(1.0 / d as f64) / norm;
        u.iter_mut().for_each(|x| *x *= r);
        (0..d)
            .map(|i| self.center[i] + (0..=i).map(|k| self.factor[(i, k)] * T::c(u[k])).sum::<T>())
            .collect()
    }
}

/// `ln(π^{d/2} / Γ(d/2 + 1))` via `ω_d = ω_{d−2} · 2π / d`.
pub fn ln_unit_ball_volume(d: usize) -> f64 {
    let mut v = if d.is_multiple_of(2) { 0.0 } else { 2f64.ln() };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v += (std::f64::consts::TAU / k as f64).ln();
        k += 2;
    }
    v
}

/// Minimum-volume ellipsoid containing `{x ∈ E : gᵀ(x − c) ≤ 0}`.
pub fn ellipsoid_kl_update<T: Real>(e: &Ellipsoid<T>, g: &[T]) -> Result<Ellipsoid<T>> {
    let d = e.dim();
    if g.len() != d {
        return Err(Error::LengthMismatch {
            what: "cut direction and ellipsoid dimension",
            left: g.len(),
            right: d,
        });
    }
    if g.iter().all(|&x| x == T::zero()) {
        return Err(Error::InvalidArgument("cut direction is zero".into()));
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite cut direction".into()));
    }
    // The cut depends on g only up to scale.
    let top = g.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    let g: Vec<T> = g.iter().map(|&x| x / top).collect();
    // Square-root form: with B = L Lᵀ and u = Lᵀg / ‖Lᵀg‖ the update is
    // L' = √s · L (I − β u uᵀ), which shrinks along g without cancellation.
    let l = &e.factor;
    let w: Vec<T> = (0..d).map(|k| (k..d).map(|i| l[(i, k)] * g[i]).sum()).collect();
    let gbg = dot(&w, &w);
    if !(gbg > T::c(MIN_CUT_NORM)) {
        return Err(Error::Geometry(format!("cut norm gᵀBg = {gbg} is too small")));
    }
    let u: Vec<T> = w.iter().map(|&x| x / gbg.sqrt()).collect();
    let b = l.mul_vec(&u);
    let n = T::c(d as f64);
    let center = e
        .center
        .iter()
        .zip(&b)
        .map(|(&c, &bi)| c - bi / (n + T::one()))
        .collect();
    let factor = if d == 1 {
        l.scale(T::c(0.5))
    } else {
        let root_s = (n * n / (n * n - T::one())).sqrt();
        let beta = T::one() - (T::one() - T::c(2.0) / (n + T::one())).sqrt();
        let mut r = Mat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                r[(i, j)] = root_s * (l[(i, j)] - beta * b[i] * u[j]);
            }
        }
        r.lower_root()
            .ok_or_else(|| Error::Geometry("updated ellipsoid is degenerate".into()))?
    };
    Ok(Ellipsoid::from_factor(center, factor))
}

/// `vol(E') / vol(E)` of one central cut in dimension `d`.
pub fn volume_ratio(d: usize) -> f64 {
    if d == 1 {
        return 0.5;
    }
    let n = d as f64;
    n / (n + 1.0) * (n * n / (n * n - 1.0)).powf((n - 1.0) / 2.0)
}

/// Forward KL divergence from the uniform law on an inner set to the uniform
/// law on a covering set, `ln(vol_outer / vol_inner)`.
pub fn uniform_kl<T: Real>(log_vol_inner: T, log_vol_outer: T) -> T {
    log_vol_outer - log_vol_inner
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidStep<T> {
    pub x: Vec<T>,
    pub value: T,
    pub gradient: Vec<T>,
    /// The region after the cut.
    pub region: Ellipsoid<T>,
}

/// Ellipsoid method: play the center, then replace the region by the
/// covering ellipsoid of its half on the descent side. Stops early when the
/// subgradient vanishes.
pub fn ellipsoid_run<T: Real>(
    mut oracle: impl FnMut(&[T]) -> Result<(T, Vec<T>)>,
    e0: &Ellipsoid<T>,
    rounds: usize,
) -> Result<Vec<EllipsoidStep<T>>> {
    let mut region = e0.clone();
    let mut steps = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let x = region.center.clone();
        let (value, gradient) = oracle(&x)?;
        let stop = gradient.iter().all(|&c| c == T::zero());
        if !stop {
            region = ellipsoid_kl_update(&region, &gradient)?;
        }
        steps.push(EllipsoidStep {
            x,
            value,
            gradient,
            region: region.clone(),
        });
        if stop {
            break;
        }
    }
    Ok(steps)
}

/// Draws `n_samples` uniform points of the half `{x ∈ E : gᵀ(x − c) ≤ 0}`
/// by rejection and reports whether all of them lie in `cover`.
pub fn halfellipsoid_cover_check<T: Real>(
    e: &Ellipsoid<T>,
    g: &[T],
    cover: &Ellipsoid<T>,
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<bool> {
    if g.len() != e.dim() || cover.dim() != e.dim() {
        return Err(Error::LengthMismatch {
            what: "cover check dimensions",
            left: g.len(),
            right: e.dim(),
        });
    }
    let tol = T::c(COVER_TOL);
    let mut accepted = 0;
    let mut ok = true;
    while accepted < n_samples {
        let x = e.sample_uniform(rng);
        let side: T = g
            .iter()
            .zip(&x)
            .zip(&e.center)
            .map(|((&gi, &xi), &ci)| gi * (xi - ci))
            .sum();
        if side > T::zero() {
            continue;
        }
        accepted += 1;
        ok &= cover.contains(&x, tol);
    }
    Ok(ok)
}
