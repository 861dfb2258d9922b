//! Continuum-armed Lipschitz bandit on `[0, 1]^d`.
//!
//! A candidate `x` is the argmax of some `M`-Lipschitz interpolant of the
//! data exactly when `S(x)` below is nonempty:
//!
//! `S(x) = {(v, v_1..v_t) : v_i ≤ v ≤ v_i + M‖x − x_i‖, |v_i − v_j| ≤ M‖x_i − x_j‖}`.
//!
//! With exact feedback the `v_i` are pinned to the observations, which makes
//! the check closed form. With Gaussian feedback the `v_i` stay free and the
//! negative profile log-likelihood is the value `V(x)` of a small QP.

use crate::error::{Error, Result};
use crate::linalg::dist2;
use crate::model::EpisodeRecord;
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::solvers::{solve_qp, ConstraintSet, QuadObjective};

/// Slack allowed in pairwise consistency and noiseless feasibility checks.
pub const CONSISTENCY_TOL: f64 = 1e-12;

pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// Observed points `x_i ∈ [0, 1]^d` and their feedback `φ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumDataset<T> {
    dim: usize,
    points: Vec<Vec<T>>,
    values: Vec<T>,
}

impl<T: Real> ContinuumDataset<T> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(Self {
            dim,
            points: Vec::new(),
            values: Vec::new(),
        })
    }

    pub fn from_parts(dim: usize, points: Vec<Vec<T>>, values: Vec<T>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::LengthMismatch {
                what: "points and values",
                left: points.len(),
                right: values.len(),
            });
        }
        let mut d = Self::new(dim)?;
        for (x, phi) in points.into_iter().zip(values) {
            d.push(x, phi)?;
        }
        Ok(d)
    }

    pub fn push(&mut self, x: Vec<T>, phi: T) -> Result<()> {
        check_point(&x, self.dim)?;
        if !phi.is_finite() {
            return Err(Error::InvalidArgument(format!("feedback {phi} is not finite")));
        }
        self.points.push(x);
        self.values.push(phi);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Lipschitz constant `M` (may be `+inf`) and Gaussian noise scale `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzSpec<T> {
    m: T,
    sigma: T,
}

impl<T: Real> LipschitzSpec<T> {
    pub fn new(m: T, sigma: T) -> Result<Self> {
        check_m(m)?;
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise scale {sigma} must be positive and finite"
            )));
        }
        Ok(Self { m, sigma })
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }
}

fn check_m<T: Real>(m: T) -> Result<()> {
    if !(m > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "Lipschitz constant {m} must be positive"
        )));
    }
    Ok(())
}

fn check_point<T: Real>(x: &[T], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::LengthMismatch {
            what: "point and dataset dimension",
            left: x.len(),
            right: dim,
        });
    }
    if let Some(c) = x.iter().find(|&&c| !(c >= T::zero() && c <= T::one())) {
        return Err(Error::InvalidArgument(format!("coordinate {c} outside [0, 1]")));
    }
    Ok(())
}

/// `M · d`, with `inf · 0 = 0` so coincident points stay tied for `M = inf`.
fn reach<T: Real>(m: T, d: T) -> T {
    if d == T::zero() {
        T::zero()
    } else {
        m * d
    }
}

fn inconsistent_pair<T: Real>(data: &ContinuumDataset<T>, m: T) -> Option<(usize, usize)> {
    let tol = T::c(CONSISTENCY_TOL);
    let (p, v) = (&data.points, &data.values);
    (0..p.len())
        .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
        .find(|&(i, j)| (v[i] - v[j]).abs() > reach(m, dist2(&p[i], &p[j])) + tol)
}

/// True iff some `M`-Lipschitz function interpolates the data exactly.
pub fn data_consistent<T: Real>(data: &ContinuumDataset<T>, m: T) -> bool {
    inconsistent_pair(data, m).is_none()
}

/// Whether `x` can be the maximizer of an `M`-Lipschitz interpolant:
/// `max_i φ_i ≤ min_i (φ_i + M‖x − x_i‖)`.
pub fn s_feasible_noiseless<T: Real>(x: &[T], data: &ContinuumDataset<T>, m: T) -> Result<bool> {
    check_m(m)?;
    check_point(x, data.dim)?;
    if let Some((i, j)) = inconsistent_pair(data, m) {
        return Err(Error::InconsistentData { i, j });
    }
    Ok(noiseless_check(x, data, m))
}

fn noiseless_check<T: Real>(x: &[T], data: &ContinuumDataset<T>, m: T) -> bool {
    let top = data.values.iter().copied().fold(T::neg_infinity(), T::max);
    let tol = T::c(CONSISTENCY_TOL);
    data.points
        .iter()
        .zip(&data.values)
        .all(|(p, &phi)| top <= phi + reach(m, dist2(x, p)) + tol)
}

/// An accepted draw and the number of candidates it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub x: Vec<T>,
    pub attempts: u64,
}

/// Uniform distribution on `[0, 1]^dim`.
pub fn uniform_prior<T: Real>(dim: usize) -> impl FnMut(&mut RngStream) -> Vec<T> {
    move |rng| (0..dim).map(|_| T::c(rng.uniform())).collect()
}

fn draw<T: Real>(prior: &mut impl FnMut(&mut RngStream) -> Vec<T>, dim: usize, rng: &mut RngStream) -> Result<Vec<T>> {
    let x = prior(rng);
    check_point(&x, dim)?;
    Ok(x)
}

/// Rejection sampler for the noiseless posterior: draw from the prior until
/// `S(x)` is nonempty.
pub fn sample_noiseless<T: Real>(
    mut prior: impl FnMut(&mut RngStream) -> Vec<T>,
    data: &ContinuumDataset<T>,
    m: T,
    rng: &mut RngStream,
    max_attempts: u64,
) -> Result<Sample<T>> {
    check_m(m)?;
    if let Some((i, j)) = inconsistent_pair(data, m) {
        return Err(Error::InconsistentData { i, j });
    }
    for attempts in 1..=max_attempts {
        let x = draw(&mut prior, data.dim, rng)?;
        if noiseless_check(&x, data, m) {
            return Ok(Sample { x, attempts });
        }
    }
    Err(Error::MaxAttempts {
        attempts: max_attempts,
        acceptance_rate: 0.0,
    })
}

/// Adds `|v_i − v_j| ≤ M‖x_i − x_j‖` with `v_i` at index `offset + i`.
fn pair_rows<T: Real>(c: &mut ConstraintSet<T>, data: &ContinuumDataset<T>, m: T, offset: usize) {
    if !m.is_finite() {
        return;
    }
    let p = &data.points;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            c.abs_diff_le(offset + i, offset + j, m * dist2(&p[i], &p[j]));
        }
    }
}

/// `V(x) = min_{S(x)} (1/2σ²) Σ (v_i − φ_i)²`, the negative profile
/// log-likelihood of `x` up to a constant.
pub fn v_value<T: Real>(x: &[T], data: &ContinuumDataset<T>, spec: &LipschitzSpec<T>) -> Result<T> {
    check_point(x, data.dim)?;
    let t = data.len();
    if t == 0 {
        return Ok(T::zero());
    }
    // Coordinate 0 is the value at x, which carries no weight.
    let mut c = ConstraintSet::new(t + 1);
    for (i, p) in data.points.iter().enumerate() {
        c.diff_le(i + 1, 0, T::zero());
        if spec.m.is_finite() {
            c.diff_le(0, i + 1, spec.m * dist2(x, p));
        }
    }
    pair_rows(&mut c, data, spec.m, 1);
    let w = T::one() / (T::c(2.0) * spec.sigma * spec.sigma);
    let mut weights = vec![w; t + 1];
    weights[0] = T::zero();
    let mut targets = vec![T::zero(); t + 1];
    targets[1..].copy_from_slice(&data.values);
    let r = solve_qp(&QuadObjective::new(weights, targets)?, &c)?.require_optimal()?;
    Ok(r.value.max(T::zero()))
}

/// `min_x V(x)`: the same program without the rows that involve `x`.
pub fn v_min<T: Real>(data: &ContinuumDataset<T>, spec: &LipschitzSpec<T>) -> Result<T> {
    let t = data.len();
    if t == 0 {
        return Ok(T::zero());
    }
    let mut c = ConstraintSet::new(t);
    pair_rows(&mut c, data, spec.m, 0);
    let w = T::one() / (T::c(2.0) * spec.sigma * spec.sigma);
    let r = solve_qp(&QuadObjective::new(vec![w; t], data.values.clone())?, &c)?.require_optimal()?;
    Ok(r.value.max(T::zero()))
}

/// Rejection sampler for the Gaussian-feedback posterior: accept a prior
/// draw `x` with probability `exp(V_min − V(x))`.
pub fn sample_gaussian<T: Real>(
    mut prior: impl FnMut(&mut RngStream) -> Vec<T>,
    data: &ContinuumDataset<T>,
    spec: &LipschitzSpec<T>,
    rng: &mut RngStream,
    max_attempts: u64,
) -> Result<Sample<T>> {
    let floor = v_min(data, spec)?;
    let mut mass = 0.0;
    for attempts in 1..=max_attempts {
        let x = draw(&mut prior, data.dim, rng)?;
        let p = (floor - v_value(&x, data, spec)?).min(T::zero()).exp().to_f64_lossy();
        mass += p;
        if rng.uniform() < p {
            return Ok(Sample { x, attempts });
        }
    }
    Err(Error::MaxAttempts {
        attempts: max_attempts,
        acceptance_rate: mass / max_attempts as f64,
    })
}

/// `f(x) = height − slope · ‖x − peak‖`, maximized at `peak`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeObjective<T> {
    peak: Vec<T>,
    height: T,
    slope: T,
}

impl<T: Real> ConeObjective<T> {
    pub fn new(peak: Vec<T>, height: T, slope: T) -> Result<Self> {
        check_point(&peak, peak.len())?;
        if peak.is_empty() {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if !height.is_finite() || !(slope >= T::zero()) || !slope.is_finite() {
            return Err(Error::InvalidArgument(
                "cone height and slope must be finite, slope nonnegative".into(),
            ));
        }
        Ok(Self { peak, height, slope })
    }

    pub fn dim(&self) -> usize {
        self.peak.len()
    }

    pub fn slope(&self) -> T {
        self.slope
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.height - self.slope * dist2(x, &self.peak)
    }

    pub fn max_value(&self) -> T {
        self.height
    }
}

/// Runs `rounds` rounds of posterior sampling with a uniform prior on the
/// cube. `noise_sd = None` observes `f` exactly and uses the noiseless
/// sampler; otherwise feedback carries `N(0, noise_sd²)` noise and the
/// Gaussian sampler uses `spec.sigma`.
pub fn run_continuum_episode<T: Real>(
    objective: &ConeObjective<T>,
    spec: &LipschitzSpec<T>,
    noise_sd: Option<T>,
    rounds: usize,
    max_attempts: u64,
    rng: &mut RngStream,
) -> Result<EpisodeRecord<Vec<T>, T>> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("an episode needs at least one round".into()));
    }
    if objective.slope > spec.m {
        return Err(Error::InvalidArgument(format!(
            "objective slope {} exceeds the Lipschitz constant {}",
            objective.slope, spec.m
        )));
    }
    if let Some(sd) = noise_sd {
        if !(sd >= T::zero()) || !sd.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise sd {sd} must be finite and nonnegative"
            )));
        }
    }
    let dim = objective.dim();
    let mut data = ContinuumDataset::new(dim)?;
    let mut record = EpisodeRecord::with_capacity(rounds);
    for _ in 0..rounds {
        let sample = match noise_sd {
            None => sample_noiseless(uniform_prior(dim), &data, spec.m, rng, max_attempts)?,
            Some(_) => sample_gaussian(uniform_prior(dim), &data, spec, rng, max_attempts)?,
        };
        let value = objective.eval(&sample.x);
        let phi = match noise_sd {
            None => value,
            Some(sd) => value + sd * T::c(rng.normal()),
        };
        data.push(sample.x.clone(), phi)?;
        record.record(sample.x, phi, objective.max_value() - value, None);
    }
    Ok(record)
}
