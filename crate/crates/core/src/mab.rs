//! Finite-armed bandits with a Gaussian working likelihood.
//!
//! The posterior weight of arm `j` is `exp(−Λ(j))` times its prior, where
//! `Λ(j)` is the smallest Gaussian negative log-likelihood (up to constants)
//! of any mean vector under which `j` is optimal.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::{Belief, EpisodeRecord};
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::solvers::{min_profile_ssq_all, solve_qp, ConstraintSet, QuadObjective};

/// Per-arm pull counts and streaming empirical means.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats<T> {
    pulls: Vec<u64>,
    means: Vec<T>,
}

impl<T: Real> ArmStats<T> {
    pub fn new(k: usize) -> Self {
        Self {
            pulls: vec![0; k],
            means: vec![T::zero(); k],
        }
    }

    /// Builds stats directly; means of unpulled arms must be zero.
    pub fn from_parts(pulls: Vec<u64>, means: Vec<T>) -> Result<Self> {
        if pulls.len() != means.len() {
            return Err(Error::LengthMismatch {
                what: "pulls and means",
                left: pulls.len(),
                right: means.len(),
            });
        }
        for (j, (&n, &m)) in pulls.iter().zip(&means).enumerate() {
            if !m.is_finite() {
                return Err(Error::InvalidArgument(format!("mean of arm {j} is {m}")));
            }
            if n == 0 && m != T::zero() {
                return Err(Error::InvalidArgument(format!("unpulled arm {j} has mean {m}")));
            }
        }
        Ok(Self { pulls, means })
    }

    pub fn k(&self) -> usize {
        self.pulls.len()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn total_pulls(&self) -> u64 {
        self.pulls.iter().sum()
    }

    pub fn update(&mut self, arm: usize, reward: T) {
        self.pulls[arm] += 1;
        let n = T::c(self.pulls[arm] as f64);
        let m = self.means[arm];
        self.means[arm] = m + (reward - m) / n;
    }

    /// Adds `c` to every pulled arm's mean.
    pub fn shifted(&self, c: T) -> Self {
        let means = self
            .pulls
            .iter()
            .zip(&self.means)
            .map(|(&n, &m)| if n > 0 { m + c } else { m })
            .collect();
        Self {
            pulls: self.pulls.clone(),
            means,
        }
    }

    /// Highest empirical mean among pulled arms; lowest index on ties.
    pub fn empirical_best(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..self.k() {
            if self.pulls[j] == 0 {
                continue;
            }
            if best.is_none_or(|b| self.means[j] > self.means[b]) {
                best = Some(j);
            }
        }
        best
    }

    fn objective(&self) -> Result<QuadObjective<T>> {
        QuadObjective::new(self.pulls.iter().map(|&n| T::c(n as f64)).collect(), self.means.clone())
    }
}

/// Known smoothness: `|θ_i − θ_j| ≤ M d(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmLipschitz<T> {
    m: T,
    dist: Mat<T>,
}

impl<T: Real> ArmLipschitz<T> {
    /// Checks `M > 0` and that `dist` is a (pseudo)metric within `1e-9`.
    pub fn new(m: T, dist: Mat<T>) -> Result<Self> {
        if !(m > T::zero()) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Lipschitz constant {m} must be positive"
            )));
        }
        let k = dist.rows();
        if dist.cols() != k {
            return Err(Error::LengthMismatch {
                what: "distance matrix rows and columns",
                left: k,
                right: dist.cols(),
            });
        }
        let tol = T::c(1e-9);
        for i in 0..k {
            if dist[(i, i)] != T::zero() {
                return Err(Error::InvalidArgument(format!("d({i},{i}) is not zero")));
            }
            for j in 0..k {
                let d = dist[(i, j)];
                if !(d >= T::zero()) || !d.is_finite() {
                    return Err(Error::InvalidArgument(format!("d({i},{j}) = {d}")));
                }
                if (d - dist[(j, i)]).abs() > tol {
                    return Err(Error::InvalidArgument(format!("d({i},{j}) ≠ d({j},{i})")));
                }
                for l in 0..k {
                    if d > dist[(i, l)] + dist[(l, j)] + tol {
                        return Err(Error::InvalidArgument(format!(
                            "triangle inequality fails for ({i},{l},{j})"
                        )));
                    }
                }
            }
        }
        Ok(Self { m, dist })
    }

    /// Arms at positions on a line, `d(i, j) = |x_i − x_j|`.
    pub fn on_line(m: T, positions: &[T]) -> Result<Self> {
        let k = positions.len();
        let mut dist = Mat::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                dist[(i, j)] = (positions[i] - positions[j]).abs();
            }
        }
        Self::new(m, dist)
    }

    pub fn constant(&self) -> T {
        self.m
    }

    pub fn distances(&self) -> &Mat<T> {
        &self.dist
    }

    pub fn k(&self) -> usize {
        self.dist.rows()
    }

    fn constraints(&self) -> ConstraintSet<T> {
        let k = self.k();
        let mut c = ConstraintSet::new(k);
        for i in 0..k {
            for j in i + 1..k {
                c.abs_diff_le(i, j, self.m * self.dist[(i, j)]);
            }
        }
        c
    }
}

/// Working likelihood: rewards of arm `j` are modeled as `N(θ_j, σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MabModel<T> {
    sigma: T,
    lipschitz: Option<ArmLipschitz<T>>,
}

impl<T: Real> MabModel<T> {
    pub const DEFAULT_SIGMA: f64 = 1.2;

    pub fn new(sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("sigma {sigma} must be positive")));
        }
        Ok(Self { sigma, lipschitz: None })
    }

    pub fn with_lipschitz(mut self, lipschitz: ArmLipschitz<T>) -> Self {
        self.lipschitz = Some(lipschitz);
        self
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn lipschitz(&self) -> Option<&ArmLipschitz<T>> {
        self.lipschitz.as_ref()
    }
}

impl<T: Real> Default for MabModel<T> {
    fn default() -> Self {
        Self {
            sigma: T::c(Self::DEFAULT_SIGMA),
            lipschitz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvKind<T> {
    /// `μ_j + noise_sd · N(0, 1)`.
    Gaussian { means: Vec<T>, noise_sd: T },
    /// `1` with probability `p_j`, else `0`.
    Bernoulli { probs: Vec<T> },
    /// Uniform on `[μ_j − h, μ_j + h]`.
    Bounded { means: Vec<T>, half_width: T },
}

/// Simulated reward distributions with their true means and gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnv<T> {
    kind: EnvKind<T>,
    means: Vec<T>,
    gaps: Vec<T>,
}

impl<T: Real> BanditEnv<T> {
    pub fn new(kind: EnvKind<T>) -> Result<Self> {
        let means = match &kind {
            EnvKind::Gaussian { means, noise_sd } => {
                if !(*noise_sd >= T::zero()) || !noise_sd.is_finite() {
                    return Err(Error::InvalidArgument(format!("noise_sd {noise_sd} must be ≥ 0")));
                }
                means.clone()
            }
            EnvKind::Bernoulli { probs } => {
                if let Some(p) = probs.iter().find(|&&p| !(p >= T::zero() && p <= T::one())) {
                    return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
                }
                probs.clone()
            }
            EnvKind::Bounded { means, half_width } => {
                if !(*half_width >= T::zero()) || !half_width.is_finite() {
                    return Err(Error::InvalidArgument(format!("half_width {half_width} must be ≥ 0")));
                }
                means.clone()
            }
        };
        if means.is_empty() {
            return Err(Error::InvalidArgument("environment needs at least one arm".into()));
        }
        if let Some(m) = means.iter().find(|m| !m.is_finite()) {
            return Err(Error::InvalidArgument(format!("mean {m} is not finite")));
        }
        let best = means.iter().copied().fold(T::neg_infinity(), T::max);
        let gaps = means.iter().map(|&m| best - m).collect();
        Ok(Self { kind, means, gaps })
    }

    pub fn gaussian(means: Vec<T>, noise_sd: T) -> Result<Self> {
        Self::new(EnvKind::Gaussian { means, noise_sd })
    }

    pub fn bernoulli(probs: Vec<T>) -> Result<Self> {
        Self::new(EnvKind::Bernoulli { probs })
    }

    pub fn bounded(means: Vec<T>, half_width: T) -> Result<Self> {
        Self::new(EnvKind::Bounded { means, half_width })
    }

    pub fn kind(&self) -> &EnvKind<T> {
        &self.kind
    }

    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn true_means(&self) -> &[T] {
        &self.means
    }

    pub fn gaps(&self) -> &[T] {
        &self.gaps
    }

    /// Rewards that are not 1-sub-Gaussian void the regret guarantees.
    pub fn warnings(&self) -> Vec<String> {
        match &self.kind {
            EnvKind::Gaussian { noise_sd, .. } if *noise_sd > T::one() => {
                vec![format!("noise_sd {noise_sd} > 1: rewards are not 1-sub-Gaussian")]
            }
            EnvKind::Bounded { half_width, .. } if *half_width > T::one() => {
                vec![format!("half_width {half_width} > 1: rewards are not 1-sub-Gaussian")]
            }
            _ => Vec::new(),
        }
    }

    pub fn draw(&self, arm: usize, rng: &mut RngStream) -> T {
        match &self.kind {
            EnvKind::Gaussian { means, noise_sd } => means[arm] + *noise_sd * T::c(rng.normal()),
            EnvKind::Bernoulli { probs } => {
                if rng.bernoulli(probs[arm].to_f64_lossy()) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            EnvKind::Bounded { means, half_width } => means[arm] + *half_width * T::c(rng.uniform_range(-1.0, 1.0)),
        }
    }
}

/// `Λ(j) = min_{θ ∈ Θ_j} Σ N_k (θ_k − μ̂_k)² / (2σ²)`.
pub fn profile_neg_loglik<T: Real>(stats: &ArmStats<T>, j: usize, model: &MabModel<T>) -> Result<T> {
    if j >= stats.k() {
        return Err(Error::InvalidArgument(format!(
            "arm {j} out of range for {} arms",
            stats.k()
        )));
    }
    match model.lipschitz() {
        None => Ok(profile_all_unconstrained(stats, model)?[j]),
        Some(lip) => lipschitz_profile(stats, j, model, lip),
    }
}

/// `Λ(j)` for every arm.
pub fn profile_neg_loglik_all<T: Real>(stats: &ArmStats<T>, model: &MabModel<T>) -> Result<Vec<T>> {
    match model.lipschitz() {
        None => profile_all_unconstrained(stats, model),
        Some(lip) => (0..stats.k())
            .map(|j| lipschitz_profile(stats, j, model, lip))
            .collect(),
    }
}

fn two_sigma_sq<T: Real>(model: &MabModel<T>) -> T {
    T::c(2.0) * model.sigma() * model.sigma()
}

fn profile_all_unconstrained<T: Real>(stats: &ArmStats<T>, model: &MabModel<T>) -> Result<Vec<T>> {
    if stats.total_pulls() == 0 {
        return Ok(vec![T::zero(); stats.k()]);
    }
    let denom = two_sigma_sq(model);
    let obj = stats.objective()?;
    Ok(min_profile_ssq_all(&obj)?
        .into_iter()
        .enumerate()
        .map(|(j, (v, _))| if stats.pulls[j] == 0 { T::zero() } else { v / denom })
        .collect())
}

fn lipschitz_profile<T: Real>(stats: &ArmStats<T>, j: usize, model: &MabModel<T>, lip: &ArmLipschitz<T>) -> Result<T> {
    if lip.k() != stats.k() {
        return Err(Error::LengthMismatch {
            what: "distance matrix and arm count",
            left: lip.k(),
            right: stats.k(),
        });
    }
    let mut cons = ConstraintSet::arm_optimal(stats.k(), j);
    cons.extend(&lip.constraints())?;
    let r = solve_qp(&stats.objective()?, &cons)?.require_optimal()?;
    Ok(r.value / two_sigma_sq(model))
}

fn check_prior<T: Real>(prior: &Belief<usize, T>, k: usize) -> Result<()> {
    if prior.len() != k || prior.support().iter().enumerate().any(|(i, &s)| i != s) {
        return Err(Error::InvalidBelief(format!("prior support must be the arms 0..{k}")));
    }
    Ok(())
}

/// Posterior over the optimal arm: prior reweighted by `exp(−Λ(j))`.
pub fn mab_posterior<T: Real>(
    stats: &ArmStats<T>,
    prior: &Belief<usize, T>,
    model: &MabModel<T>,
) -> Result<Belief<usize, T>> {
    check_prior(prior, stats.k())?;
    let neg: Vec<T> = profile_neg_loglik_all(stats, model)?.into_iter().map(|l| -l).collect();
    prior.reweight(&neg)
}

/// Two-arm posterior from `Q(1)/Q(2) = e^α Q₀(1)/Q₀(2)` with
/// `α = (μ̂₁ − μ̂₂)² / (2σ²(1/N₁ + 1/N₂))` and arm 1 the empirical leader.
pub fn two_arm_closed_form<T: Real>(
    stats: &ArmStats<T>,
    sigma: T,
    prior: &Belief<usize, T>,
) -> Result<Belief<usize, T>> {
    if stats.k() != 2 {
        return Err(Error::InvalidArgument(format!(
            "closed form needs 2 arms, got {}",
            stats.k()
        )));
    }
    check_prior(prior, 2)?;
    let (n, m) = (stats.pulls(), stats.means());
    if n[0] == 0 || n[1] == 0 {
        return Err(Error::InvalidArgument("closed form needs both arms pulled".into()));
    }
    let (lead, lag) = if m[0] >= m[1] { (0, 1) } else { (1, 0) };
    let diff = m[lead] - m[lag];
    let harmonic = T::one() / T::c(n[0] as f64) + T::one() / T::c(n[1] as f64);
    let alpha = diff * diff / (T::c(2.0) * sigma * sigma * harmonic);
    let mut log_lik = [T::zero(); 2];
    log_lik[lead] = alpha;
    prior.reweight(&log_lik)
}

/// One round: sample an arm from the posterior, observe its reward.
pub fn mints_step<T: Real>(
    stats: &ArmStats<T>,
    prior: &Belief<usize, T>,
    model: &MabModel<T>,
    env: &BanditEnv<T>,
    rng: &mut RngStream,
) -> Result<(ArmStats<T>, usize, T)> {
    let posterior = mab_posterior(stats, prior, model)?;
    let arm = posterior.sample(rng)?;
    let reward = env.draw(arm, rng);
    let mut next = stats.clone();
    next.update(arm, reward);
    Ok((next, arm, reward))
}

/// Conjugate posterior `(mean, variance)` of one arm's mean under a
/// `N(0, 1)` prior and `N(θ, σ²)` rewards.
pub fn gaussian_ts_posterior<T: Real>(pulls: u64, mean: T, sigma: T) -> (T, T) {
    let precision = T::c(pulls as f64) / (sigma * sigma);
    let var = T::one() / (T::one() + precision);
    (var * precision * mean, var)
}

/// Thompson sampling baseline: sample each arm's mean from its conjugate
/// posterior and play the argmax (lowest index on ties).
pub fn baseline_gaussian_ts_step<T: Real>(
    stats: &ArmStats<T>,
    sigma: T,
    env: &BanditEnv<T>,
    rng: &mut RngStream,
) -> Result<(ArmStats<T>, usize, T)> {
    if env.k() != stats.k() {
        return Err(Error::LengthMismatch {
            what: "environment and stats arm counts",
            left: env.k(),
            right: stats.k(),
        });
    }
    let mut arm = 0;
    let mut best = T::neg_infinity();
    for j in 0..stats.k() {
        let (mu, var) = gaussian_ts_posterior(stats.pulls[j], stats.means[j], sigma);
        let index = mu + var.sqrt() * T::c(rng.normal());
        if index > best {
            best = index;
            arm = j;
        }
    }
    let reward = env.draw(arm, rng);
    let mut next = stats.clone();
    next.update(arm, reward);
    Ok((next, arm, reward))
}

/// Runs `rounds` MINTS rounds from empty stats.
pub fn run_episode<T: Real>(
    rounds: usize,
    prior: &Belief<usize, T>,
    model: &MabModel<T>,
    env: &BanditEnv<T>,
    rng: &mut RngStream,
) -> Result<EpisodeRecord<usize, T>> {
    check_episode(rounds, env, prior.len())?;
    let mut stats = ArmStats::new(env.k());
    let mut record = EpisodeRecord::with_capacity(rounds);
    for _ in 0..rounds {
        let posterior = mab_posterior(&stats, prior, model)?;
        let arm = posterior.sample(rng)?;
        let reward = env.draw(arm, rng);
        stats.update(arm, reward);
        record.record(arm, reward, env.gaps()[arm], Some(posterior.entropy()));
    }
    Ok(record)
}

/// Runs `rounds` rounds of the Thompson sampling baseline.
pub fn run_ts_episode<T: Real>(
    rounds: usize,
    sigma: T,
    env: &BanditEnv<T>,
    rng: &mut RngStream,
) -> Result<EpisodeRecord<usize, T>> {
    check_episode(rounds, env, env.k())?;
    let mut stats = ArmStats::new(env.k());
    let mut record = EpisodeRecord::with_capacity(rounds);
    for _ in 0..rounds {
        let (next, arm, reward) = baseline_gaussian_ts_step(&stats, sigma, env, rng)?;
        stats = next;
        record.record(arm, reward, env.gaps()[arm], None);
    }
    Ok(record)
}

fn check_episode<T: Real>(rounds: usize, env: &BanditEnv<T>, k: usize) -> Result<()> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("an episode needs at least one round".into()));
    }
    if env.k() != k {
        return Err(Error::LengthMismatch {
            what: "environment and prior arm counts",
            left: env.k(),
            right: k,
        });
    }
    Ok(())
}
