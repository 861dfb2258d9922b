//! Posted-price selling with binary demand on a finite price grid.
//!
//! Demand probabilities `θ_j` at prices `p_1 < … < p_K` are nonincreasing and
//! drop by at most `M (p_{j+1} − p_j)` between neighbours. The hypothesis
//! "price `j` is optimal" is `p_j θ_j ≥ p_k θ_k` for every `k` (revenue), or
//! `θ_j ≥ θ_k` under the literal reading.

use crate::error::{Error, Result};
use crate::model::{Belief, EpisodeRecord};
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::solvers::bernoulli::{boxed_set, maximize};
use crate::solvers::{
    bernoulli_loglik, max_bernoulli_loglik_with, BernoulliOptions, ConstraintSet, SolveResult, SolveStatus,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PriceGrid<T> {
    prices: Vec<T>,
    m: T,
}

impl<T: Real> PriceGrid<T> {
    /// `M = ∞` is allowed and drops the smoothness rows.
    pub fn new(prices: Vec<T>, lipschitz_m: T) -> Result<Self> {
        if prices.is_empty() {
            return Err(Error::InvalidArgument("price grid is empty".into()));
        }
        if let Some(p) = prices.iter().find(|&&p| !(p > T::zero()) || !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("price {p} must be positive and finite")));
        }
        if prices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("prices must be strictly increasing".into()));
        }
        if !(lipschitz_m > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "Lipschitz constant {lipschitz_m} must be positive"
            )));
        }
        Ok(Self { prices, m: lipschitz_m })
    }

    pub fn k(&self) -> usize {
        self.prices.len()
    }

    pub fn prices(&self) -> &[T] {
        &self.prices
    }

    pub fn lipschitz_m(&self) -> T {
        self.m
    }
}

/// Which set of demand vectors makes price `j` optimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Hypothesis {
    /// `p_j θ_j ≥ p_k θ_k` for all `k`.
    #[default]
    Revenue,
    /// `θ_j ≥ θ_k` for all `k`.
    Literal,
}

/// `0 ≤ θ_K ≤ … ≤ θ_1 ≤ 1` and `θ_j − θ_{j+1} ≤ M (p_{j+1} − p_j)`.
pub fn pricing_constraint_set<T: Real>(grid: &PriceGrid<T>) -> ConstraintSet<T> {
    let k = grid.k();
    let mut c = ConstraintSet::new(k);
    c.lower(k - 1, T::zero());
    for j in 0..k - 1 {
        c.diff_le(j + 1, j, T::zero());
    }
    c.upper(0, T::one());
    if grid.m.is_finite() {
        for j in 0..k - 1 {
            c.diff_le(j, j + 1, grid.m * (grid.prices[j + 1] - grid.prices[j]));
        }
    }
    c
}

fn hypothesis_weights<T: Real>(grid: &PriceGrid<T>, hyp: Hypothesis) -> Vec<T> {
    match hyp {
        Hypothesis::Revenue => grid.prices.clone(),
        Hypothesis::Literal => vec![T::one(); grid.k()],
    }
}

/// Rows `a_k θ_k − a_j θ_j ≤ 0` for `k ≠ j`.
pub fn hypothesis_constraints<T: Real>(grid: &PriceGrid<T>, j: usize, hyp: Hypothesis) -> ConstraintSet<T> {
    let a = hypothesis_weights(grid, hyp);
    let mut c = ConstraintSet::new(grid.k());
    for k in (0..grid.k()).filter(|&k| k != j) {
        c.push_sparse(&[(k, a[k]), (j, -a[j])], T::zero());
    }
    c
}

/// Distribution of buyer valuations.
#[derive(Debug, Clone, PartialEq)]
pub enum ValuationModel<T> {
    UniformOn {
        a: T,
        b: T,
    },
    /// Knots `(v_i, F(v_i))`: `F = 0` left of the first knot, linear between
    /// knots, and `1` from the last knot on. A first value above zero is an atom.
    PiecewiseLinearCdf {
        knots: Vec<(T, T)>,
    },
}

impl<T: Real> ValuationModel<T> {
    pub fn uniform(a: T, b: T) -> Result<Self> {
        let m = ValuationModel::UniformOn { a, b };
        m.validate()?;
        Ok(m)
    }

    pub fn piecewise_linear(knots: Vec<(T, T)>) -> Result<Self> {
        let m = ValuationModel::PiecewiseLinearCdf { knots };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ValuationModel::UniformOn { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a >= T::zero() && b > a) {
                    return Err(Error::InvalidArgument(format!("uniform valuation on [{a}, {b}]")));
                }
            }
            ValuationModel::PiecewiseLinearCdf { knots } => {
                if knots.is_empty() {
                    return Err(Error::InvalidArgument("CDF needs at least one knot".into()));
                }
                for (i, &(v, f)) in knots.iter().enumerate() {
                    if !v.is_finite() || !(T::zero()..=T::one()).contains(&f) {
                        return Err(Error::InvalidArgument(format!("knot {i} = ({v}, {f})")));
                    }
                    if i > 0 {
                        let (pv, pf) = knots[i - 1];
                        if v <= pv || f < pf {
                            return Err(Error::InvalidArgument(format!(
                                "knots must increase in value and be nondecreasing in CDF at {i}"
                            )));
                        }
                    }
                }
                if knots[knots.len() - 1].1 != T::one() {
                    return Err(Error::InvalidArgument("CDF must reach 1 at the last knot".into()));
                }
            }
        }
        Ok(())
    }

    /// `F(v) = P(valuation ≤ v)`.
    pub fn cdf(&self, v: T) -> T {
        match self {
            ValuationModel::UniformOn { a, b } => ((v - *a) / (*b - *a)).max(T::zero()).min(T::one()),
            ValuationModel::PiecewiseLinearCdf { knots } => {
                if v < knots[0].0 {
                    return T::zero();
                }
                for w in knots.windows(2) {
                    let ((v0, f0), (v1, f1)) = (w[0], w[1]);
                    if v < v1 {
                        return f0 + (f1 - f0) * (v - v0) / (v1 - v0);
                    }
                }
                T::one()
            }
        }
    }

    /// `θ_x = P(valuation ≥ x) = 1 − F(x⁻)`.
    pub fn demand(&self, price: T) -> T {
        match self {
            ValuationModel::PiecewiseLinearCdf { knots } if price <= knots[0].0 => T::one(),
            _ => T::one() - self.cdf(price),
        }
    }

    /// Inverse-CDF draw from one uniform.
    pub fn sample(&self, rng: &mut RngStream) -> T {
        let u = T::c(rng.uniform());
        match self {
            ValuationModel::UniformOn { a, b } => *a + (*b - *a) * u,
            ValuationModel::PiecewiseLinearCdf { knots } => {
                if u <= knots[0].1 {
                    return knots[0].0;
                }
                for w in knots.windows(2) {
                    let ((v0, f0), (v1, f1)) = (w[0], w[1]);
                    if u <= f1 && f1 > f0 {
                        return v0 + (v1 - v0) * (u - f0) / (f1 - f0);
                    }
                }
                knots[knots.len() - 1].0
            }
        }
    }
}

/// One buyer: purchase iff the posted price is at most their valuation.
pub fn simulate_demand<T: Real>(model: &ValuationModel<T>, price: T, rng: &mut RngStream) -> bool {
    price <= model.sample(rng)
}

/// Per-price sale counts and purchase frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingStats<T> {
    counts: Vec<u64>,
    means: Vec<T>,
}

impl<T: Real> PricingStats<T> {
    pub fn new(k: usize) -> Self {
        Self {
            counts: vec![0; k],
            means: vec![T::zero(); k],
        }
    }

    pub fn from_parts(counts: Vec<u64>, means: Vec<T>) -> Result<Self> {
        if counts.len() != means.len() {
            return Err(Error::LengthMismatch {
                what: "counts and means",
                left: counts.len(),
                right: means.len(),
            });
        }
        if let Some(m) = means.iter().find(|&&m| !(T::zero()..=T::one()).contains(&m)) {
            return Err(Error::InvalidArgument(format!("purchase frequency {m} outside [0, 1]")));
        }
        Ok(Self { counts, means })
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn update(&mut self, j: usize, sold: bool) {
        self.counts[j] += 1;
        let n = T::c(self.counts[j] as f64);
        let y = if sold { T::one() } else { T::zero() };
        let m = self.means[j];
        self.means[j] = (m + (y - m) / n).max(T::zero()).min(T::one());
    }

    fn weights(&self) -> Vec<T> {
        self.counts.iter().map(|&n| T::c(n as f64)).collect()
    }
}

fn check_dims<T: Real>(stats: &PricingStats<T>, grid: &PriceGrid<T>) -> Result<()> {
    if stats.k() != grid.k() {
        return Err(Error::LengthMismatch {
            what: "pricing stats and price grid",
            left: stats.k(),
            right: grid.k(),
        });
    }
    Ok(())
}

/// Largest Bernoulli log-likelihood over demand vectors under which price
/// `j` is optimal.
pub fn pricing_profile_loglik<T: Real>(
    stats: &PricingStats<T>,
    grid: &PriceGrid<T>,
    j: usize,
    hyp: Hypothesis,
) -> Result<T> {
    check_dims(stats, grid)?;
    if j >= grid.k() {
        return Err(Error::InvalidArgument(format!("price index {j} out of range")));
    }
    let mut cons = pricing_constraint_set(grid);
    cons.extend(&hypothesis_constraints(grid, j, hyp))?;
    solve_profile(stats, &cons, None).map(|(v, _)| v)
}

fn solve_profile<T: Real>(
    stats: &PricingStats<T>,
    cons: &ConstraintSet<T>,
    start: Option<&[T]>,
) -> Result<(T, Vec<T>)> {
    let r = max_bernoulli_loglik_with(
        &stats.weights(),
        &stats.means,
        cons,
        &BernoulliOptions::default(),
        start,
    )?;
    profile_outcome(r)
}

fn profile_outcome<T: Real>(r: SolveResult<T>) -> Result<(T, Vec<T>)> {
    match r.status {
        SolveStatus::Optimal => Ok((r.value, r.argmin)),
        SolveStatus::Infeasible => Err(Error::Solver("pricing hypothesis polytope is empty".into())),
        SolveStatus::MaxIterations => Err(Error::Solver(
            "Bernoulli likelihood maximization hit its iteration cap".into(),
        )),
    }
}

fn check_prior<T: Real>(prior: &Belief<usize, T>, k: usize) -> Result<()> {
    if prior.len() != k || prior.support().iter().enumerate().any(|(i, &s)| i != s) {
        return Err(Error::InvalidBelief(format!("prior support must be the prices 0..{k}")));
    }
    Ok(())
}

/// Prior reweighted by the profile likelihood of each price.
pub fn pricing_posterior<T: Real>(
    stats: &PricingStats<T>,
    grid: &PriceGrid<T>,
    prior: &Belief<usize, T>,
    hyp: Hypothesis,
) -> Result<Belief<usize, T>> {
    check_prior(prior, grid.k())?;
    let log_lik = (0..grid.k())
        .map(|j| {
            if prior.weights()[j] > T::zero() {
                pricing_profile_loglik(stats, grid, j, hyp)
            } else {
                Ok(T::zero())
            }
        })
        .collect::<Result<Vec<T>>>()?;
    prior.reweight(&log_lik)
}

/// Log-weight gap beyond which `exp` underflows to exactly zero, with margin.
fn underflow_gap<T: Real>() -> T {
    T::min_positive_value().ln() + T::epsilon().ln() - T::c(10.0)
}

/// Incremental posterior computation for a run of rounds on one grid.
///
/// Produces the same posterior as [`pricing_posterior`] up to solver
/// tolerance, but warm-starts each hypothesis from its previous optimum and
/// skips hypotheses whose weight provably underflows to zero: a Lagrangian
/// relaxation keeping one revenue row gives an upper bound on their profile
/// log-likelihood.
#[derive(Debug, Clone)]
pub struct PricingPosterior<T> {
    grid: PriceGrid<T>,
    hyp: Hypothesis,
    opts: BernoulliOptions,
    /// Each set paired with its intersection with the likelihood box.
    base: (ConstraintSet<T>, ConstraintSet<T>),
    hypotheses: Vec<(ConstraintSet<T>, ConstraintSet<T>)>,
    warm: Vec<Option<Vec<T>>>,
    base_warm: Option<Vec<T>>,
    /// Binding rows at the last optimum, per hypothesis then the base.
    active: Vec<Vec<usize>>,
    /// Whether each hypothesis was last seen more than half the underflow
    /// gap below the floor's anchor.
    far: Vec<bool>,
    skipped: u64,
    solved: u64,
}

impl<T: Real> PricingPosterior<T> {
    pub fn new(grid: PriceGrid<T>, hyp: Hypothesis) -> Self {
        let opts = BernoulliOptions::default();
        let base = pricing_constraint_set(&grid);
        let base_full = boxed_set(&base, &opts);
        let hypotheses = (0..grid.k())
            .map(|j| {
                let mut c = base.clone();
                c.extend(&hypothesis_constraints(&grid, j, hyp))
                    .expect("same dimension");
                let full = boxed_set(&c, &opts);
                (c, full)
            })
            .collect();
        let k = grid.k();
        Self {
            grid,
            hyp,
            opts,
            base: (base, base_full),
            hypotheses,
            warm: vec![None; k],
            base_warm: None,
            active: vec![Vec::new(); k + 1],
            far: vec![false; k],
            skipped: 0,
            solved: 0,
        }
    }

    pub fn grid(&self) -> &PriceGrid<T> {
        &self.grid
    }

    /// (hypotheses skipped by the bound, hypotheses solved) so far.
    pub fn counters(&self) -> (u64, u64) {
        (self.skipped, self.solved)
    }

    pub fn posterior(&mut self, stats: &PricingStats<T>, prior: &Belief<usize, T>) -> Result<Belief<usize, T>> {
        check_dims(stats, &self.grid)?;
        check_prior(prior, self.grid.k())?;
        let k = self.grid.k();
        if stats.counts.iter().all(|&n| n == 0) {
            return Ok(prior.clone());
        }
        let counts = stats.weights();
        let opts = self.opts;
        let solve = |sets: &(ConstraintSet<T>, ConstraintSet<T>), start: Option<&[T]>, active: &mut Vec<usize>| {
            profile_outcome(maximize(&counts, &stats.means, &sets.0, &sets.1, &opts, start, active)?)
        };
        let (best_value, best_theta) = solve(&self.base, self.base_warm.as_deref(), &mut self.active[k])?;
        self.base_warm = Some(best_theta.clone());
        let delta = T::c(self.opts.boundary_delta);
        let mut free: Option<Vec<T>> = None;

        let a = hypothesis_weights(&self.grid, self.hyp);
        let log_prior = prior.log_weights();
        // Hypotheses the unconstrained optimum already satisfies attain it.
        let contains_best = |j: usize| (0..k).all(|i| a[i] * best_theta[i] <= a[j] * best_theta[j]);
        let anchor = (0..k)
            .filter(|&j| prior.weights()[j] > T::zero() && contains_best(j))
            .max_by(|&x, &y| log_prior[x].partial_cmp(&log_prior[y]).unwrap());
        let floor = anchor.map(|j| best_value + log_prior[j] + underflow_gap::<T>());

        let mut log_lik = vec![T::zero(); k];
        for j in 0..k {
            if prior.weights()[j] == T::zero() {
                continue;
            }
            if contains_best(j) {
                log_lik[j] = best_value;
                continue;
            }
            // The bound only pays off for hypotheses already far below.
            if let Some(floor) = floor.filter(|_| self.far[j]) {
                let free = free.get_or_insert_with(|| {
                    (0..k)
                        .map(|i| coordinate_max(counts[i], stats.means[i], T::zero(), delta))
                        .collect()
                });
                let bound = pair_bound(&counts, &stats.means, free, &a, j, delta);
                if bound + log_prior[j] < floor {
                    log_lik[j] = T::neg_infinity();
                    self.skipped += 1;
                    continue;
                }
            }
            let start = self.warm[j].as_deref().unwrap_or(&best_theta);
            let (v, theta) = solve(&self.hypotheses[j], Some(start), &mut self.active[j])?;
            self.solved += 1;
            log_lik[j] = v;
            self.warm[j] = Some(theta);
            self.far[j] = floor.is_some_and(|f| v + log_prior[j] < f - underflow_gap::<T>() / T::c(2.0));
        }
        prior.reweight(&log_lik)
    }
}

/// Upper bound on the profile log-likelihood of hypothesis `j`: keep only
/// one row `a_i θ_i ≤ a_j θ_j` (the tightest over `i`) and bound that
/// two-coordinate problem by its Lagrangian dual at an approximately
/// optimal multiplier. Any multiplier gives a valid bound.
/// `free[i]` is the unconstrained maximum of coordinate `i`.
fn pair_bound<T: Real>(n: &[T], means: &[T], free: &[T], a: &[T], j: usize, delta: T) -> T {
    let k = n.len();
    let total: T = free.iter().copied().sum();
    let mut best = total;
    for i in (0..k).filter(|&i| i != j) {
        let dual = |lambda: T| {
            coordinate_max(n[j], means[j], lambda * a[j], delta) + coordinate_max(n[i], means[i], -lambda * a[i], delta)
        };
        let slope = |lambda: T| {
            a[j] * coordinate_argmax(n[j], means[j], lambda * a[j], delta)
                - a[i] * coordinate_argmax(n[i], means[i], -lambda * a[i], delta)
        };
        if slope(T::zero()) >= T::zero() {
            continue;
        }
        let (mut lo, mut hi) = (T::zero(), T::one());
        let mut grow = 0;
        while slope(hi) < T::zero() && grow < 200 {
            lo = hi;
            hi *= T::c(4.0);
            grow += 1;
        }
        for _ in 0..40 {
            let mid = (lo + hi) / T::c(2.0);
            if slope(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let pair = dual(lo).min(dual(hi));
        let bound = total - free[i] - free[j] + pair;
        if bound < best {
            best = bound;
        }
    }
    best
}

/// Maximizer over `[δ, 1 − δ]` of `n[μ ln θ + (1 − μ) ln(1 − θ)] + cθ`.
fn coordinate_argmax<T: Real>(n: T, mu: T, c: T, delta: T) -> T {
    let hi = T::one() - delta;
    if n == T::zero() {
        return if c > T::zero() { hi } else { delta };
    }
    // Stationary point solves cθ² + (n − c)θ − nμ = 0; take the root in (0, 1).
    let b = n - c;
    let disc = (b * b + T::c(4.0) * c * n * mu).max(T::zero()).sqrt();
    let theta = if c == T::zero() {
        mu
    } else if b >= T::zero() {
        T::c(2.0) * n * mu / (b + disc)
    } else {
        (disc - b) / (T::c(2.0) * c)
    };
    theta.max(delta).min(hi)
}

fn coordinate_max<T: Real>(n: T, mu: T, c: T, delta: T) -> T {
    let theta = coordinate_argmax(n, mu, c, delta);
    bernoulli_loglik(&[n], &[mu], &[theta]) + c * theta
}

/// Runs `rounds` rounds of posterior sampling over the grid.
pub fn run_pricing_episode<T: Real>(
    grid: &PriceGrid<T>,
    valuation: &ValuationModel<T>,
    prior: &Belief<usize, T>,
    rounds: usize,
    hyp: Hypothesis,
    rng: &mut RngStream,
) -> Result<EpisodeRecord<usize, T>> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("an episode needs at least one round".into()));
    }
    valuation.validate()?;
    let revenue = expected_revenue(grid, valuation);
    let best = revenue.iter().copied().fold(T::neg_infinity(), T::max);
    let mut engine = PricingPosterior::new(grid.clone(), hyp);
    let mut stats = PricingStats::new(grid.k());
    let mut record = EpisodeRecord::with_capacity(rounds);
    for _ in 0..rounds {
        let posterior = engine.posterior(&stats, prior)?;
        let j = posterior.sample(rng)?;
        let sold = simulate_demand(valuation, grid.prices[j], rng);
        stats.update(j, sold);
        let phi = if sold { T::one() } else { T::zero() };
        record.record(j, phi, best - revenue[j], Some(posterior.entropy()));
    }
    Ok(record)
}

/// `p_j θ_{p_j}` for every grid price.
pub fn expected_revenue<T: Real>(grid: &PriceGrid<T>, valuation: &ValuationModel<T>) -> Vec<T> {
    grid.prices.iter().map(|&p| p * valuation.demand(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(prices: &[f64], m: f64) -> PriceGrid<f64> {
        PriceGrid::new(prices.to_vec(), m).unwrap()
    }

    #[test]
    fn constraint_rows() {
        let g = grid(&[1.0, 2.0, 3.0], 0.1);
        let c = pricing_constraint_set(&g);
        assert!(c.contains(&[0.5, 0.45, 0.375], 0.0));
        assert!(!c.contains(&[0.5, 0.35, 0.3], 1e-12));
        assert!(!c.contains(&[0.5, 0.55, 0.5], 1e-12));
        assert!(!c.contains(&[1.05, 1.0, 1.0], 1e-12));
        let one = pricing_constraint_set(&grid(&[2.0], 0.1));
        assert_eq!(one.len(), 2);
        assert!(one.contains(&[0.0], 0.0) && one.contains(&[1.0], 0.0) && !one.contains(&[1.1], 1e-12));
        let loose = pricing_constraint_set(&grid(&[1.0, 2.0], 1e9));
        assert!(loose.contains(&[1.0, 0.0], 0.0));
    }

    #[test]
    fn grid_validation() {
        assert!(PriceGrid::new(vec![1.0, 1.0], 1.0).is_err());
        assert!(PriceGrid::new(vec![0.0, 1.0], 1.0).is_err());
        assert!(PriceGrid::new(vec![1.0, 2.0], 0.0).is_err());
        assert!(PriceGrid::new(vec![1.0, 2.0], f64::INFINITY).is_ok());
    }

    fn grid_max(stats: &PricingStats<f64>, cons: &ConstraintSet<f64>, step: f64) -> f64 {
        let n = (1.0 / step).round() as usize;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            for k in 0..=n {
                let t = [
                    (i as f64 * step).clamp(1e-12, 1.0 - 1e-12),
                    (k as f64 * step).clamp(1e-12, 1.0 - 1e-12),
                ];
                if cons.max_violation(&t) <= 1e-12 {
                    best = best.max(bernoulli_loglik(&[10.0, 10.0], stats.means(), &t));
                }
            }
        }
        best
    }

    #[test]
    fn two_price_hypotheses() {
        let g = grid(&[0.5, 1.0], 2.0);
        let s = PricingStats::from_parts(vec![10, 10], vec![0.9, 0.8]).unwrap();
        let l1 = pricing_profile_loglik(&s, &g, 0, Hypothesis::Revenue).unwrap();
        let l2 = pricing_profile_loglik(&s, &g, 1, Hypothesis::Revenue).unwrap();
        let free = bernoulli_loglik(&[10.0, 10.0], &[0.9, 0.8], &[0.9, 0.8]);
        assert!((l2 - free).abs() < 1e-10);
        assert!(l1 < l2 - 1.0);
        for (j, l) in [(0, l1), (1, l2)] {
            let mut c = pricing_constraint_set(&g);
            c.extend(&hypothesis_constraints(&g, j, Hypothesis::Revenue)).unwrap();
            let oracle = grid_max(&s, &c, 1e-3);
            assert!(l >= oracle - 1e-9 && l - oracle < 0.05, "{l} vs {oracle}");
        }
        let prior = Belief::uniform(vec![0, 1]).unwrap();
        let q = pricing_posterior(&s, &g, &prior, Hypothesis::Revenue).unwrap();
        assert_eq!(q.mode_index(), 1);
    }

    #[test]
    fn single_price() {
        let g = grid(&[1.0], 1.0);
        let s = PricingStats::from_parts(vec![5], vec![0.4]).unwrap();
        let l = pricing_profile_loglik(&s, &g, 0, Hypothesis::Revenue).unwrap();
        assert!((l - 5.0 * (0.4 * 0.4f64.ln() + 0.6 * 0.6f64.ln())).abs() < 1e-12);
        let prior = Belief::uniform(vec![0]).unwrap();
        assert_eq!(pricing_posterior(&s, &g, &prior, Hypothesis::Revenue).unwrap(), prior);
    }

    #[test]
    fn no_data_gives_prior() {
        let g = grid(&[0.2, 0.4, 0.6], 2.0);
        let s = PricingStats::new(3);
        for j in 0..3 {
            assert_eq!(pricing_profile_loglik(&s, &g, j, Hypothesis::Revenue).unwrap(), 0.0);
        }
        let prior = Belief::new(vec![0, 1, 2], vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(pricing_posterior(&s, &g, &prior, Hypothesis::Revenue).unwrap(), prior);
        let mut engine = PricingPosterior::new(g, Hypothesis::Revenue);
        assert_eq!(engine.posterior(&s, &prior).unwrap(), prior);
    }

    #[test]
    fn symmetric_data_symmetric_posterior() {
        // Literal hypotheses under a flat demand are symmetric in the prices.
        let g = grid(&[1.0, 2.0], f64::INFINITY);
        let s = PricingStats::from_parts(vec![8, 8], vec![0.5, 0.5]).unwrap();
        let prior = Belief::uniform(vec![0, 1]).unwrap();
        let q = pricing_posterior(&s, &g, &prior, Hypothesis::Literal).unwrap();
        assert!((q.weights()[0] - q.weights()[1]).abs() < 1e-12);
    }

    #[test]
    fn uniform_valuation() {
        let v = ValuationModel::uniform(0.0, 1.0).unwrap();
        let mut rng = RngStream::new(11);
        assert!((0..1000).all(|_| simulate_demand(&v, 0.0, &mut rng)));
        assert!((0..1000).all(|_| !simulate_demand(&v, 1.5, &mut rng)));
        let hits = (0..1_000_000).filter(|_| simulate_demand(&v, 0.3, &mut rng)).count();
        assert!((hits as f64 / 1e6 - 0.7).abs() < 0.002);
        let g = grid(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], 2.0);
        let r = expected_revenue(&g, &v);
        let best = r.iter().cloned().fold(f64::MIN, f64::max);
        assert!((best - 0.25).abs() < 1e-15 && (r[4] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn piecewise_cdf() {
        let v = ValuationModel::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 1.0)]).unwrap();
        assert_eq!(v.cdf(0.5), 0.25);
        assert_eq!(v.demand(1.0), 0.5);
        assert_eq!(v.cdf(5.0), 1.0);
        let atom = ValuationModel::piecewise_linear(vec![(1.0, 0.3), (2.0, 1.0)]).unwrap();
        assert_eq!(atom.demand(1.0), 1.0);
        assert!((atom.demand(1.0f64 + 1e-12) - 0.7).abs() < 1e-9);
        let mut rng = RngStream::new(2);
        let hits = (0..200_000).filter(|_| simulate_demand(&atom, 1.5, &mut rng)).count();
        assert!((hits as f64 / 2e5 - 0.35).abs() < 0.005);
        assert!(ValuationModel::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.9)]).is_err());
        assert!(ValuationModel::piecewise_linear(vec![(0.0, 0.5), (1.0, 0.4), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn coordinate_argmax_is_stationary() {
        for &(n, mu, c) in &[
            (5.0, 0.3, 2.0),
            (5.0, 0.3, -7.0),
            (1.0, 0.0, 0.5),
            (3.0, 1.0, -0.5),
            (2.0, 0.6, 40.0),
        ] {
            let t: f64 = coordinate_argmax(n, mu, c, 1e-12);
            let d = |x: f64| bernoulli_loglik(&[n], &[mu], &[x]) + c * x;
            let best = (1..100_000).map(|i| d(i as f64 * 1e-5)).fold(f64::MIN, f64::max);
            assert!(d(t) >= best - 1e-9, "{n} {mu} {c}");
        }
    }

    #[test]
    fn engine_matches_direct_posterior() {
        let g = grid(&[0.1, 0.3, 0.5, 0.7, 0.9], 2.0);
        let prior = Belief::uniform((0..5).collect()).unwrap();
        let v = ValuationModel::uniform(0.0, 1.0).unwrap();
        let mut rng = RngStream::new(5);
        let mut stats = PricingStats::new(5);
        let mut engine = PricingPosterior::new(g.clone(), Hypothesis::Revenue);
        for round in 0..400 {
            let fast = engine.posterior(&stats, &prior).unwrap();
            if round % 40 == 0 {
                let slow = pricing_posterior(&stats, &g, &prior, Hypothesis::Revenue).unwrap();
                for (a, b) in fast.weights().iter().zip(slow.weights()) {
                    assert!((a - b).abs() < 1e-7, "{a} vs {b}");
                }
            }
            let j = rng.below(5);
            stats.update(j, simulate_demand(&v, g.prices()[j], &mut rng));
        }
    }

    #[test]
    fn pair_bound_dominates_profile() {
        let g = grid(&[0.2, 0.4, 0.6, 0.8], 1.5);
        let a = hypothesis_weights(&g, Hypothesis::Revenue);
        let mut rng = RngStream::new(8);
        for _ in 0..50 {
            let counts: Vec<u64> = (0..4).map(|_| rng.below(40) as u64).collect();
            let means: Vec<f64> = counts
                .iter()
                .map(|&n| {
                    if n == 0 {
                        0.0
                    } else {
                        rng.below(n as usize + 1) as f64 / n as f64
                    }
                })
                .collect();
            let s = PricingStats::from_parts(counts, means).unwrap();
            let n = s.weights();
            let free: Vec<f64> = (0..4).map(|i| coordinate_max(n[i], s.means[i], 0.0, 1e-12)).collect();
            for j in 0..4 {
                let exact = pricing_profile_loglik(&s, &g, j, Hypothesis::Revenue).unwrap();
                assert!(pair_bound(&n, &s.means, &free, &a, j, 1e-12) >= exact - 1e-9);
            }
        }
    }

    #[test]
    fn relaxing_m_never_lowers_profile() {
        let s = PricingStats::from_parts(vec![6, 3, 9, 4], vec![0.9, 0.1, 0.6, 0.5]).unwrap();
        for j in 0..4 {
            let mut last = f64::NEG_INFINITY;
            for m in [0.5, 1.0, 2.0, 5.0, f64::INFINITY] {
                let g = grid(&[0.2, 0.4, 0.6, 0.8], m);
                let l = pricing_profile_loglik(&s, &g, j, Hypothesis::Revenue).unwrap();
                assert!(l >= last - 1e-9);
                last = l;
            }
        }
    }
}
